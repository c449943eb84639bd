#include <memory>
#include <vector>

#include <benchmark/benchmark.h>

#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/posterior.hpp"
#include "gridsurv/simulate.hpp"

namespace {

std::shared_ptr<const gridsurv::Dataset> survival_data(std::size_t n) {
  const std::vector<gridsurv::Point> corners{{0.0, 0.0}, {1.0, 1.0}};
  const auto grid = gridsurv::Grid::build(corners, 4, 4, 2.0);
  const Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  gridsurv::CensoringScheme scheme;
  scheme.admin_time = 50.0;
  auto recs = gridsurv::simulate_survival(n, Eigen::Vector2d(0.5, -0.3), {1.0, 0.02}, field, grid, scheme, 7);
  return std::make_shared<const gridsurv::Dataset>(gridsurv::Dataset::from_survival(std::move(recs), {"x1", "x2"}));
}

gridsurv::Priors priors() { return gridsurv::Priors::defaults(2, 2, {-1.9, 0.5}); }

// One posterior + gradient evaluation on a 64 x 64 extended grid.
void BM_FourierEvaluate(benchmark::State& state) {
  const auto data = survival_data(static_cast<std::size_t>(state.range(0)));
  std::vector<gridsurv::Point> locs(data->locations.begin(), data->locations.end());
  const auto grid = gridsurv::Grid::build(locs, 6, 6, 2.0, gridsurv::BoundingBox{0.0, 0.0, 1.0, 1.0});
  const gridsurv::SpatialPosterior post(data, grid, priors());
  auto s = post.zero_state();
  s.eta_t = Eigen::Vector2d(-0.7, -1.9);
  for (auto _ : state) benchmark::DoNotOptimize(post.evaluate(s, true));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FourierEvaluate)->RangeMultiplier(2)->Range(250, 2000)->Complexity();

// One evaluation of the per-observation model with a dense n x n root.
void BM_DenseEvaluate(benchmark::State& state) {
  const auto data = survival_data(static_cast<std::size_t>(state.range(0)));
  const gridsurv::StandardPosterior post(data, priors());
  auto s = post.zero_state();
  s.eta_t = Eigen::Vector2d(-0.7, -1.9);
  for (auto _ : state) benchmark::DoNotOptimize(post.evaluate(s, true));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_DenseEvaluate)->RangeMultiplier(2)->Range(50, 400)->Complexity(benchmark::oNCubed);

}  // namespace
