#include <vector>

#include <benchmark/benchmark.h>

#include "gridsurv/grid.hpp"
#include "gridsurv/rng.hpp"
#include "gridsurv/spectral.hpp"

namespace {

gridsurv::Grid square_grid(int m) {
  const std::vector<gridsurv::Point> corners{{0.0, 0.0}, {1.0, 1.0}};
  return gridsurv::Grid::build(corners, m, m, 2.0);
}

// Base matrix + forward DFT for a 2^m x 2^m grid.
void BM_BuildSpectral(benchmark::State& state) {
  const auto grid = square_grid(static_cast<int>(state.range(0)));
  const gridsurv::LagTable lags(grid);
  const gridsurv::CovarianceModel model{gridsurv::CovarianceKind::exponential, 0.5, 0.15, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(gridsurv::build_spectral(lags, model));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(grid.size()));
}
BENCHMARK(BM_BuildSpectral)->DenseRange(4, 8)->Complexity(benchmark::oNLogN);

void BM_BuildSpectralMatern(benchmark::State& state) {
  const auto grid = square_grid(static_cast<int>(state.range(0)));
  const gridsurv::LagTable lags(grid);
  const gridsurv::CovarianceModel model{gridsurv::CovarianceKind::matern, 0.5, 0.15, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(gridsurv::build_spectral(lags, model));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(grid.size()));
}
BENCHMARK(BM_BuildSpectralMatern)->DenseRange(4, 8)->Complexity(benchmark::oNLogN);

void BM_SqrtMatvec(benchmark::State& state) {
  const auto grid = square_grid(static_cast<int>(state.range(0)));
  const auto sb = gridsurv::build_spectral(grid, {gridsurv::CovarianceKind::exponential, 0.5, 0.15, 1.0});
  gridsurv::Rng rng(1);
  const Eigen::VectorXd v = rng.normal_vector(static_cast<Eigen::Index>(grid.size()));
  for (auto _ : state) benchmark::DoNotOptimize(sb.sqrt_matvec(v));
  state.SetComplexityN(static_cast<benchmark::IterationCount>(grid.size()));
}
BENCHMARK(BM_SqrtMatvec)->DenseRange(4, 8)->Complexity(benchmark::oNLogN);

}  // namespace
