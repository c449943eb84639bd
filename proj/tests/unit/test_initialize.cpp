#include <cmath>
#include <memory>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "gridsurv/errors.hpp"
#include "gridsurv/initialize.hpp"
#include "gridsurv/simulate.hpp"
#include "test_support.hpp"

namespace gridsurv {
namespace {

using test_support::survival_record;

TEST(QuadraticFit, RecoversExactQuadratic) {
  Eigen::Matrix2d a;
  a << -2.0, 0.5, 0.5, -1.0;
  const Eigen::Vector2d b(0.3, -0.7);
  const double c = 1.5;
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      const Eigen::Vector2d x(0.4 * i, 0.3 * j + 0.1);
      pts.emplace_back(x);
      vals.push_back(c + b.dot(x) + 0.5 * x.dot(a * x));
    }
  }
  const auto fit = fit_quadratic_surface(pts, vals);
  EXPECT_NEAR(fit.constant, c, 1e-10);
  EXPECT_LT((fit.gradient_at_zero - b).norm(), 1e-10);
  EXPECT_LT((fit.hessian - a).norm(), 1e-10);
  EXPECT_TRUE(fit.concave);
  const Eigen::Vector2d xstar = -a.inverse() * b;
  EXPECT_LT((fit.maximizer - xstar).norm(), 1e-9);
}

TEST(QuadraticFit, FlagsNonConcaveSurface) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<double> vals;
  for (int i = -3; i <= 3; ++i) {
    for (int j = -3; j <= 3; ++j) {
      const Eigen::Vector2d x(i, j);
      pts.emplace_back(x);
      vals.push_back(x[0] * x[0] - x[1] * x[1]);
    }
  }
  EXPECT_FALSE(fit_quadratic_surface(pts, vals).concave);
}

TEST(QuadraticFit, RejectsTooFewPoints) {
  std::vector<Eigen::VectorXd> pts{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)};
  EXPECT_THROW(fit_quadratic_surface(pts, {0.0, 1.0}), ValidationError);
}

TEST(Mle, ExponentialClosedForm) {
  Rng rng(12);
  std::vector<SurvivalRecord> recs;
  double events = 0.0, exposure = 0.0;
  for (int i = 0; i < 60; ++i) {
    const double t = 0.1 + 3.0 * rng.uniform();
    const bool ev = rng.uniform() < 0.7;
    events += ev ? 1.0 : 0.0;
    exposure += t;
    recs.push_back(survival_record("r" + std::to_string(i), ev ? Censoring::uncensored : Censoring::right, t, 0.0,
                                   {}, {rng.uniform(), rng.uniform()}));
  }
  const auto data = Dataset::from_survival(recs, {}, 1.0);
  const auto mle = fit_nonspatial_mle(data);
  ASSERT_EQ(mle.omega_t.size(), 1);
  EXPECT_NEAR(std::exp(mle.omega_t[0]), events / exposure, 1e-6 * events / exposure);
  EXPECT_FALSE(mle.trace.empty());
}

TEST(Mle, RecoversWeibullRegression) {
  const Eigen::Vector2d beta(0.5, -0.3);
  const WeibullBaseline base{0.8, 0.1};
  const auto grid = Grid::build(std::vector<Point>{{0, 0}, {1, 1}}, 3, 3);
  const Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  const auto recs = simulate_survival(3000, beta, base, field, grid, {}, 31);
  const auto mle = fit_nonspatial_mle(Dataset::from_survival(recs, {"x1", "x2"}));
  EXPECT_NEAR(mle.beta[0], 0.5, 0.08);
  EXPECT_NEAR(mle.beta[1], -0.3, 0.08);
  EXPECT_NEAR(std::exp(mle.omega_t[0]), 0.8, 0.06);
  EXPECT_NEAR(mle.omega_t[1], std::log(0.1), 0.15);
}

TEST(AdhocField, ExactRecordGivesMinusLogCumulativeHazard) {
  const WeibullBaseline b{1.5, 0.2};
  const std::vector<SurvivalRecord> recs{
      survival_record("a", Censoring::uncensored, 1.3, 0.0, {}, {0.1, 0.1}),
      survival_record("b", Censoring::uncensored, 0.4, 0.0, {}, {0.9, 0.9}),
      survival_record("c", Censoring::right, 2.0, 0.0, {}, {0.9, 0.1})};
  auto data = std::make_shared<Dataset>(Dataset::from_survival(recs, {}));
  const std::vector<Point> locs{{0, 0}, {1, 1}};
  const auto grid = Grid::build(locs, 2, 2, 2.0);
  SpatialPosterior post(data, grid, Priors::defaults(0, 2, {}));
  const Eigen::Vector2d omega(std::log(b.alpha), std::log(b.lambda));
  const auto f = adhoc_field(post, Eigen::VectorXd(0), omega);
  const double ya = -std::log(H0(b, 1.3));
  const double yb = -std::log(H0(b, 0.4));
  EXPECT_NEAR(f[static_cast<Eigen::Index>(grid.cell_of({0.1, 0.1}))], ya, 1e-10);
  EXPECT_NEAR(f[static_cast<Eigen::Index>(grid.cell_of({0.9, 0.9}))], yb, 1e-10);
  // Cells without a finite maximizer fall back to the overall mean.
  EXPECT_NEAR(f[static_cast<Eigen::Index>(grid.cell_of({0.9, 0.1}))], 0.5 * (ya + yb), 1e-10);
}

TEST(Initialize, ProducesValidStateAndPreconditioners) {
  const auto grid0 = Grid::build(std::vector<Point>{{0, 0}, {1, 1}}, 4, 4);
  CovarianceModel model{CovarianceKind::exponential, 0.16, 0.15, 1.0};
  const auto sim = simulate_field(grid0, model, 3);
  CensoringScheme scheme;
  scheme.admin_time = 500.0;
  const auto recs = simulate_survival(150, Eigen::Vector2d(0.5, -0.3), {0.8, 0.01}, sim.field, grid0, scheme, 4);
  auto data = std::make_shared<Dataset>(Dataset::from_survival(recs, {"x1", "x2"}));
  std::vector<Point> locs;
  for (const auto& r : recs) locs.push_back(r.location);
  const auto grid = Grid::build(locs, 4, 4, 2.0, BoundingBox{0, 0, 1, 1});
  SpatialPosterior post(data, grid, Priors::defaults(2, 2, {std::log(0.15), 0.3}));
  test_support::WarningCapture warnings;
  const auto init = initialize(post);
  const auto ev = post.evaluate(init.state, true);
  EXPECT_TRUE(ev.valid);
  EXPECT_TRUE(init.state.gamma.isZero());
  EXPECT_EQ(init.scalings.sigma_bo().rows(), 4);
  EXPECT_EQ(init.scalings.sigma_eta().rows(), 2);
  EXPECT_EQ(init.scalings.sigma_gamma().size(), static_cast<Eigen::Index>(grid.size()));
  EXPECT_GT(init.scalings.sigma_gamma().minCoeff(), 0.0);
  EXPECT_LE(init.scalings.sigma_gamma().maxCoeff(), 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(init.scalings.sigma_bo());
  EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  // Stage-3 estimate lies inside the +-3 sd lattice box.
  EXPECT_LE(std::abs(init.state.eta_t[1] - std::log(0.15)), 0.9 + 1e-12);
  EXPECT_LE(std::abs(init.state.eta_t[0] - 0.0), 1.5 + 1e-12);
  EXPECT_EQ(init.eta_fallback, !init.eta_fit.concave);
}

TEST(Initialize, RejectsEmptyData) {
  auto data = std::make_shared<Dataset>(Dataset::from_survival({}, {"x1"}));
  const auto grid = Grid::build(std::vector<Point>{{0, 0}, {1, 1}}, 2, 2);
  SpatialPosterior post(data, grid, Priors::defaults(1, 2, {}));
  EXPECT_THROW(initialize(post), ValidationError);
}

}  // namespace
}  // namespace gridsurv
