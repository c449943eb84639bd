#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/errors.hpp"
#include "test_support.hpp"

namespace gridsurv {
namespace {

Grid unit_grid(int m) { return Grid::build(std::vector<Point>{{0, 0}, {1, 1}}, m, m, 2.0); }

TEST(DenseCov, DiagonalAndCirculantShift) {
  const auto g = unit_grid(3);
  const CovarianceModel model{CovarianceKind::exponential, 0.7, 0.2, 1.0};
  const auto c = dense_cov(g, model);
  ASSERT_EQ(c.rows(), 64);
  for (Eigen::Index i = 0; i < c.rows(); ++i) EXPECT_DOUBLE_EQ(c(i, i), 0.7);
  EXPECT_LT((c - c.transpose()).cwiseAbs().maxCoeff(), 1e-15);
  for (std::size_t a = 0; a < g.size(); a += 5) {
    for (std::size_t b = 0; b < g.size(); b += 3) {
      const std::size_t a2 = g.index((g.col(a) + 3) % g.nx(), (g.row(a) + 5) % g.ny());
      const std::size_t b2 = g.index((g.col(b) + 3) % g.nx(), (g.row(b) + 5) % g.ny());
      EXPECT_NEAR(c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                  c(static_cast<Eigen::Index>(a2), static_cast<Eigen::Index>(b2)), 1e-15);
      EXPECT_NEAR(c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)),
                  cov_value(model, g.toroidal_distance(a, b)), 1e-15);
    }
  }
}

TEST(DenseCov, CellGuard) {
  const auto g = unit_grid(4);
  const CovarianceModel model{CovarianceKind::exponential, 1.0, 0.2, 1.0};
  EXPECT_THROW(dense_cov(g, model, 100), ValidationError);
  EXPECT_NO_THROW(dense_cov(g, model, 256));
}

TEST(DenseCov, PointCovariance) {
  const std::vector<Point> pts{{0, 0}, {0.3, 0.4}, {1, 0}};
  const CovarianceModel model{CovarianceKind::exponential, 2.0, 0.5, 1.0};
  const auto c = dense_point_cov(pts, model);
  EXPECT_NEAR(c(0, 1), 2.0 * std::exp(-1.0), 1e-14);
  EXPECT_NEAR(c(0, 2), 2.0 * std::exp(-2.0), 1e-14);
  EXPECT_DOUBLE_EQ(c(2, 2), 2.0);
}

TEST(DenseSqrt, SquaresBackAndRejectsSingular) {
  const auto g = unit_grid(2);
  const CovarianceModel model{CovarianceKind::matern, 0.5, 0.2, 1.0};
  const auto c = dense_cov(g, model);
  const auto r = dense_sqrt(c, 0.5, 0.2);
  EXPECT_LT((r * r - c).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((r - r.transpose()).cwiseAbs().maxCoeff(), 1e-12);
  const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(4, 4, 1.0);
  EXPECT_THROW(dense_sqrt(ones, 1.0, 1.0), NonPositiveDefinite);
}

TEST(StandardPosterior, GradientsMatchFiniteDifferences) {
  auto data = std::make_shared<const Dataset>(Dataset::from_survival(test_support::mixed_records(12, 3), {"x1", "x2"}));
  StandardPosterior post(data, Priors::defaults(2, 2, {std::log(0.3), 0.5}));
  Rng rng(4);
  ParameterState s = post.zero_state();
  ASSERT_EQ(s.gamma.size(), 12);
  s.beta = Eigen::Vector2d(0.2, -0.1);
  s.omega_t = Eigen::Vector2d(0.1, -0.8);
  s.eta_t = Eigen::Vector2d(-0.5, std::log(0.3));
  s.gamma = rng.normal_vector(12);
  const auto ev = post.evaluate(s, true);
  ASSERT_TRUE(ev.valid);
  ASSERT_EQ(ev.field.size(), 12);
  const double h = 1e-5;
  const auto bo = s.beta_omega();
  for (Eigen::Index j = 0; j < bo.size(); ++j) {
    auto f = [&](double v) {
      ParameterState t = s;
      Eigen::VectorXd b = bo;
      b[j] = v;
      t.set_beta_omega(b);
      return post.evaluate(t, false).log_post;
    };
    EXPECT_NEAR(ev.grad_beta_omega[j], test_support::central_difference(f, bo[j], h),
                1e-5 * std::max(1.0, std::abs(ev.grad_beta_omega[j])));
  }
  for (Eigen::Index j = 0; j < s.gamma.size(); ++j) {
    auto f = [&](double v) {
      ParameterState t = s;
      t.gamma[j] = v;
      return post.evaluate(t, false).log_post;
    };
    EXPECT_NEAR(ev.grad_latent[j], test_support::central_difference(f, s.gamma[j], h),
                1e-5 * std::max(1.0, std::abs(ev.grad_latent[j])));
  }
}

TEST(StandardPosterior, FactorsAgreeOnDensity) {
  auto data = std::make_shared<const Dataset>(Dataset::from_survival(test_support::mixed_records(10, 5), {"x1", "x2"}));
  const auto pri = Priors::defaults(2, 2, {std::log(0.3), 0.5});
  StandardPosterior eig(data, pri, {}, DenseFactor::eigen);
  StandardPosterior chol(data, pri, {}, DenseFactor::cholesky);
  ParameterState s = eig.zero_state();
  s.eta_t = Eigen::Vector2d(-0.3, std::log(0.3));
  // gamma = 0 gives Y = -sigma^2/2 under either root.
  EXPECT_NEAR(eig.evaluate(s, false).log_post, chol.evaluate(s, false).log_post, 1e-10);
  const auto f = eig.evaluate(s, false).field;
  EXPECT_NEAR(f[0], -0.5 * std::exp(-0.6), 1e-14);
}

TEST(Benchmark, ConfigValidation) {
  BenchmarkConfig c;
  EXPECT_NO_THROW(c.validate());
  c.repetitions = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  c = BenchmarkConfig{};
  c.dense_sizes = {0};
  EXPECT_THROW(c.validate(), ValidationError);
}

TEST(Benchmark, TimingPointsArePositive) {
  BenchmarkConfig c;
  c.repetitions = 1;
  c.grids = {{4, 4}};
  EXPECT_GT(time_dense(30, c, 5), 0.0);
  EXPECT_GT(time_fourier(50, {4, 4}, c, 5), 0.0);
}

}  // namespace
}  // namespace gridsurv
