#include <algorithm>
#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/errors.hpp"
#include "gridsurv/simulate.hpp"
#include "gridsurv/stats.hpp"
#include "test_support.hpp"

namespace gridsurv {
namespace {

Grid unit_grid(int m) { return Grid::build(std::vector<Point>{{0, 0}, {1, 1}}, m, m, 2.0); }

Eigen::VectorXd zero_field(const Grid& g) { return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(g.size())); }

TEST(SimulateField, DeterministicGivenSeed) {
  const auto g = unit_grid(3);
  const CovarianceModel m{CovarianceKind::exponential, 0.5, 0.3, 1.0};
  const auto a = simulate_field(g, m, 42);
  const auto b = simulate_field(g, m, 42);
  const auto c = simulate_field(g, m, 43);
  EXPECT_EQ(a.field, b.field);
  EXPECT_NE(a.field, c.field);
  EXPECT_LT((gamma_to_field(build_spectral(g, m), a.gamma, 0.5) - a.field).norm(), 1e-12);
}

TEST(SimulateField, ZeroVarianceGivesZeroField) {
  const auto g = unit_grid(3);
  const CovarianceModel m{CovarianceKind::exponential, 0.0, 0.3, 1.0};
  const auto sb = build_spectral(g, m);
  Rng rng(1);
  const auto s = simulate_field(sb, rng);
  EXPECT_TRUE(s.field.isZero(0.0));
}

TEST(SimulateField, EmpiricalCovarianceMatchesDense) {
  const auto g = unit_grid(2);
  const CovarianceModel model{CovarianceKind::matern, 0.6, 0.4, 1.0};
  const auto sb = build_spectral(g, model);
  const Eigen::MatrixXd dense = dense_cov(g, model);
  const auto m = static_cast<Eigen::Index>(g.size());
  const int n = 20000;
  Rng rng(5);
  Eigen::MatrixXd samples(n, m);
  for (int i = 0; i < n; ++i) samples.row(i) = simulate_field(sb, rng).field.transpose();
  const Eigen::RowVectorXd mean = samples.colwise().mean();
  for (Eigen::Index j = 0; j < m; ++j) {
    EXPECT_NEAR(mean[j], -0.3, 4.0 * std::sqrt(0.6 / n));
  }
  const Eigen::MatrixXd centered = samples.rowwise() - mean;
  const Eigen::MatrixXd emp = centered.transpose() * centered / (n - 1.0);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      const double se = std::sqrt((dense(i, j) * dense(i, j) + dense(i, i) * dense(j, j)) / n);
      EXPECT_NEAR(emp(i, j), dense(i, j), 4.0 * se) << i << "," << j;
    }
  }
}

TEST(SimulateSurvival, UnitExponentialTimes) {
  const auto g = unit_grid(2);
  const auto recs = simulate_survival(3000, Eigen::Vector2d::Zero(), {1.0, 1.0}, zero_field(g), g, {}, 8);
  ASSERT_EQ(recs.size(), 3000u);
  std::vector<double> t;
  for (const auto& r : recs) {
    EXPECT_EQ(r.censoring, Censoring::uncensored);
    EXPECT_TRUE(g.bbox().contains(r.location));
    EXPECT_EQ(r.covariates.size(), 2u);
    t.push_back(r.time);
  }
  const auto ks = ks_one_sample(t, [](double x) { return x <= 0.0 ? 0.0 : 1.0 - std::exp(-x); });
  EXPECT_GT(ks.p_value, 0.01);
  const auto again = simulate_survival(3000, Eigen::Vector2d::Zero(), {1.0, 1.0}, zero_field(g), g, {}, 8);
  EXPECT_EQ(again[17].time, recs[17].time);
}

TEST(SimulateSurvival, AdministrativeCensoringAtZeroPlus) {
  const auto g = unit_grid(2);
  CensoringScheme s;
  s.admin_time = 1e-300;
  const auto recs = simulate_survival(500, Eigen::Vector2d(0.5, -0.3), {0.8, 0.01}, zero_field(g), g, s, 2);
  for (const auto& r : recs) {
    EXPECT_EQ(r.censoring, Censoring::right);
    EXPECT_EQ(r.time, 1e-300);
  }
}

TEST(SimulateSurvival, HighRiskGivesShortTimes) {
  const auto g = unit_grid(2);
  const auto lo = simulate_survival(400, Eigen::Vector2d::Zero(), {1.0, 1.0}, zero_field(g), g, {}, 3);
  const auto hi = simulate_survival(400, Eigen::Vector2d::Zero(), {1.0, 1.0}, zero_field(g).array() + 10.0, g, {}, 3);
  double mlo = 0.0, mhi = 0.0;
  for (std::size_t i = 0; i < lo.size(); ++i) {
    mlo += lo[i].time;
    mhi += hi[i].time;
    EXPECT_NEAR(hi[i].time, lo[i].time * std::exp(-10.0), 1e-12 * lo[i].time + 1e-300);
  }
  EXPECT_LT(mhi, 1e-3 * mlo);
}

TEST(SimulateSurvival, CensoringPlansProduceValidRecords) {
  const auto g = unit_grid(2);
  CensoringScheme s;
  s.left_rate = 0.3;
  s.interval_rate = 0.3;
  s.inspection_max = 2.0;
  s.inspection_width = 0.5;
  s.admin_time = 5.0;
  const auto recs = simulate_survival(1000, Eigen::Vector2d(0.2, 0.1), {1.2, 0.5}, zero_field(g), g, s, 4);
  std::array<int, 4> counts{};
  for (const auto& r : recs) {
    EXPECT_NO_THROW(r.validate());
    ++counts[static_cast<std::size_t>(r.censoring)];
    if (r.censoring == Censoring::interval) EXPECT_GT(r.time_hi, r.time);
  }
  for (int c : counts) EXPECT_GT(c, 0);
  s.left_rate = 0.8;
  EXPECT_THROW(simulate_survival(10, Eigen::Vector2d::Zero(), {1.0, 1.0}, zero_field(g), g, s, 1), ValidationError);
}

TEST(SimulatePoisson, MeanAndZeroRate) {
  const auto g = unit_grid(2);
  const auto recs = simulate_poisson(4000, Eigen::Vector2d::Zero(), zero_field(g), g, 6);
  double sum = 0.0;
  for (const auto& r : recs) sum += static_cast<double>(r.count);
  EXPECT_NEAR(sum / 4000.0, 1.0, 4.0 * std::sqrt(1.0 / 4000.0));
  const auto none = simulate_poisson(200, Eigen::Vector2d::Zero(), zero_field(g).array() - 800.0, g, 6);
  for (const auto& r : none) EXPECT_EQ(r.count, 0);
}

}  // namespace
}  // namespace gridsurv
