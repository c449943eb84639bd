#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include <gtest/gtest.h>

#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/errors.hpp"
#include "gridsurv/posterior.hpp"
#include "gridsurv/rng.hpp"
#include "test_support.hpp"

using namespace gridsurv;

namespace {

Grid unit_grid(int m) {
  const std::vector<Point> pts{{0.0, 0.0}};
  return Grid::build(pts, m, m, 2.0, BoundingBox{0.0, 0.0, 1.0, 1.0});
}

Priors default_priors(const Dataset& d) {
  return Priors::defaults(static_cast<std::size_t>(d.covariates.cols()), d.outcome->omega_dim(),
                          NormalPrior{std::log(0.2), 0.3});
}

std::shared_ptr<const Dataset> survival_data(std::size_t n, std::uint64_t seed) {
  return std::make_shared<const Dataset>(Dataset::from_survival(test_support::mixed_records(n, seed), {"x1", "x2"}));
}

std::shared_ptr<const Dataset> count_data(std::size_t n, std::uint64_t seed) {
  return std::make_shared<const Dataset>(Dataset::from_counts(test_support::count_records(n, seed), {"x1", "x2"}));
}

// Central differences of the log posterior in every beta/omega coordinate and
// `k` random latent coordinates.
void check_gradients(const SpatialPosterior& p, const ParameterState& s, Rng& rng, int k, double tol) {
  const auto ev = p.evaluate(s, true);
  ASSERT_TRUE(ev.valid);
  const Eigen::VectorXd bo = s.beta_omega();
  for (Eigen::Index j = 0; j < bo.size(); ++j) {
    const double h = 1e-5;
    ParameterState a = s;
    ParameterState b = s;
    Eigen::VectorXd x = bo;
    x[j] += h;
    a.set_beta_omega(x);
    x[j] = bo[j] - h;
    b.set_beta_omega(x);
    const double fd = (p.log_posterior(a) - p.log_posterior(b)) / (2.0 * h);
    EXPECT_LT(test_support::relative_error(ev.grad_beta_omega[j], fd), tol) << "beta/omega " << j;
  }
  const Eigen::VectorXd lat = s.latent();
  for (int r = 0; r < k; ++r) {
    const auto j = static_cast<Eigen::Index>(rng.uniform() * static_cast<double>(lat.size()));
    const double h = 1e-5;
    ParameterState a = s;
    ParameterState b = s;
    Eigen::VectorXd x = lat;
    x[j] += h;
    a.set_latent(x);
    x[j] = lat[j] - h;
    b.set_latent(x);
    const double fd = (p.log_posterior(a) - p.log_posterior(b)) / (2.0 * h);
    EXPECT_LT(test_support::relative_error(ev.grad_latent[j], fd), tol) << "latent " << j;
  }
}

}  // namespace

TEST(Posterior, NoRecordsIsPriorOnly) {
  const auto data = std::make_shared<const Dataset>(Dataset::from_survival({}, {"x1"}));
  const SpatialPosterior p(data, unit_grid(2), default_priors(*data));
  Rng rng(1);
  const auto s = test_support::random_state(p, rng);
  double expected = 0.0;
  expected += NormalPrior{0.0, 10.0}.log_density(s.beta[0]);
  expected += NormalPrior{0.0, 10.0}.log_density(s.omega_t[0]) + NormalPrior{0.0, 10.0}.log_density(s.omega_t[1]);
  expected += NormalPrior{0.0, 0.5}.log_density(s.eta_t[0]) + NormalPrior{std::log(0.2), 0.3}.log_density(s.eta_t[1]);
  for (Eigen::Index k = 0; k < s.gamma.size(); ++k) expected += NormalPrior{0.0, 1.0}.log_density(s.gamma[k]);
  EXPECT_NEAR(p.log_posterior(s), expected, 1e-10);
  EXPECT_NEAR(dense_posterior(p, s), expected, 1e-10);
  // No data: gradient in gamma is the prior score.
  EXPECT_LT((p.grad_gamma(s) + s.gamma).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Posterior, ZeroGammaShiftsByHalfVariance) {
  const auto data = survival_data(12, 2);
  const SpatialPosterior p(data, unit_grid(3), default_priors(*data));
  Rng rng(2);
  auto s = test_support::random_state(p, rng);
  s.gamma.setZero();
  Eigen::VectorXd field;
  p.log_posterior(s, &field);
  const double sigma2 = std::exp(2.0 * s.eta_t[0]);
  const Eigen::VectorXd eta = p.linear_predictor(s, field);
  const Eigen::VectorXd expected = data->covariates * s.beta - Eigen::VectorXd::Constant(12, sigma2 / 2.0);
  EXPECT_LT((eta - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Posterior, MatchesDenseOracle) {
  const auto data = survival_data(5, 3);
  const SpatialPosterior p(data, unit_grid(2), default_priors(*data));
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const auto s = test_support::random_state(p, rng);
    EXPECT_NEAR(p.log_posterior(s), dense_posterior(p, s), 1e-8);
  }
  auto s = test_support::random_state(p, rng);
  s.gamma.setZero();
  EXPECT_NEAR(p.log_posterior(s), dense_posterior(p, s), 1e-12);
}

TEST(Posterior, StationaryDataGivesZeroGradient) {
  // alpha = 1, lambda = 1, beta = 0, gamma = 0: eta = -sigma2/2 for every
  // record; times t = exp(sigma2/2) put every record at e^eta H0 = 1.
  const double sigma = 0.5;
  const double t = std::exp(sigma * sigma / 2.0);
  std::vector<SurvivalRecord> records;
  for (int i = 0; i < 6; ++i) {
    records.push_back(test_support::survival_record("r" + std::to_string(i), Censoring::uncensored, t, 0.0,
                                               {i % 2 ? 1.0 : -1.0}, {0.1 * i + 0.05, 0.5}));
  }
  const auto data = std::make_shared<const Dataset>(Dataset::from_survival(records, {"x"}, 1.0));
  const SpatialPosterior p(data, unit_grid(3), default_priors(*data));
  auto s = p.zero_state();
  s.eta_t[0] = std::log(sigma);
  const auto ev = p.evaluate(s, true);
  ASSERT_TRUE(ev.valid);
  EXPECT_LT(ev.grad_beta_omega.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT(ev.grad_latent.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Posterior, SingleStationaryRecordBetaGradientIsPriorScore) {
  const std::vector<SurvivalRecord> records{
      test_support::survival_record("a", Censoring::uncensored, std::exp(0.125), 0.0, {1.0}, {0.5, 0.5})};
  const auto data = std::make_shared<const Dataset>(Dataset::from_survival(records, {"x"}, 1.0));
  const SpatialPosterior p(data, unit_grid(2), default_priors(*data));
  auto s = p.zero_state();
  s.eta_t[0] = std::log(0.5);
  s.beta[0] = 0.0;
  EXPECT_NEAR(p.grad_beta_omega(s)[0], (NormalPrior{0.0, 10.0}.score(0.0)), 1e-12);
}

TEST(Posterior, GradientsMatchFiniteDifferencesAllCensoringTypes) {
  const auto data = survival_data(40, 4);
  const SpatialPosterior p(data, unit_grid(3), default_priors(*data));
  Rng rng(4);
  for (int k = 0; k < 10; ++k) check_gradients(p, test_support::random_state(p, rng), rng, 10, 1e-5);
}

TEST(Posterior, GradientsMatchFiniteDifferencesPoisson) {
  const auto data = count_data(40, 5);
  const SpatialPosterior p(data, unit_grid(3), default_priors(*data));
  Rng rng(5);
  for (int k = 0; k < 10; ++k) check_gradients(p, test_support::random_state(p, rng), rng, 10, 1e-5);
}

TEST(Posterior, GradientsWithIidFrailties) {
  const auto data = survival_data(20, 6);
  auto priors = default_priors(*data);
  priors.log_sigma_u = NormalPrior{-1.0, 0.5};
  PosteriorOptions opts;
  opts.iid_frailties = true;
  const SpatialPosterior p(data, unit_grid(2), priors, opts);
  EXPECT_EQ(p.eta_dim(), 3u);
  EXPECT_EQ(p.latent_dim(), p.gamma_dim() + 20);
  Rng rng(6);
  for (int k = 0; k < 5; ++k) check_gradients(p, test_support::random_state(p, rng), rng, 20, 1e-5);
}

TEST(Posterior, SingleCellDataGradientUsesOneColumnOfTheRoot) {
  std::vector<SurvivalRecord> records;
  for (int i = 0; i < 4; ++i) {
    records.push_back(test_support::survival_record("r" + std::to_string(i), static_cast<Censoring>(i), 0.5 + 0.1 * i,
                                               1.5, {0.2 * i}, {0.3, 0.3}));
  }
  const auto data = std::make_shared<const Dataset>(Dataset::from_survival(records, {"x"}));
  const SpatialPosterior p(data, unit_grid(3), default_priors(*data));
  Rng rng(7);
  const auto s = test_support::random_state(p, rng);
  const auto ev = p.evaluate(s, true);
  const auto model = p.covariance_at(s.eta_t);
  const Eigen::MatrixXd root = dense_sqrt(dense_cov(p.grid(), model), model.sigma2, model.phi);
  const Eigen::VectorXd eta = p.linear_predictor(s, ev.field);
  const WeibullBaseline b{std::exp(s.omega_t[0]), std::exp(s.omega_t[1])};
  double g = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) g += record_dloglik_deta(records[i], b, eta[static_cast<Eigen::Index>(i)]);
  const auto c = static_cast<Eigen::Index>(p.grid().cell_of({0.3, 0.3}));
  const Eigen::VectorXd expected = -s.gamma + root.col(c) * g;
  EXPECT_LT((ev.grad_latent - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Posterior, InvariantToRecordOrder) {
  auto records = test_support::mixed_records(15, 8);
  const auto a = std::make_shared<const Dataset>(Dataset::from_survival(records, {"x1", "x2"}));
  std::reverse(records.begin(), records.end());
  const auto b = std::make_shared<const Dataset>(Dataset::from_survival(records, {"x1", "x2"}));
  const SpatialPosterior pa(a, unit_grid(3), default_priors(*a));
  const SpatialPosterior pb(b, unit_grid(3), default_priors(*b));
  Rng rng(8);
  const auto s = test_support::random_state(pa, rng);
  EXPECT_NEAR(pa.log_posterior(s), pb.log_posterior(s), 1e-10);
}

TEST(Posterior, NonPositiveDefiniteIsRejectionSignal) {
  const auto data = survival_data(10, 9);
  PosteriorOptions opts;
  opts.kind = CovarianceKind::matern;
  opts.nu = 2.0;
  const SpatialPosterior p(data, unit_grid(4), default_priors(*data), opts);
  auto s = p.zero_state();
  s.eta_t[1] = std::log(1.0);
  EXPECT_FALSE(p.evaluate(s).valid);
  EXPECT_THROW(p.log_posterior(s), NonPositiveDefinite);
}

TEST(Posterior, Validation) {
  const auto data = survival_data(10, 10);
  PosteriorOptions opts;
  opts.iid_frailties = true;
  EXPECT_THROW(SpatialPosterior(data, unit_grid(2), default_priors(*data), opts), ValidationError);
  auto priors = default_priors(*data);
  priors.beta.pop_back();
  EXPECT_THROW(SpatialPosterior(data, unit_grid(2), priors), ValidationError);
  const SpatialPosterior p(data, unit_grid(2), default_priors(*data));
  auto s = p.zero_state();
  s.gamma.resize(3);
  EXPECT_THROW(p.evaluate(s), ValidationError);
}
