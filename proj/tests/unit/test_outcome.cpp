#include <cmath>
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "gridsurv/errors.hpp"
#include "gridsurv/outcome.hpp"
#include "gridsurv/rng.hpp"
#include "test_support.hpp"

using namespace gridsurv;
using test_support::central_difference;
using test_support::survival_record;

namespace {

SurvivalRecord rec(Censoring c, double t, double t_hi = 0.0) { return survival_record("a", c, t, t_hi, {}, {}); }

const Censoring kAll[] = {Censoring::uncensored, Censoring::right, Censoring::left, Censoring::interval};

}  // namespace

TEST(Weibull, HazardForms) {
  EXPECT_DOUBLE_EQ(h0({1.0, 0.3}, 0.1), 0.3);
  EXPECT_DOUBLE_EQ(h0({1.0, 0.3}, 17.0), 0.3);
  EXPECT_DOUBLE_EQ(H0({0.7, 0.3}, 0.0), 0.0);
  EXPECT_NEAR(h0({0.611, 3.02e-3}, 1.0), 1.845e-3, 5e-7);
  EXPECT_THROW(h0({0.5, 1.0}, 0.0), ValidationError);
  EXPECT_THROW(H0({0.5, 1.0}, -1.0), ValidationError);
}

TEST(Weibull, CumulativeHazardDerivativeIsHazard) {
  const WeibullBaseline b{1.7, 0.02};
  for (double t : {0.3, 1.0, 4.0, 25.0}) {
    const double fd = central_difference([&](double x) { return H0(b, x); }, t, 1e-6 * t);
    EXPECT_NEAR(fd, h0(b, t), 1e-7 * h0(b, t));
    EXPECT_LE(H0(b, t), H0(b, t * 1.01));
  }
}

TEST(RecordLoglik, WorkedValues) {
  const WeibullBaseline unit{1.0, 1.0};
  EXPECT_DOUBLE_EQ(record_loglik(rec(Censoring::right, 1.0), unit, 0.0), -1.0);
  EXPECT_NEAR(record_loglik(rec(Censoring::left, 1.0), unit, 50.0), 0.0, 1e-300);
  EXPECT_DOUBLE_EQ(record_loglik(rec(Censoring::uncensored, 2.0), unit, 0.0), -2.0);
  EXPECT_DOUBLE_EQ(record_dloglik_deta(rec(Censoring::right, 1.0), unit, 0.0), -1.0);
  EXPECT_DOUBLE_EQ(record_dloglik_deta(rec(Censoring::uncensored, 1.0), unit, 0.0), 0.0);
  // Small probabilities stay accurate.
  EXPECT_NEAR(record_loglik(rec(Censoring::left, 1.0), unit, std::log(1e-12)), std::log(1e-12), 1e-9);
  EXPECT_NEAR(record_loglik(rec(Censoring::interval, 1.0, 1.0 + 1e-10), unit, 0.0), -1.0 + std::log(1e-10), 1e-6);
}

TEST(RecordLoglik, MatchesDirectProbabilities) {
  const WeibullBaseline b{1.3, 0.4};
  const double eta = 0.2;
  const double t1 = 0.8;
  const double t2 = 1.9;
  const auto surv = [&](double t) { return std::exp(-std::exp(eta) * H0(b, t)); };
  EXPECT_NEAR(record_loglik(rec(Censoring::right, t1), b, eta), std::log(surv(t1)), 1e-14);
  EXPECT_NEAR(record_loglik(rec(Censoring::left, t1), b, eta), std::log(1.0 - surv(t1)), 1e-14);
  EXPECT_NEAR(record_loglik(rec(Censoring::interval, t1, t2), b, eta), std::log(surv(t1) - surv(t2)), 1e-14);
  // f = S h and S = exp(-H).
  const double f = std::exp(record_loglik(rec(Censoring::uncensored, t1), b, eta));
  EXPECT_NEAR(f, surv(t1) * std::exp(eta) * h0(b, t1), 1e-14);
}

TEST(RecordLoglik, ProbabilityContributionsAreNonPositiveAndOrdered) {
  Rng rng(21);
  for (int k = 0; k < 200; ++k) {
    const WeibullBaseline b{std::exp(0.5 * rng.normal()), std::exp(rng.normal())};
    const double eta = rng.normal();
    const double t1 = 0.1 + 3.0 * rng.uniform();
    const double t2 = t1 + 0.01 + rng.uniform();
    EXPECT_LE(record_loglik(rec(Censoring::right, t1), b, eta), 0.0);
    EXPECT_LE(record_loglik(rec(Censoring::left, t1), b, eta), 0.0);
    EXPECT_LE(record_loglik(rec(Censoring::interval, t1, t2), b, eta), 0.0);
    // Non-decreasing in t; both round to 0 once S(t1) underflows.
    EXPECT_LE(record_loglik(rec(Censoring::left, t1), b, eta), record_loglik(rec(Censoring::left, t2), b, eta));
  }
}

TEST(RecordLoglik, EtaDerivativesMatchFiniteDifferences) {
  Rng rng(22);
  for (int k = 0; k < 100; ++k) {
    for (auto c : kAll) {
      const WeibullBaseline b{std::exp(0.4 * rng.normal()), std::exp(rng.normal())};
      const double t1 = 0.2 + 2.0 * rng.uniform();
      const auto r = rec(c, t1, t1 + 0.05 + rng.uniform());
      const double eta = rng.normal();
      const auto f = [&](double e) { return record_loglik(r, b, e); };
      const auto g = [&](double e) { return record_dloglik_deta(r, b, e); };
      const double d1 = record_dloglik_deta(r, b, eta);
      EXPECT_LT(test_support::relative_error(d1, central_difference(f, eta, 1e-6)), 1e-6) << static_cast<int>(c);
      EXPECT_LT(test_support::relative_error(record_d2loglik_deta2(r, b, eta), central_difference(g, eta, 1e-6)), 1e-6);
    }
  }
}

TEST(RecordLoglik, OmegaDerivativesMatchFiniteDifferences) {
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    for (auto c : kAll) {
      const double la = 0.4 * rng.normal();
      const double ll = rng.normal();
      const double t1 = 0.2 + 2.0 * rng.uniform();
      const auto r = rec(c, t1, t1 + 0.05 + rng.uniform());
      const double eta = rng.normal();
      const auto g = dloglik_domega(r, {std::exp(la), std::exp(ll)}, eta);
      const auto fa = [&](double x) { return record_loglik(r, {std::exp(x), std::exp(ll)}, eta); };
      const auto fl = [&](double x) { return record_loglik(r, {std::exp(la), std::exp(x)}, eta); };
      EXPECT_LT(test_support::relative_error(g[0], central_difference(fa, la, 1e-6)), 1e-6);
      EXPECT_LT(test_support::relative_error(g[1], central_difference(fl, ll, 1e-6)), 1e-6);
    }
  }
}

TEST(RecordLoglik, OmegaDerivativeWorkedValues) {
  const WeibullBaseline b{1.4, 0.3};
  const double u = std::exp(0.5) * H0(b, 2.0);
  EXPECT_NEAR(dloglik_domega(rec(Censoring::right, 2.0), b, 0.5)[1], -u, 1e-14);
  EXPECT_DOUBLE_EQ(dloglik_domega(rec(Censoring::uncensored, 1.0), {1.0, 1.0}, 0.0)[1], 0.0);
}

TEST(RecordLoglik, DegenerateIntervalAndBadInput) {
  const WeibullBaseline flat{1e-20, 1.0};
  EXPECT_THROW(record_loglik(rec(Censoring::interval, 1.0, 2.0), flat, 0.0), ModelDegenerate);
  EXPECT_THROW(record_loglik(rec(Censoring::interval, 2.0, 1.0), {1.0, 1.0}, 0.0), ValidationError);
  EXPECT_THROW(record_loglik(rec(Censoring::right, -1.0), {1.0, 1.0}, 0.0), ValidationError);
  EXPECT_THROW(record_loglik(rec(Censoring::right, 1.0), {1.0, 1.0}, std::nan("")), ValidationError);
  EXPECT_THROW(censoring_from_code(4), ValidationError);
  EXPECT_EQ(censoring_from_code(3), Censoring::interval);
}

TEST(Poisson, WorkedValuesAndDerivatives) {
  EXPECT_DOUBLE_EQ(poisson_loglik(0, 0.0), -1.0);
  EXPECT_NEAR(poisson_dloglik_deta(7, std::log(7.0)), 0.0, 1e-14);
  EXPECT_THROW(poisson_loglik(-1, 0.0), ValidationError);
  for (std::int64_t z = 0; z < 12; ++z) {
    for (double eta = -2.0; eta <= 2.5; eta += 0.5) {
      const double fd = central_difference([&](double e) { return poisson_loglik(z, e); }, eta, 1e-5);
      EXPECT_NEAR(poisson_dloglik_deta(z, eta), fd, 1e-8 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST(SurvivalOutcome, BatchMatchesScalarFunctions) {
  const auto records = test_support::mixed_records(40, 3);
  const SurvivalOutcome out(records);
  Rng rng(4);
  std::vector<double> eta(records.size());
  for (auto& e : eta) e = 0.5 * rng.normal();
  const std::vector<double> omega{0.2, -0.4};
  const WeibullBaseline b{std::exp(0.2), std::exp(-0.4)};
  std::vector<double> deta(records.size());
  std::vector<double> domega(2);
  std::vector<double> d2(records.size());
  const double total = out.evaluate(eta, omega, deta, domega);
  out.second_derivative(eta, omega, d2);
  double expected = 0.0;
  double ga = 0.0;
  double gl = 0.0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    expected += record_loglik(records[i], b, eta[i]);
    EXPECT_NEAR(deta[i], record_dloglik_deta(records[i], b, eta[i]), 1e-12);
    EXPECT_NEAR(d2[i], record_d2loglik_deta2(records[i], b, eta[i]), 1e-12);
    const auto g = dloglik_domega(records[i], b, eta[i]);
    ga += g[0];
    gl += g[1];
  }
  EXPECT_NEAR(total, expected, 1e-10);
  EXPECT_NEAR(domega[0], ga, 1e-10);
  EXPECT_NEAR(domega[1], gl, 1e-10);
  EXPECT_EQ(out.omega_names(), (std::vector<std::string>{"log_alpha", "log_lambda"}));
}

TEST(SurvivalOutcome, FixedShapeUsesRateOnly) {
  const auto records = test_support::mixed_records(8, 5);
  const SurvivalOutcome out(records, 1.0);
  EXPECT_EQ(out.omega_dim(), 1u);
  const std::vector<double> eta(records.size(), 0.1);
  const std::vector<double> omega{-0.3};
  std::vector<double> domega(1);
  const double v = out.evaluate(eta, omega, {}, domega);
  const SurvivalOutcome full(records);
  std::vector<double> full_domega(2);
  EXPECT_NEAR(v, full.evaluate(eta, std::vector<double>{0.0, -0.3}, {}, full_domega), 1e-12);
  EXPECT_NEAR(domega[0], full_domega[1], 1e-12);
}

TEST(SurvivalOutcome, EtaMaximizers) {
  const WeibullBaseline b{0.9, 0.2};
  const std::vector<SurvivalRecord> records{rec(Censoring::uncensored, 2.0), rec(Censoring::interval, 1.0, 3.0),
                                            rec(Censoring::right, 1.0), rec(Censoring::left, 1.0)};
  const SurvivalOutcome out(records);
  const std::vector<double> omega{std::log(0.9), std::log(0.2)};
  EXPECT_NEAR(out.eta_maximizer(0, omega), -std::log(H0(b, 2.0)), 1e-14);
  const double e1 = out.eta_maximizer(1, omega);
  EXPECT_NEAR(record_dloglik_deta(records[1], b, e1), 0.0, 1e-12);
  EXPECT_TRUE(std::isnan(out.eta_maximizer(2, omega)));
  EXPECT_TRUE(std::isnan(out.eta_maximizer(3, omega)));
}

TEST(PoissonOutcome, BatchAndMaximizer) {
  const auto records = test_support::count_records(30, 6);
  const PoissonOutcome out(records);
  std::vector<double> eta(records.size(), 0.3);
  std::vector<double> deta(records.size());
  double expected = 0.0;
  for (const auto& r : records) expected += poisson_loglik(r.count, 0.3);
  EXPECT_NEAR(out.evaluate(eta, {}, deta, {}), expected, 1e-10);
  for (std::size_t i = 0; i < records.size(); ++i) {
    EXPECT_NEAR(deta[i], poisson_dloglik_deta(records[i].count, 0.3), 1e-14);
    const double m = out.eta_maximizer(i, {});
    if (records[i].count == 0) {
      EXPECT_TRUE(std::isnan(m));
    } else {
      EXPECT_NEAR(m, std::log(static_cast<double>(records[i].count)), 1e-14);
    }
  }
}
