#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "gridsurv/errors.hpp"
#include "gridsurv/io.hpp"
#include "test_support.hpp"

namespace gridsurv {
namespace {

TEST(SurvivalCsv, RoundTripIsExact) {
  SurvivalTable t;
  t.covariate_names = {"x1", "x2"};
  t.records = test_support::mixed_records(12, 4);
  t.records[0].time = 0.1 + 1e-16;
  std::stringstream ss;
  write_survival_csv(ss, t);
  const auto back = read_survival_csv(ss);
  ASSERT_EQ(back.records.size(), t.records.size());
  EXPECT_EQ(back.covariate_names, t.covariate_names);
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& a = t.records[i];
    const auto& b = back.records[i];
    EXPECT_EQ(a.id, b.id);
    EXPECT_EQ(a.censoring, b.censoring);
    EXPECT_EQ(a.time, b.time);
    if (a.censoring == Censoring::interval) EXPECT_EQ(a.time_hi, b.time_hi);
    EXPECT_EQ(a.covariates, b.covariates);
    EXPECT_EQ(a.location.x, b.location.x);
    EXPECT_EQ(a.location.y, b.location.y);
  }
}

TEST(SurvivalCsv, ReportsRowAndColumn) {
  std::stringstream bad("id,event,time,time_lo,time_hi,x,y,x1\na,1,2.0,,,0.1,0.2,1\nb,1,abc,,,0.1,0.2,1\n");
  try {
    read_survival_csv(bad);
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_EQ(e.column(), "time");
  }
  std::stringstream code("id,event,time,time_lo,time_hi,x,y\na,7,2.0,,,0.1,0.2\n");
  try {
    read_survival_csv(code);
    FAIL() << "expected CsvError";
  } catch (const CsvError& e) {
    EXPECT_EQ(e.row(), 2u);
    EXPECT_EQ(e.column(), "event");
  }
  std::stringstream dup("id,event,time,time_lo,time_hi,x,y\na,1,2.0,,,0.1,0.2\na,1,2.0,,,0.1,0.2\n");
  EXPECT_THROW(read_survival_csv(dup), CsvError);
  std::stringstream ragged("id,event,time,time_lo,time_hi,x,y\na,1,2.0,,,0.1\n");
  EXPECT_THROW(read_survival_csv(ragged), CsvError);
}

TEST(CountCsv, RoundTripAndKindDetection) {
  CountTable t;
  t.covariate_names = {"x1", "x2"};
  t.records = test_support::count_records(9, 2);
  std::stringstream ss;
  write_count_csv(ss, t);
  std::stringstream kind(ss.str());
  EXPECT_EQ(detect_data_kind(kind), "poisson");
  const auto back = read_count_csv(ss);
  ASSERT_EQ(back.records.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(back.records[i].count, t.records[i].count);
    EXPECT_EQ(back.records[i].covariates, t.records[i].covariates);
  }
  std::stringstream neg("id,count,x,y\na,-1,0,0\n");
  EXPECT_THROW(read_count_csv(neg), CsvError);
  std::stringstream surv("id,event,time,time_lo,time_hi,x,y\n");
  EXPECT_EQ(detect_data_kind(surv), "survival");
  std::stringstream other("id,foo\n");
  EXPECT_THROW(detect_data_kind(other), CsvError);
}

TEST(SamplesCsv, RoundTrip) {
  ChainOutput chain;
  Rng rng(3);
  for (std::size_t i = 0; i < 5; ++i) {
    Sample s;
    s.iteration = 10 + i;
    s.log_post = rng.normal();
    s.beta = rng.normal_vector(2);
    s.omega_t = rng.normal_vector(2);
    s.eta_t = rng.normal_vector(2);
    s.field = rng.normal_vector(4);
    chain.samples.push_back(s);
  }
  const auto names = parameter_names({"x1", "x2"}, {"log_alpha", "log_lambda"}, 2);
  EXPECT_EQ(names, (std::vector<std::string>{"beta_x1", "beta_x2", "log_alpha", "log_lambda", "log_sigma", "log_phi"}));
  std::stringstream ss;
  write_samples_csv(ss, chain, names);
  const auto back = read_samples_csv(ss);
  EXPECT_EQ(back.beta_names, (std::vector<std::string>{"x1", "x2"}));
  EXPECT_EQ(back.omega_names.size(), 2u);
  EXPECT_EQ(back.eta_names.size(), 2u);
  ASSERT_EQ(back.chain.samples.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(back.chain.samples[i].iteration, chain.samples[i].iteration);
    EXPECT_EQ(back.chain.samples[i].log_post, chain.samples[i].log_post);
    EXPECT_EQ(back.chain.samples[i].beta, chain.samples[i].beta);
    EXPECT_EQ(back.chain.samples[i].omega_t, chain.samples[i].omega_t);
    EXPECT_EQ(back.chain.samples[i].eta_t, chain.samples[i].eta_t);
    EXPECT_EQ(back.chain.samples[i].field, chain.samples[i].field);
  }
}

TEST(Config, DefaultsAndOverrides) {
  const auto d = parse_config("{}");
  EXPECT_EQ(d.outcome, "survival");
  EXPECT_EQ(d.m1, 5);
  EXPECT_EQ(d.mcmc.n_iterations, 1000u);
  const auto c = parse_config(R"({
    "outcome": "poisson",
    "grid": {"m1": 4, "m2": 3, "ext_factor": 3, "window": [0, 0, 2, 1]},
    "covariance": {"kind": "matern", "nu": 1.5},
    "priors": {"beta": [{"mean": 0, "sd": 5}], "log_phi": {"mean": -1.9, "sd": 0.3}},
    "mcmc": {"iterations": 500, "burnin": 100, "thin": 2, "seed": 9, "workers": 2},
    "prediction": {"thresholds": [1.1, 1.3]},
    "simulate": {"n": 50, "censoring": {"admin_time": 500}},
    "benchmark": {"dense_factor": "cholesky", "grids": [[5, 5]]}
  })");
  EXPECT_EQ(c.outcome, "poisson");
  EXPECT_EQ(c.m2, 3);
  EXPECT_EQ(c.ext_factor, 3.0);
  ASSERT_TRUE(c.window.has_value());
  EXPECT_EQ(c.window->xmax, 2.0);
  EXPECT_EQ(c.posterior.kind, CovarianceKind::matern);
  EXPECT_EQ(c.posterior.nu, 1.5);
  EXPECT_EQ(c.log_phi.mean, -1.9);
  EXPECT_EQ(c.mcmc.workers, 2u);
  EXPECT_EQ(c.mcmc.retained_count(), 200u);
  EXPECT_EQ(c.thresholds, (std::vector<double>{1.1, 1.3}));
  EXPECT_EQ(c.sim_censoring.admin_time, 500.0);
  EXPECT_EQ(c.bench.factor, DenseFactor::cholesky);
  const auto p = c.priors(3, 0);
  ASSERT_EQ(p.beta.size(), 3u);
  EXPECT_EQ(p.beta[2].sd, 5.0);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_config("{\"bogus\": 1}"), ValidationError);
  EXPECT_THROW(parse_config("{\"outcome\": \"cox\"}"), ValidationError);
  EXPECT_THROW(parse_config("{\"mcmc\": {\"iterations\": 10, \"burnin\": 10}}"), ValidationError);
  EXPECT_THROW(parse_config("{\"grid\": {\"window\": [0, 1]}}"), ValidationError);
  EXPECT_THROW(parse_config("{\"benchmark\": {\"dense_factor\": \"qr\"}}"), ValidationError);
  EXPECT_THROW(parse_config("not json"), ValidationError);
  EXPECT_THROW(parse_config("{\"priors\": {\"beta\": [{\"mean\": 0, \"sd\": 1}, {\"mean\": 0, \"sd\": 1}]}}").priors(3, 2),
               ValidationError);
}

TEST(Format, DoubleRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) EXPECT_EQ(std::stod(format_double(v)), v);
}

}  // namespace
}  // namespace gridsurv
