#include "gridsurv/outcome.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "gridsurv/errors.hpp"

namespace gridsurv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// x / expm1(x), continuous at 0.
double ratio_expm1(double x) {
  if (x == 0.0) return 1.0;
  return x / std::expm1(x);
}

// d/dx [x / expm1(x)]
double ratio_expm1_derivative(double x) {
  if (std::abs(x) < 1e-3) return -0.5 + x / 6.0 - x * x * x / 180.0;
  const double em = std::expm1(x);
  return 1.0 / em - x / (em * -std::expm1(-x));
}

struct Contribution {
  double ll = 0.0;
  double deta = 0.0;
  double d2eta = 0.0;
  double dlog_alpha = 0.0;
  double dlog_lambda = 0.0;
};

// log_t_hi is only read for interval records.
Contribution contribution(Censoring c, double eta, double alpha, double lambda, double log_t, double log_t_hi) {
  Contribution out;
  const double scale = std::exp(eta) * lambda;
  switch (c) {
    case Censoring::uncensored: {
      const double u = scale * std::exp(alpha * log_t);
      out.ll = eta + std::log(alpha) + std::log(lambda) + (alpha - 1.0) * log_t - u;
      out.deta = 1.0 - u;
      out.d2eta = -u;
      out.dlog_lambda = 1.0 - u;
      out.dlog_alpha = 1.0 + alpha * log_t * (1.0 - u);
      break;
    }
    case Censoring::right: {
      const double u = scale * std::exp(alpha * log_t);
      out.ll = -u;
      out.deta = -u;
      out.d2eta = -u;
      out.dlog_lambda = -u;
      out.dlog_alpha = -u * alpha * log_t;
      break;
    }
    case Censoring::left: {
      const double u = scale * std::exp(alpha * log_t);
      out.ll = std::log(-std::expm1(-u));
      const double g = ratio_expm1(u);
      out.deta = g;
      out.d2eta = ratio_expm1_derivative(u) * u;
      out.dlog_lambda = g;
      out.dlog_alpha = g * alpha * log_t;
      break;
    }
    case Censoring::interval: {
      const double u1 = scale * std::exp(alpha * log_t);
      const double u2 = scale * std::exp(alpha * log_t_hi);
      const double delta = u2 - u1;
      if (!(delta > 0.0)) {
        out.ll = kNegInf;
        out.deta = out.d2eta = out.dlog_alpha = out.dlog_lambda = std::numeric_limits<double>::quiet_NaN();
        break;
      }
      out.ll = -u1 + std::log(-std::expm1(-delta));
      out.deta = -u1 + ratio_expm1(delta);
      out.d2eta = -u1 + ratio_expm1_derivative(delta) * delta;
      out.dlog_lambda = out.deta;
      // d ll / d u1 = -1 / (1 - e^-delta), d ll / d u2 = 1 / expm1(delta)
      out.dlog_alpha = -u1 * alpha * log_t / -std::expm1(-delta) + u2 * alpha * log_t_hi / std::expm1(delta);
      break;
    }
  }
  return out;
}

void check_eta(double eta) {
  if (!std::isfinite(eta)) throw ValidationError("linear predictor must be finite");
}

Contribution record_contribution(const SurvivalRecord& r, const WeibullBaseline& b, double eta) {
  r.validate();
  check_eta(eta);
  if (!(b.alpha > 0.0) || !(b.lambda > 0.0)) throw ValidationError("Weibull alpha and lambda must be > 0");
  const double log_t_hi = r.censoring == Censoring::interval ? std::log(r.time_hi) : 0.0;
  if (r.censoring == Censoring::interval && H0(b, r.time) == H0(b, r.time_hi)) {
    throw ModelDegenerate("interval record '" + r.id + "' has equal cumulative hazard at both end points");
  }
  return contribution(r.censoring, eta, b.alpha, b.lambda, std::log(r.time), log_t_hi);
}

}  // namespace

Censoring censoring_from_code(int code) {
  switch (code) {
    case 0:
      return Censoring::right;
    case 1:
      return Censoring::uncensored;
    case 2:
      return Censoring::left;
    case 3:
      return Censoring::interval;
    default:
      throw ValidationError("unknown censoring code " + std::to_string(code) + " (expected 0, 1, 2 or 3)");
  }
}

void SurvivalRecord::validate() const {
  auto fail = [this](const std::string& what) {
    throw ValidationError("record '" + id + "': " + what);
  };
  if (!std::isfinite(time) || !(time > 0.0)) fail("time must be positive and finite");
  if (censoring == Censoring::interval) {
    if (!std::isfinite(time_hi) || !(time_hi > time)) fail("interval records need time < time_hi < inf");
  }
  for (double x : covariates) {
    if (!std::isfinite(x)) fail("covariates must be finite");
  }
}

double h0(const WeibullBaseline& b, double t) {
  if (!(t >= 0.0)) throw ValidationError("h0: time must be >= 0");
  if (t == 0.0 && b.alpha < 1.0) throw ValidationError("h0: hazard is unbounded at t = 0 when alpha < 1");
  return b.alpha * b.lambda * std::pow(t, b.alpha - 1.0);
}

double H0(const WeibullBaseline& b, double t) {
  if (!(t >= 0.0)) throw ValidationError("H0: time must be >= 0");
  return b.lambda * std::pow(t, b.alpha);
}

double record_loglik(const SurvivalRecord& r, const WeibullBaseline& b, double eta) {
  return record_contribution(r, b, eta).ll;
}

double record_dloglik_deta(const SurvivalRecord& r, const WeibullBaseline& b, double eta) {
  return record_contribution(r, b, eta).deta;
}

double record_d2loglik_deta2(const SurvivalRecord& r, const WeibullBaseline& b, double eta) {
  return record_contribution(r, b, eta).d2eta;
}

std::array<double, 2> dloglik_domega(const SurvivalRecord& r, const WeibullBaseline& b, double eta) {
  const auto c = record_contribution(r, b, eta);
  return {c.dlog_alpha, c.dlog_lambda};
}

double poisson_loglik(std::int64_t z, double eta) {
  if (z < 0) throw ValidationError("poisson_loglik: count must be >= 0");
  check_eta(eta);
  return static_cast<double>(z) * eta - std::exp(eta) - std::lgamma(static_cast<double>(z) + 1.0);
}

double poisson_dloglik_deta(std::int64_t z, double eta) {
  if (z < 0) throw ValidationError("poisson_dloglik_deta: count must be >= 0");
  check_eta(eta);
  return static_cast<double>(z) - std::exp(eta);
}

SurvivalOutcome::SurvivalOutcome(std::vector<SurvivalRecord> records, std::optional<double> fixed_shape)
    : records_(std::move(records)), fixed_shape_(fixed_shape) {
  if (fixed_shape_ && !(*fixed_shape_ > 0.0)) throw ValidationError("fixed Weibull shape must be > 0");
  log_t_.reserve(records_.size());
  log_t_hi_.reserve(records_.size());
  for (const auto& r : records_) {
    r.validate();
    log_t_.push_back(std::log(r.time));
    log_t_hi_.push_back(r.censoring == Censoring::interval ? std::log(r.time_hi) : 0.0);
  }
}

WeibullBaseline SurvivalOutcome::baseline(std::span<const double> omega_t) const {
  if (omega_t.size() != omega_dim()) throw ValidationError("survival outcome: wrong omega dimension");
  if (fixed_shape_) return {*fixed_shape_, std::exp(omega_t[0])};
  return {std::exp(omega_t[0]), std::exp(omega_t[1])};
}

std::vector<std::string> SurvivalOutcome::omega_names() const {
  if (fixed_shape_) return {"log_lambda"};
  return {"log_alpha", "log_lambda"};
}

std::vector<double> SurvivalOutcome::default_omega() const {
  // Exponential-model rate as the starting scale.
  double events = 0.0;
  double exposure = 0.0;
  for (const auto& r : records_) {
    if (r.censoring != Censoring::right) events += 1.0;
    exposure += r.censoring == Censoring::interval ? 0.5 * (r.time + r.time_hi) : r.time;
  }
  const double log_lambda = std::log(std::max(events, 1.0) / std::max(exposure, 1e-300));
  if (fixed_shape_) return {log_lambda};
  return {0.0, log_lambda};
}

double SurvivalOutcome::evaluate(std::span<const double> eta, std::span<const double> omega_t,
                                 std::span<double> deta, std::span<double> domega) const {
  const auto b = baseline(omega_t);
  const bool want_omega = !domega.empty();
  if (want_omega) std::fill(domega.begin(), domega.end(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const auto c = contribution(records_[i].censoring, eta[i], b.alpha, b.lambda, log_t_[i], log_t_hi_[i]);
    total += c.ll;
    if (!deta.empty()) deta[i] = c.deta;
    if (want_omega) {
      if (fixed_shape_) {
        domega[0] += c.dlog_lambda;
      } else {
        domega[0] += c.dlog_alpha;
        domega[1] += c.dlog_lambda;
      }
    }
  }
  return total;
}

void SurvivalOutcome::second_derivative(std::span<const double> eta, std::span<const double> omega_t,
                                        std::span<double> d2) const {
  const auto b = baseline(omega_t);
  for (std::size_t i = 0; i < records_.size(); ++i) {
    d2[i] = contribution(records_[i].censoring, eta[i], b.alpha, b.lambda, log_t_[i], log_t_hi_[i]).d2eta;
  }
}

double SurvivalOutcome::eta_maximizer(std::size_t i, std::span<const double> omega_t) const {
  const auto b = baseline(omega_t);
  const auto& r = records_.at(i);
  switch (r.censoring) {
    case Censoring::uncensored:
      return -std::log(H0(b, r.time));
    case Censoring::interval: {
      // d/ds [-s H1 + log(1 - exp(-s (H2 - H1)))] = 0  =>  s = log(H2 / H1) / (H2 - H1)
      const double h1 = H0(b, r.time);
      const double h2 = H0(b, r.time_hi);
      return std::log(std::log(h2 / h1) / (h2 - h1));
    }
    case Censoring::right:
    case Censoring::left:
      break;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

PoissonOutcome::PoissonOutcome(std::vector<CountRecord> records) : records_(std::move(records)) {
  log_factorial_.reserve(records_.size());
  for (const auto& r : records_) {
    if (r.count < 0) throw ValidationError("record '" + r.id + "': count must be >= 0");
    for (double x : r.covariates) {
      if (!std::isfinite(x)) throw ValidationError("record '" + r.id + "': covariates must be finite");
    }
    log_factorial_.push_back(std::lgamma(static_cast<double>(r.count) + 1.0));
  }
}

double PoissonOutcome::evaluate(std::span<const double> eta, std::span<const double>, std::span<double> deta,
                                std::span<double>) const {
  double total = 0.0;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    const double z = static_cast<double>(records_[i].count);
    const double rate = std::exp(eta[i]);
    total += z * eta[i] - rate - log_factorial_[i];
    if (!deta.empty()) deta[i] = z - rate;
  }
  return total;
}

void PoissonOutcome::second_derivative(std::span<const double> eta, std::span<const double>,
                                       std::span<double> d2) const {
  for (std::size_t i = 0; i < records_.size(); ++i) d2[i] = -std::exp(eta[i]);
}

double PoissonOutcome::eta_maximizer(std::size_t i, std::span<const double>) const {
  const auto z = records_.at(i).count;
  return z > 0 ? std::log(static_cast<double>(z)) : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace gridsurv
