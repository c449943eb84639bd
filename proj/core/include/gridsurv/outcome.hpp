#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridsurv/grid.hpp"

namespace gridsurv {

// Codes match the `event` column of the data file.
enum class Censoring : int { right = 0, uncensored = 1, left = 2, interval = 3 };

Censoring censoring_from_code(int code);

struct SurvivalRecord {
  std::string id;
  Censoring censoring = Censoring::uncensored;
  // Event or censoring time; the lower end point for interval records.
  double time = 0.0;
  // Upper end point, interval records only.
  double time_hi = 0.0;
  std::vector<double> covariates;
  Point location;

  void validate() const;
};

struct CountRecord {
  std::string id;
  std::int64_t count = 0;
  std::vector<double> covariates;
  Point location;
};

// h0(t) = alpha * lambda * t^(alpha - 1), H0(t) = lambda * t^alpha.
struct WeibullBaseline {
  double alpha = 1.0;
  double lambda = 1.0;
};

double h0(const WeibullBaseline& b, double t);
double H0(const WeibullBaseline& b, double t);

// Log-likelihood contribution of one record given the linear predictor eta
// and its derivatives. Left and interval censoring use expm1/log1p forms.
double record_loglik(const SurvivalRecord& r, const WeibullBaseline& b, double eta);
double record_dloglik_deta(const SurvivalRecord& r, const WeibullBaseline& b, double eta);
double record_d2loglik_deta2(const SurvivalRecord& r, const WeibullBaseline& b, double eta);
// Gradient with respect to (log alpha, log lambda).
std::array<double, 2> dloglik_domega(const SurvivalRecord& r, const WeibullBaseline& b, double eta);

double poisson_loglik(std::int64_t z, double eta);
double poisson_dloglik_deta(std::int64_t z, double eta);

// Per-record outcome likelihood, evaluated in batch over all records. The
// linear predictor of record i is eta[i]; omega_t holds the outcome's own
// parameters on the log scale (empty for Poisson).
class OutcomeModel {
 public:
  virtual ~OutcomeModel() = default;

  virtual std::size_t size() const = 0;
  virtual std::size_t omega_dim() const = 0;
  virtual std::vector<std::string> omega_names() const = 0;
  // Starting point for maximum likelihood.
  virtual std::vector<double> default_omega() const = 0;

  // Returns the summed log-likelihood (may be -inf or NaN for numerically
  // impossible parameters). When `deta` is non-empty it receives per-record
  // d/d eta; when `domega` is non-empty it receives the summed d/d omega_t.
  virtual double evaluate(std::span<const double> eta, std::span<const double> omega_t, std::span<double> deta,
                          std::span<double> domega) const = 0;

  // Per-record second derivative in eta.
  virtual void second_derivative(std::span<const double> eta, std::span<const double> omega_t,
                                 std::span<double> d2) const = 0;

  // The eta maximizing record i's contribution, or NaN when the contribution
  // is monotone in eta (right/left censored records, zero counts).
  virtual double eta_maximizer(std::size_t i, std::span<const double> omega_t) const = 0;
};

class SurvivalOutcome final : public OutcomeModel {
 public:
  // With `fixed_shape`, alpha is held at that value and omega_t = (log lambda).
  explicit SurvivalOutcome(std::vector<SurvivalRecord> records, std::optional<double> fixed_shape = std::nullopt);

  const std::vector<SurvivalRecord>& records() const { return records_; }
  std::optional<double> fixed_shape() const { return fixed_shape_; }
  WeibullBaseline baseline(std::span<const double> omega_t) const;

  std::size_t size() const override { return records_.size(); }
  std::size_t omega_dim() const override { return fixed_shape_ ? 1 : 2; }
  std::vector<std::string> omega_names() const override;
  std::vector<double> default_omega() const override;
  double evaluate(std::span<const double> eta, std::span<const double> omega_t, std::span<double> deta,
                  std::span<double> domega) const override;
  void second_derivative(std::span<const double> eta, std::span<const double> omega_t,
                         std::span<double> d2) const override;
  double eta_maximizer(std::size_t i, std::span<const double> omega_t) const override;

 private:
  std::vector<SurvivalRecord> records_;
  std::optional<double> fixed_shape_;
  std::vector<double> log_t_;
  std::vector<double> log_t_hi_;
};

class PoissonOutcome final : public OutcomeModel {
 public:
  explicit PoissonOutcome(std::vector<CountRecord> records);

  const std::vector<CountRecord>& records() const { return records_; }

  std::size_t size() const override { return records_.size(); }
  std::size_t omega_dim() const override { return 0; }
  std::vector<std::string> omega_names() const override { return {}; }
  std::vector<double> default_omega() const override { return {}; }
  double evaluate(std::span<const double> eta, std::span<const double> omega_t, std::span<double> deta,
                  std::span<double> domega) const override;
  void second_derivative(std::span<const double> eta, std::span<const double> omega_t,
                         std::span<double> d2) const override;
  double eta_maximizer(std::size_t i, std::span<const double> omega_t) const override;

 private:
  std::vector<CountRecord> records_;
  std::vector<double> log_factorial_;
};

}  // namespace gridsurv
