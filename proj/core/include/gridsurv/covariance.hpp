#pragma once

#include <string>

namespace gridsurv {

enum class CovarianceKind { exponential, matern };

CovarianceKind parse_covariance_kind(const std::string& name);
std::string to_string(CovarianceKind kind);

// Stationary isotropic covariance: marginal variance sigma2, decay phi
// (length units) and, for Matern, a fixed smoothness nu.
struct CovarianceModel {
  CovarianceKind kind = CovarianceKind::exponential;
  double sigma2 = 1.0;
  double phi = 1.0;
  double nu = 1.0;

  // Throws ValidationError unless sigma2 > 0, phi > 0, nu > 0.
  void validate() const;
};

// exponential: sigma2 * exp(-d / phi)
// matern:      sigma2 * 2^(1-nu) / Gamma(nu) * (d sqrt(2 nu) / phi)^nu * K_nu(d sqrt(2 nu) / phi)
// Both equal sigma2 at d = 0. Throws ValidationError for d < 0.
double cov_value(const CovarianceModel& model, double d);

// Same as cov_value without argument checks; sigma2 may be zero.
double cov_value_unchecked(const CovarianceModel& model, double d);

}  // namespace gridsurv
