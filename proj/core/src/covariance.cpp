#include "gridsurv/covariance.hpp"

#include <cmath>

#include "gridsurv/errors.hpp"

namespace gridsurv {

CovarianceKind parse_covariance_kind(const std::string& name) {
  if (name == "exponential") return CovarianceKind::exponential;
  if (name == "matern") return CovarianceKind::matern;
  throw ValidationError("unknown covariance kind '" + name + "' (expected exponential or matern)");
}

std::string to_string(CovarianceKind kind) {
  return kind == CovarianceKind::exponential ? "exponential" : "matern";
}

void CovarianceModel::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw ValidationError("covariance: sigma2 must be > 0");
  if (!(phi > 0.0) || !std::isfinite(phi)) throw ValidationError("covariance: phi must be > 0");
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ValidationError("covariance: nu must be > 0");
}

double cov_value_unchecked(const CovarianceModel& model, double d) {
  if (d == 0.0) return model.sigma2;
  switch (model.kind) {
    case CovarianceKind::exponential:
      return model.sigma2 * std::exp(-d / model.phi);
    case CovarianceKind::matern: {
      const double u = d * std::sqrt(2.0 * model.nu) / model.phi;
      // K_nu underflows long before the prefactor overflows.
      if (u > 700.0) return 0.0;
      const double log_pre = (1.0 - model.nu) * std::log(2.0) - std::lgamma(model.nu) + model.nu * std::log(u);
      return model.sigma2 * std::exp(log_pre) * std::cyl_bessel_k(model.nu, u);
    }
  }
  return 0.0;
}

double cov_value(const CovarianceModel& model, double d) {
  if (!(d >= 0.0)) throw ValidationError("cov_value: distance must be >= 0");
  return cov_value_unchecked(model, d);
}

}  // namespace gridsurv
