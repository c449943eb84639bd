#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/covariance.hpp"
#include "gridsurv/grid.hpp"
#include "gridsurv/outcome.hpp"
#include "gridsurv/rng.hpp"
#include "gridsurv/spectral.hpp"

namespace gridsurv {

struct SimulatedField {
  Eigen::VectorXd field;
  Eigen::VectorXd gamma;
};

// gamma ~ N(0, I), Y = gamma_to_field(gamma).
SimulatedField simulate_field(const SpectralBase& sb, Rng& rng);
SimulatedField simulate_field(const Grid& grid, const CovarianceModel& model, std::uint64_t seed,
                              double pd_tolerance = kDefaultPdTolerance);

// Each record independently follows one of three observation plans:
//   - left plan (probability left_rate): a single inspection at
//     C ~ U(0, inspection_max); left-censored at C if T <= C, otherwise
//     right-censored at C;
//   - interval plan (probability interval_rate): inspections every
//     inspection_width from a uniform random offset; T is reported as the
//     bracketing inspection interval (left-censored before the first one);
//   - otherwise the exact time.
// Administrative censoring at admin_time applies on top of every plan.
struct CensoringScheme {
  std::optional<double> admin_time;
  double left_rate = 0.0;
  double interval_rate = 0.0;
  double inspection_max = 1.0;
  double inspection_width = 1.0;

  void validate() const;
};

// Locations uniform over the grid's observation box, covariates iid N(0, 1),
// T = H0^{-1}(-log U / exp(eta)).
std::vector<SurvivalRecord> simulate_survival(std::size_t n, const Eigen::VectorXd& beta,
                                              const WeibullBaseline& baseline, const Eigen::VectorXd& field,
                                              const Grid& grid, const CensoringScheme& scheme, std::uint64_t seed);

// Z_i ~ Poisson(exp(X_i beta + Y_c(i))).
std::vector<CountRecord> simulate_poisson(std::size_t n, const Eigen::VectorXd& beta, const Eigen::VectorXd& field,
                                          const Grid& grid, std::uint64_t seed);

}  // namespace gridsurv
