#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/covariance.hpp"
#include "gridsurv/grid.hpp"
#include "gridsurv/mcmc.hpp"
#include "gridsurv/outcome.hpp"
#include "gridsurv/posterior.hpp"

namespace gridsurv {

inline const std::vector<double> kDefaultThresholds{1.2, 1.5, 2.0};
inline const std::vector<double> kBandProbabilities{0.025, 0.5, 0.975};

struct FieldSummaryOptions {
  std::vector<double> thresholds = kDefaultThresholds;
  std::vector<double> probabilities = kBandProbabilities;
  bool window_only = true;
};

// Per-cell summaries of exp(Y).
struct FieldSummary {
  std::vector<std::size_t> cells;
  std::vector<double> thresholds;
  std::vector<double> probabilities;
  Eigen::VectorXd mean_exp;        // per reported cell
  Eigen::MatrixXd quantiles;       // cells x probabilities
  Eigen::MatrixXd exceedance;      // cells x thresholds, P[exp(Y) > c]
};

// fields: one retained field per row (N x m).
FieldSummary summarize_field(const Eigen::MatrixXd& fields, const Grid& grid, const FieldSummaryOptions& options = {});
FieldSummary summarize_field(const ChainOutput& chain, const Grid& grid, const FieldSummaryOptions& options = {});

Eigen::MatrixXd field_matrix(const ChainOutput& chain);

struct CurveSummary {
  std::vector<double> abscissae;
  std::vector<double> lower;
  std::vector<double> median;
  std::vector<double> upper;
};

// Pointwise 2.5/50/97.5% curves over per-sample baseline hazards.
CurveSummary baseline_hazard_band(const std::vector<WeibullBaseline>& draws, const std::vector<double>& times);
CurveSummary covariance_band(const std::vector<CovarianceModel>& draws, const std::vector<double>& distances);

// Per-sample parameters from a chain of a survival/covariance model.
std::vector<WeibullBaseline> weibull_draws(const ChainOutput& chain, std::optional<double> fixed_shape = std::nullopt);
std::vector<CovarianceModel> covariance_draws(const ChainOutput& chain, CovarianceKind kind, double nu);

struct Histogram {
  std::string name;
  std::vector<double> edges;          // bins + 1
  std::vector<double> density;        // normalized sample density per bin
  std::vector<double> prior_density;  // prior at bin centres
};

struct Diagnostics {
  std::vector<double> log_post_trace;
  std::vector<double> lag1;  // per cell; NaN when the cell's chain is constant
  // min, 2.5%, 50%, 97.5%, max of the finite lag-1 values (NaN if none).
  std::vector<double> lag1_summary;
  std::size_t lag1_missing = 0;
  std::vector<Histogram> histograms;
};

// Parameter names are taken in order beta, omega_t, eta_t; priors pair with
// each name for the overlay.
Diagnostics diagnostics(const ChainOutput& chain, const std::vector<std::string>& parameter_names,
                        const std::vector<NormalPrior>& parameter_priors, std::size_t bins = 30);

// Per-cell lag-1 autocorrelations of an N x m sample matrix.
std::vector<double> lag1_by_column(const Eigen::MatrixXd& samples);

}  // namespace gridsurv
