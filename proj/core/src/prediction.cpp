#include "gridsurv/prediction.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <limits>

#include "gridsurv/errors.hpp"
#include "gridsurv/stats.hpp"

namespace gridsurv {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_samples(std::size_t n, std::size_t minimum, const char* what) {
  if (n < minimum) {
    throw ValidationError(std::string(what) + ": need at least " + std::to_string(minimum) + " retained samples");
  }
}

void require_sorted_positive(const std::vector<double>& x, const char* what) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] >= 0.0) || !std::isfinite(x[i]) || (i > 0 && x[i] < x[i - 1])) {
      throw ValidationError(std::string(what) + " must be non-negative, finite and sorted");
    }
  }
}

CurveSummary band(const std::vector<double>& abscissae, std::size_t draws,
                  const std::function<double(std::size_t, double)>& curve) {
  CurveSummary out;
  out.abscissae = abscissae;
  std::vector<double> column(draws);
  for (double a : abscissae) {
    for (std::size_t i = 0; i < draws; ++i) column[i] = curve(i, a);
    std::sort(column.begin(), column.end());
    out.lower.push_back(quantile_type8(column, 0.025));
    out.median.push_back(quantile_type8(column, 0.5));
    out.upper.push_back(quantile_type8(column, 0.975));
  }
  return out;
}

}  // namespace

Eigen::MatrixXd field_matrix(const ChainOutput& chain) {
  if (chain.samples.empty()) return {};
  const auto m = chain.samples.front().field.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(chain.samples.size()), m);
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    if (chain.samples[i].field.size() != m) throw ValidationError("chain: inconsistent field lengths");
    out.row(static_cast<Eigen::Index>(i)) = chain.samples[i].field.transpose();
  }
  return out;
}

FieldSummary summarize_field(const Eigen::MatrixXd& fields, const Grid& grid, const FieldSummaryOptions& options) {
  require_samples(static_cast<std::size_t>(fields.rows()), 2, "summarize_field");
  if (fields.cols() != static_cast<Eigen::Index>(grid.size())) throw ValidationError("summarize_field: field length != grid size");
  for (double c : options.thresholds) {
    if (!(c > 0.0) || !std::isfinite(c)) throw ValidationError("summarize_field: thresholds must be positive");
  }
  for (double p : options.probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("summarize_field: probabilities must lie in [0, 1]");
  }

  FieldSummary out;
  out.thresholds = options.thresholds;
  out.probabilities = options.probabilities;
  for (std::size_t c = 0; c < grid.size(); ++c) {
    if (!options.window_only || grid.in_window(c)) out.cells.push_back(c);
  }
  const auto n_cells = static_cast<Eigen::Index>(out.cells.size());
  const auto n_thr = static_cast<Eigen::Index>(out.thresholds.size());
  const auto n_prob = static_cast<Eigen::Index>(out.probabilities.size());
  out.mean_exp.resize(n_cells);
  out.quantiles.resize(n_cells, n_prob);
  out.exceedance.resize(n_cells, n_thr);
  const auto n = static_cast<std::size_t>(fields.rows());
  std::vector<double> column(n);
  for (Eigen::Index r = 0; r < n_cells; ++r) {
    const auto cell = static_cast<Eigen::Index>(out.cells[static_cast<std::size_t>(r)]);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      column[i] = std::exp(fields(static_cast<Eigen::Index>(i), cell));
      sum += column[i];
    }
    out.mean_exp[r] = sum / static_cast<double>(n);
    std::sort(column.begin(), column.end());
    for (Eigen::Index k = 0; k < n_prob; ++k) {
      out.quantiles(r, k) = quantile_type8(column, out.probabilities[static_cast<std::size_t>(k)]);
    }
    for (Eigen::Index k = 0; k < n_thr; ++k) {
      const double c = out.thresholds[static_cast<std::size_t>(k)];
      const auto above = column.end() - std::upper_bound(column.begin(), column.end(), c);
      out.exceedance(r, k) = static_cast<double>(above) / static_cast<double>(n);
    }
  }
  return out;
}

FieldSummary summarize_field(const ChainOutput& chain, const Grid& grid, const FieldSummaryOptions& options) {
  require_samples(chain.samples.size(), 2, "summarize_field");
  return summarize_field(field_matrix(chain), grid, options);
}

CurveSummary baseline_hazard_band(const std::vector<WeibullBaseline>& draws, const std::vector<double>& times) {
  require_samples(draws.size(), 1, "baseline_hazard_band");
  require_sorted_positive(times, "times");
  for (double t : times) {
    if (!(t > 0.0)) throw ValidationError("times must be positive");
  }
  return band(times, draws.size(), [&](std::size_t i, double t) { return h0(draws[i], t); });
}

CurveSummary covariance_band(const std::vector<CovarianceModel>& draws, const std::vector<double>& distances) {
  require_samples(draws.size(), 1, "covariance_band");
  require_sorted_positive(distances, "distances");
  return band(distances, draws.size(), [&](std::size_t i, double d) { return cov_value(draws[i], d); });
}

std::vector<WeibullBaseline> weibull_draws(const ChainOutput& chain, std::optional<double> fixed_shape) {
  std::vector<WeibullBaseline> out;
  out.reserve(chain.samples.size());
  for (const auto& s : chain.samples) {
    if (fixed_shape) {
      if (s.omega_t.size() != 1) throw ValidationError("weibull_draws: expected log_lambda only");
      out.push_back({*fixed_shape, std::exp(s.omega_t[0])});
    } else {
      if (s.omega_t.size() != 2) throw ValidationError("weibull_draws: expected (log_alpha, log_lambda)");
      out.push_back({std::exp(s.omega_t[0]), std::exp(s.omega_t[1])});
    }
  }
  return out;
}

std::vector<CovarianceModel> covariance_draws(const ChainOutput& chain, CovarianceKind kind, double nu) {
  std::vector<CovarianceModel> out;
  out.reserve(chain.samples.size());
  for (const auto& s : chain.samples) {
    if (s.eta_t.size() < 2) throw ValidationError("covariance_draws: expected (log_sigma, log_phi)");
    out.push_back({kind, std::exp(2.0 * s.eta_t[0]), std::exp(s.eta_t[1]), nu});
  }
  return out;
}

std::vector<double> lag1_by_column(const Eigen::MatrixXd& samples) {
  std::vector<double> out(static_cast<std::size_t>(samples.cols()));
  std::vector<double> column(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index c = 0; c < samples.cols(); ++c) {
    for (Eigen::Index i = 0; i < samples.rows(); ++i) column[static_cast<std::size_t>(i)] = samples(i, c);
    out[static_cast<std::size_t>(c)] = lag1_autocorrelation(column);
  }
  return out;
}

Diagnostics diagnostics(const ChainOutput& chain, const std::vector<std::string>& parameter_names,
                        const std::vector<NormalPrior>& parameter_priors, std::size_t bins) {
  require_samples(chain.samples.size(), 3, "diagnostics");
  if (parameter_names.size() != parameter_priors.size()) throw ValidationError("diagnostics: names/priors mismatch");
  if (bins == 0) throw ValidationError("diagnostics: bins must be > 0");
  Diagnostics out;
  out.log_post_trace = chain.log_post_trace();
  out.lag1 = lag1_by_column(field_matrix(chain));
  std::vector<double> finite;
  for (double v : out.lag1) {
    if (std::isfinite(v)) {
      finite.push_back(v);
    } else {
      ++out.lag1_missing;
    }
  }
  if (finite.empty()) {
    out.lag1_summary.assign(5, kNaN);
  } else {
    std::sort(finite.begin(), finite.end());
    out.lag1_summary = {finite.front(), quantile_type8(finite, 0.025), quantile_type8(finite, 0.5),
                        quantile_type8(finite, 0.975), finite.back()};
  }

  const std::size_t n = chain.samples.size();
  for (std::size_t k = 0; k < parameter_names.size(); ++k) {
    std::vector<double> v;
    v.reserve(n);
    for (const auto& s : chain.samples) {
      Eigen::Index j = static_cast<Eigen::Index>(k);
      if (j < s.beta.size()) {
        v.push_back(s.beta[j]);
        continue;
      }
      j -= s.beta.size();
      if (j < s.omega_t.size()) {
        v.push_back(s.omega_t[j]);
        continue;
      }
      j -= s.omega_t.size();
      if (j >= s.eta_t.size()) throw ValidationError("diagnostics: more parameter names than parameters");
      v.push_back(s.eta_t[j]);
    }
    Histogram h;
    h.name = parameter_names[k];
    double lo = *std::min_element(v.begin(), v.end());
    double hi = *std::max_element(v.begin(), v.end());
    if (!(hi > lo)) {
      lo -= 0.5;
      hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(lo + width * static_cast<double>(b));
    std::vector<double> counts(bins, 0.0);
    for (double x : v) {
      const auto b = std::min(bins - 1, static_cast<std::size_t>((x - lo) / width));
      counts[b] += 1.0;
    }
    for (std::size_t b = 0; b < bins; ++b) {
      h.density.push_back(counts[b] / (static_cast<double>(n) * width));
      h.prior_density.push_back(std::exp(parameter_priors[k].log_density(lo + width * (static_cast<double>(b) + 0.5))));
    }
    out.histograms.push_back(std::move(h));
  }
  return out;
}

}  // namespace gridsurv
