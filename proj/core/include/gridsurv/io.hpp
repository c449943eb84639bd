#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gridsurv/covariance.hpp"
#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/errors.hpp"
#include "gridsurv/grid.hpp"
#include "gridsurv/mcmc.hpp"
#include "gridsurv/outcome.hpp"
#include "gridsurv/posterior.hpp"
#include "gridsurv/prediction.hpp"
#include "gridsurv/simulate.hpp"

namespace gridsurv {

// A malformed input file; row is 1-based counting the header as row 1,
// column is the header name (empty when not applicable).
class CsvError : public ValidationError {
 public:
  CsvError(std::size_t row, std::string column, const std::string& message);

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Shortest representation that reads back to the same double.
std::string format_double(double v);

struct SurvivalTable {
  std::vector<SurvivalRecord> records;
  std::vector<std::string> covariate_names;
};

struct CountTable {
  std::vector<CountRecord> records;
  std::vector<std::string> covariate_names;
};

// Header: id,event,time,time_lo,time_hi,x,y,<covariates...>. Interval rows
// fill time_lo and time_hi and leave time blank; the others fill time only.
void write_survival_csv(std::ostream& out, const SurvivalTable& table);
SurvivalTable read_survival_csv(std::istream& in);

// Header: id,count,x,y,<covariates...>.
void write_count_csv(std::ostream& out, const CountTable& table);
CountTable read_count_csv(std::istream& in);

// "survival" or "poisson" from the header of a data file.
std::string detect_data_kind(std::istream& in);

// Column names of the scalar parameters: beta_<name>..., omega names,
// log_sigma, log_phi [, log_sigma_u].
std::vector<std::string> parameter_names(const std::vector<std::string>& covariate_names,
                                         const std::vector<std::string>& omega_names, std::size_t eta_dim);

// iter,log_post,<parameter names>,Y_0..Y_{m-1}; one row per retained sample.
void write_samples_csv(std::ostream& out, const ChainOutput& chain, const std::vector<std::string>& names);

struct SamplesTable {
  std::vector<std::string> beta_names;   // without the beta_ prefix
  std::vector<std::string> omega_names;
  std::vector<std::string> eta_names;
  ChainOutput chain;
};
SamplesTable read_samples_csv(std::istream& in);

// cell,row,col,x,y,in_window for every grid cell.
void write_cells_csv(std::ostream& out, const Grid& grid);

// cell,row,col,x,y,mean_exp,q<p>...,exceed_<c>...
void write_field_summary_csv(std::ostream& out, const FieldSummary& summary, const Grid& grid);
// <abscissa>,lower,median,upper
void write_curve_csv(std::ostream& out, const CurveSummary& curve, const std::string& abscissa);
// iter,log_post,acceptance,h
void write_trace_csv(std::ostream& out, const ChainOutput& chain);
void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows);

// The parsed JSON configuration document.
struct RunConfig {
  std::string outcome = "survival";  // survival | poisson

  int m1 = 5;
  int m2 = 5;
  double ext_factor = 2.0;
  std::optional<BoundingBox> window;

  PosteriorOptions posterior;
  std::optional<double> fixed_shape;

  // Per-parameter priors; a single entry is broadcast.
  std::vector<NormalPrior> beta_priors{NormalPrior{0.0, 10.0}};
  std::vector<NormalPrior> omega_priors{NormalPrior{0.0, 10.0}};
  NormalPrior log_sigma{0.0, 0.5};
  NormalPrior log_phi{0.0, 1.0};
  std::optional<double> sigma_u;
  std::optional<NormalPrior> log_sigma_u;

  ChainConfig mcmc;

  std::vector<double> thresholds = kDefaultThresholds;
  std::vector<double> times;
  std::vector<double> distances;
  bool full_grid = false;

  // simulate
  std::size_t sim_n = 200;
  std::uint64_t sim_seed = 1;
  std::vector<double> sim_beta{0.5, -0.3};
  double sim_alpha = 0.8;
  double sim_lambda = 0.01;
  double sim_sigma = 0.4;
  double sim_phi = 0.15;
  BoundingBox sim_bbox{0.0, 0.0, 1.0, 1.0};
  CensoringScheme sim_censoring;

  BenchmarkConfig bench;

  std::string output_dir = "output";

  Priors priors(std::size_t beta_dim, std::size_t omega_dim) const;
  // The simulation grid: 2^m1 x 2^m2 over sim_bbox.
  Grid simulation_grid() const;
};

// Throws ValidationError naming the offending key.
RunConfig parse_config(const std::string& json_text);

}  // namespace gridsurv
