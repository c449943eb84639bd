#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/covariance.hpp"
#include "gridsurv/grid.hpp"
#include "gridsurv/posterior.hpp"
#include "gridsurv/spectral.hpp"
#include "gridsurv/target.hpp"

namespace gridsurv {

inline constexpr std::size_t kDenseCellLimit = 4096;

// Full m x m toroidal covariance over the extended grid.
Eigen::MatrixXd dense_cov(const Grid& grid, const CovarianceModel& model, std::size_t max_cells = kDenseCellLimit);

// Covariance over arbitrary points with planar Euclidean distances.
Eigen::MatrixXd dense_point_cov(const std::vector<Point>& points, const CovarianceModel& model);

// Symmetric square root via eigendecomposition. Throws NonPositiveDefinite
// when the smallest eigenvalue is <= pd_tolerance * sigma2.
Eigen::MatrixXd dense_sqrt(const Eigen::MatrixXd& sigma, double sigma2, double phi,
                           double pd_tolerance = kDefaultPdTolerance);

// The grid posterior with Y = -sigma^2/2 + (dense symmetric root) gamma.
double dense_posterior(const SpatialPosterior& posterior, const ParameterState& state);

enum class DenseFactor { eigen, cholesky };

// The per-observation ("standard") geostatistical model: one frailty per
// record, Y ~ N(-sigma^2/2, Sigma) over the record locations, whitened by a
// dense square root of the n x n covariance. Every evaluation refactors it.
class StandardPosterior final : public Target {
 public:
  StandardPosterior(std::shared_ptr<const Dataset> data, Priors priors, PosteriorOptions options = {},
                    DenseFactor factor = DenseFactor::eigen);

  std::size_t beta_dim() const override { return static_cast<std::size_t>(data_->covariates.cols()); }
  std::size_t omega_dim() const override { return data_->outcome->omega_dim(); }
  std::size_t eta_dim() const override { return 2; }
  std::size_t gamma_dim() const override { return data_->size(); }
  std::size_t u_dim() const override { return 0; }

  Evaluation evaluate(const ParameterState& state, bool with_gradient = true) const override;

  ParameterState zero_state() const;

 private:
  std::shared_ptr<const Dataset> data_;
  Priors priors_;
  PosteriorOptions options_;
  DenseFactor factor_;
};

struct BenchmarkConfig {
  std::vector<std::size_t> dense_sizes{50, 100, 200, 400};
  std::vector<std::size_t> fourier_sizes{250, 500, 1000, 2000};
  // Extended grid exponents for the Fourier arm (2^m1 x 2^m2).
  std::vector<std::pair<int, int>> grids{{6, 6}};
  double ext_factor = 2.0;
  std::size_t iterations = 200;
  // Iterations for dense points with n above dense_short_above.
  std::size_t dense_iterations = 20;
  std::size_t dense_short_above = 400;
  std::size_t repetitions = 5;
  std::uint64_t seed = 1;
  DenseFactor factor = DenseFactor::eigen;
  std::size_t workers = 1;

  void validate() const;
};

struct TimingRow {
  std::string method;  // "dense" or "fourier"
  std::size_t n = 0;
  std::string grid;    // "NXxNY" of the extended grid; "-" for dense
  double seconds_per_1000_iter = 0.0;
};

// Median-of-repetitions wall-clock time of the MCMC engine on simulated data.
std::vector<TimingRow> benchmark(const BenchmarkConfig& config);

// Single timing points, exposed for the acceptance harness.
double time_dense(std::size_t n, const BenchmarkConfig& config, std::size_t iterations);
double time_fourier(std::size_t n, std::pair<int, int> grid, const BenchmarkConfig& config, std::size_t iterations);

}  // namespace gridsurv
