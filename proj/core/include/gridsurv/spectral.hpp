#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/covariance.hpp"
#include "gridsurv/fft.hpp"
#include "gridsurv/grid.hpp"

namespace gridsurv {

inline constexpr double kDefaultPdTolerance = 1e-10;

// Toroidal distances from cell (0, 0) to every lag, precomputed for one grid.
// Only the parameter-free geometry; reused across covariance parameters.
class LagTable {
 public:
  explicit LagTable(const Grid& grid);

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }
  const std::shared_ptr<const Fft2d>& fft() const { return fft_; }

  // Distance for lag (dcol, drow) with 0 <= dcol < nx, 0 <= drow < ny.
  double distance(std::size_t dcol, std::size_t drow) const;

 private:
  std::size_t nx_;
  std::size_t ny_;
  std::size_t qx_;
  std::vector<double> quadrant_;
  std::shared_ptr<const Fft2d> fft_;
};

// Block-circulant covariance of the field on the extended grid, held as its
// base matrix and the eigenvalues obtained from the base matrix's 2-D DFT.
//
// The normalization is fixed so that sqrt_matvec applied twice equals the
// dense covariance times v.
class SpectralBase {
 public:
  const CovarianceModel& model() const { return model_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }

  // Covariance between cell (0,0) and the cell at lag (col, row), row-major.
  const std::vector<double>& base() const { return base_; }
  // Eigenvalues on the half spectrum, ny x (nx/2 + 1), row-major.
  const std::vector<double>& half_eigenvalues() const { return half_eigs_; }
  // All m eigenvalues, ny x nx row-major (expanded by Hermitian symmetry).
  std::vector<double> eigenvalues() const;
  double min_eig() const { return min_eig_; }
  // Largest |imaginary part| seen in the DFT of the base matrix.
  double max_imag() const { return max_imag_; }
  // True for sigma2 == 0: the zero operator.
  bool degenerate() const { return degenerate_; }

  // Sigma^{1/2} v with the symmetric square root. Linear and self-adjoint.
  void sqrt_matvec(std::span<const double> v, std::span<double> out) const;
  Eigen::VectorXd sqrt_matvec(const Eigen::VectorXd& v) const;

  // Sigma^{-1/2} v; throws ValidationError for a degenerate base.
  Eigen::VectorXd inv_sqrt_matvec(const Eigen::VectorXd& v) const;

  // Sigma v.
  Eigen::VectorXd matvec(const Eigen::VectorXd& v) const;

  // Circular convolution of w with the elementwise square of the first column
  // of Sigma^{1/2}; equals diag(Sigma^{1/2} diag(w) Sigma^{1/2}).
  Eigen::VectorXd sqrt_squared_convolve(const Eigen::VectorXd& w) const;

 private:
  friend SpectralBase build_spectral(const LagTable&, const CovarianceModel&, double);

  void apply_spectrum(std::span<const double> v, std::span<double> out, const std::vector<double>& multiplier) const;

  CovarianceModel model_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::shared_ptr<const Fft2d> fft_;
  std::vector<double> base_;
  std::vector<double> half_eigs_;
  std::vector<double> sqrt_half_eigs_;
  double min_eig_ = 0.0;
  double max_imag_ = 0.0;
  bool degenerate_ = false;
};

// Throws NonPositiveDefinite when min_eig <= pd_tolerance * sigma2. A model
// with sigma2 == 0 yields the degenerate (zero) base.
SpectralBase build_spectral(const LagTable& lags, const CovarianceModel& model,
                            double pd_tolerance = kDefaultPdTolerance);
SpectralBase build_spectral(const Grid& grid, const CovarianceModel& model,
                            double pd_tolerance = kDefaultPdTolerance);

// Y = -sigma2/2 + Sigma^{1/2} gamma.
Eigen::VectorXd gamma_to_field(const SpectralBase& sb, const Eigen::VectorXd& gamma, double sigma2);

// Inverse of gamma_to_field for a non-degenerate base.
Eigen::VectorXd field_to_gamma(const SpectralBase& sb, const Eigen::VectorXd& field, double sigma2);

}  // namespace gridsurv
