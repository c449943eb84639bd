#include "gridsurv/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gridsurv/errors.hpp"

namespace gridsurv {

LagTable::LagTable(const Grid& grid)
    : nx_(grid.nx()), ny_(grid.ny()), qx_(grid.nx() / 2 + 1), fft_(Fft2d::get(grid.ny(), grid.nx())) {
  const std::size_t qy = ny_ / 2 + 1;
  quadrant_.resize(qx_ * qy);
  for (std::size_t r = 0; r < qy; ++r) {
    for (std::size_t c = 0; c < qx_; ++c) quadrant_[r * qx_ + c] = grid.lag_distance(c, r);
  }
}

double LagTable::distance(std::size_t dcol, std::size_t drow) const {
  const std::size_t c = std::min(dcol, nx_ - dcol);
  const std::size_t r = std::min(drow, ny_ - drow);
  return quadrant_[r * qx_ + c];
}

SpectralBase build_spectral(const LagTable& lags, const CovarianceModel& model, double pd_tolerance) {
  if (!(model.sigma2 >= 0.0) || !std::isfinite(model.sigma2)) {
    throw ValidationError("build_spectral: sigma2 must be finite and >= 0");
  }
  if (!(model.phi > 0.0) || !std::isfinite(model.phi)) throw ValidationError("build_spectral: phi must be > 0");
  if (!(model.nu > 0.0)) throw ValidationError("build_spectral: nu must be > 0");

  SpectralBase sb;
  sb.model_ = model;
  sb.nx_ = lags.nx();
  sb.ny_ = lags.ny();
  sb.fft_ = lags.fft();

  const std::size_t nx = sb.nx_;
  const std::size_t ny = sb.ny_;
  const std::size_t qx = nx / 2 + 1;
  const std::size_t qy = ny / 2 + 1;

  // Evaluate the covariance once per distinct lag and mirror.
  std::vector<double> quadrant(qx * qy);
  for (std::size_t r = 0; r < qy; ++r) {
    for (std::size_t c = 0; c < qx; ++c) quadrant[r * qx + c] = cov_value_unchecked(model, lags.distance(c, r));
  }
  sb.base_.resize(nx * ny);
  for (std::size_t r = 0; r < ny; ++r) {
    const std::size_t rr = std::min(r, ny - r);
    for (std::size_t c = 0; c < nx; ++c) sb.base_[r * nx + c] = quadrant[rr * qx + std::min(c, nx - c)];
  }

  auto ws = sb.fft_->workspace();
  std::copy(sb.base_.begin(), sb.base_.end(), ws.real().begin());
  sb.fft_->forward(ws);
  const auto spectrum = ws.spectrum();
  sb.half_eigs_.resize(spectrum.size());
  sb.sqrt_half_eigs_.resize(spectrum.size());
  double min_eig = std::numeric_limits<double>::infinity();
  double max_imag = 0.0;
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    sb.half_eigs_[k] = spectrum[k].real();
    min_eig = std::min(min_eig, spectrum[k].real());
    max_imag = std::max(max_imag, std::abs(spectrum[k].imag()));
  }
  sb.min_eig_ = min_eig;
  sb.max_imag_ = max_imag;

  if (model.sigma2 == 0.0) {
    sb.degenerate_ = true;
    std::fill(sb.sqrt_half_eigs_.begin(), sb.sqrt_half_eigs_.end(), 0.0);
    return sb;
  }
  if (!(min_eig > pd_tolerance * model.sigma2)) {
    throw NonPositiveDefinite(min_eig, model.phi, pd_tolerance * model.sigma2);
  }
  for (std::size_t k = 0; k < sb.half_eigs_.size(); ++k) sb.sqrt_half_eigs_[k] = std::sqrt(sb.half_eigs_[k]);
  return sb;
}

SpectralBase build_spectral(const Grid& grid, const CovarianceModel& model, double pd_tolerance) {
  return build_spectral(LagTable(grid), model, pd_tolerance);
}

std::vector<double> SpectralBase::eigenvalues() const {
  const std::size_t hx = nx_ / 2 + 1;
  std::vector<double> full(nx_ * ny_);
  for (std::size_t r = 0; r < ny_; ++r) {
    for (std::size_t c = 0; c < nx_; ++c) {
      full[r * nx_ + c] = c < hx ? half_eigs_[r * hx + c] : half_eigs_[((ny_ - r) % ny_) * hx + (nx_ - c)];
    }
  }
  return full;
}

void SpectralBase::apply_spectrum(std::span<const double> v, std::span<double> out,
                                  const std::vector<double>& multiplier) const {
  if (v.size() != size() || out.size() != size()) throw ValidationError("spectral product: vector length must equal grid size");
  auto ws = fft_->workspace();
  std::copy(v.begin(), v.end(), ws.real().begin());
  fft_->forward(ws);
  auto spectrum = ws.spectrum();
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= multiplier[k];
  fft_->inverse(ws);
  const double scale = 1.0 / static_cast<double>(size());
  const auto real = ws.real();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = real[k] * scale;
}

void SpectralBase::sqrt_matvec(std::span<const double> v, std::span<double> out) const {
  if (degenerate_) {
    if (out.size() != size()) throw ValidationError("sqrt_matvec: vector length must equal grid size");
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  apply_spectrum(v, out, sqrt_half_eigs_);
}

Eigen::VectorXd SpectralBase::sqrt_matvec(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  sqrt_matvec(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())),
              std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
  return out;
}

Eigen::VectorXd SpectralBase::inv_sqrt_matvec(const Eigen::VectorXd& v) const {
  if (degenerate_) throw ValidationError("inv_sqrt_matvec: covariance is degenerate (sigma2 = 0)");
  std::vector<double> inv(sqrt_half_eigs_.size());
  for (std::size_t k = 0; k < inv.size(); ++k) inv[k] = 1.0 / sqrt_half_eigs_[k];
  Eigen::VectorXd out(v.size());
  apply_spectrum({v.data(), static_cast<std::size_t>(v.size())}, {out.data(), static_cast<std::size_t>(out.size())}, inv);
  return out;
}

Eigen::VectorXd SpectralBase::matvec(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out(v.size());
  apply_spectrum({v.data(), static_cast<std::size_t>(v.size())}, {out.data(), static_cast<std::size_t>(out.size())},
                 half_eigs_);
  return out;
}

Eigen::VectorXd SpectralBase::sqrt_squared_convolve(const Eigen::VectorXd& w) const {
  if (static_cast<std::size_t>(w.size()) != size()) throw ValidationError("sqrt_squared_convolve: length mismatch");
  Eigen::VectorXd e0 = Eigen::VectorXd::Zero(w.size());
  e0[0] = 1.0;
  const Eigen::VectorXd s2 = sqrt_matvec(e0).array().square().matrix();

  auto ws = fft_->workspace();
  std::copy(s2.data(), s2.data() + s2.size(), ws.real().begin());
  fft_->forward(ws);
  std::vector<std::complex<double>> kernel(ws.spectrum().begin(), ws.spectrum().end());

  std::copy(w.data(), w.data() + w.size(), ws.real().begin());
  fft_->forward(ws);
  auto spectrum = ws.spectrum();
  for (std::size_t k = 0; k < spectrum.size(); ++k) spectrum[k] *= kernel[k];
  fft_->inverse(ws);
  Eigen::VectorXd out(w.size());
  const double scale = 1.0 / static_cast<double>(size());
  for (Eigen::Index k = 0; k < out.size(); ++k) out[k] = ws.real()[static_cast<std::size_t>(k)] * scale;
  return out;
}

Eigen::VectorXd gamma_to_field(const SpectralBase& sb, const Eigen::VectorXd& gamma, double sigma2) {
  Eigen::VectorXd y = sb.sqrt_matvec(gamma);
  y.array() -= 0.5 * sigma2;
  return y;
}

Eigen::VectorXd field_to_gamma(const SpectralBase& sb, const Eigen::VectorXd& field, double sigma2) {
  Eigen::VectorXd centred = field;
  centred.array() += 0.5 * sigma2;
  return sb.inv_sqrt_matvec(centred);
}

}  // namespace gridsurv
