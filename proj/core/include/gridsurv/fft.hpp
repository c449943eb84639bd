#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>

namespace gridsurv {

// Aligned scratch space for one 2-D real transform: a row-major ny x nx
// real array and its ny x (nx/2 + 1) half spectrum.
class FftWorkspace {
 public:
  FftWorkspace(std::size_t ny, std::size_t nx);
  ~FftWorkspace();
  FftWorkspace(const FftWorkspace&) = delete;
  FftWorkspace& operator=(const FftWorkspace&) = delete;
  FftWorkspace(FftWorkspace&& other) noexcept;
  FftWorkspace& operator=(FftWorkspace&& other) noexcept;

  std::span<double> real() { return {real_, real_size_}; }
  std::span<const double> real() const { return {real_, real_size_}; }
  std::span<std::complex<double>> spectrum() { return {spectrum_, spectrum_size_}; }
  std::span<const std::complex<double>> spectrum() const { return {spectrum_, spectrum_size_}; }

 private:
  void release() noexcept;

  double* real_ = nullptr;
  std::complex<double>* spectrum_ = nullptr;
  std::size_t real_size_ = 0;
  std::size_t spectrum_size_ = 0;
};

// Planned unnormalized 2-D real DFT pair for one grid shape. Plans are
// created once per shape and shared; executing them is thread-safe.
class Fft2d {
 public:
  static std::shared_ptr<const Fft2d> get(std::size_t ny, std::size_t nx);

  ~Fft2d();
  Fft2d(const Fft2d&) = delete;
  Fft2d& operator=(const Fft2d&) = delete;

  std::size_t ny() const { return ny_; }
  std::size_t nx() const { return nx_; }
  std::size_t half_nx() const { return nx_ / 2 + 1; }
  std::size_t real_size() const { return ny_ * nx_; }
  std::size_t spectrum_size() const { return ny_ * half_nx(); }

  FftWorkspace workspace() const { return FftWorkspace(ny_, nx_); }

  // real -> spectrum. The real array is preserved.
  void forward(FftWorkspace& ws) const;
  // spectrum -> real, without the 1/(nx*ny) factor. The spectrum is destroyed.
  void inverse(FftWorkspace& ws) const;

 private:
  Fft2d(std::size_t ny, std::size_t nx);

  std::size_t ny_;
  std::size_t nx_;
  void* forward_plan_ = nullptr;
  void* inverse_plan_ = nullptr;
};

}  // namespace gridsurv
