#include "gridsurv/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <new>
#include <utility>

namespace gridsurv {

namespace {

// The FFTW planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

FftWorkspace::FftWorkspace(std::size_t ny, std::size_t nx)
    : real_size_(ny * nx), spectrum_size_(ny * (nx / 2 + 1)) {
  real_ = static_cast<double*>(fftw_malloc(sizeof(double) * real_size_));
  spectrum_ = reinterpret_cast<std::complex<double>*>(fftw_alloc_complex(spectrum_size_));
  if (real_ == nullptr || spectrum_ == nullptr) {
    release();
    throw std::bad_alloc();
  }
}

FftWorkspace::~FftWorkspace() { release(); }

FftWorkspace::FftWorkspace(FftWorkspace&& other) noexcept
    : real_(std::exchange(other.real_, nullptr)),
      spectrum_(std::exchange(other.spectrum_, nullptr)),
      real_size_(std::exchange(other.real_size_, 0)),
      spectrum_size_(std::exchange(other.spectrum_size_, 0)) {}

FftWorkspace& FftWorkspace::operator=(FftWorkspace&& other) noexcept {
  if (this != &other) {
    release();
    real_ = std::exchange(other.real_, nullptr);
    spectrum_ = std::exchange(other.spectrum_, nullptr);
    real_size_ = std::exchange(other.real_size_, 0);
    spectrum_size_ = std::exchange(other.spectrum_size_, 0);
  }
  return *this;
}

void FftWorkspace::release() noexcept {
  if (real_ != nullptr) fftw_free(real_);
  if (spectrum_ != nullptr) fftw_free(spectrum_);
  real_ = nullptr;
  spectrum_ = nullptr;
}

std::shared_ptr<const Fft2d> Fft2d::get(std::size_t ny, std::size_t nx) {
  static std::mutex cache_mutex;
  static std::map<std::pair<std::size_t, std::size_t>, std::shared_ptr<const Fft2d>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[{ny, nx}];
  if (!slot) slot = std::shared_ptr<const Fft2d>(new Fft2d(ny, nx));
  return slot;
}

Fft2d::Fft2d(std::size_t ny, std::size_t nx) : ny_(ny), nx_(nx) {
  FftWorkspace scratch(ny, nx);
  std::lock_guard lock(planner_mutex());
  auto* in = scratch.real().data();
  auto* out = reinterpret_cast<fftw_complex*>(scratch.spectrum().data());
  forward_plan_ = fftw_plan_dft_r2c_2d(static_cast<int>(ny), static_cast<int>(nx), in, out, FFTW_MEASURE);
  inverse_plan_ = fftw_plan_dft_c2r_2d(static_cast<int>(ny), static_cast<int>(nx), out, in, FFTW_MEASURE);
  if (forward_plan_ == nullptr || inverse_plan_ == nullptr) throw std::bad_alloc();
}

Fft2d::~Fft2d() {
  std::lock_guard lock(planner_mutex());
  if (forward_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(forward_plan_));
  if (inverse_plan_ != nullptr) fftw_destroy_plan(static_cast<fftw_plan>(inverse_plan_));
}

void Fft2d::forward(FftWorkspace& ws) const {
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), ws.real().data(),
                       reinterpret_cast<fftw_complex*>(ws.spectrum().data()));
}

void Fft2d::inverse(FftWorkspace& ws) const {
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_),
                       reinterpret_cast<fftw_complex*>(ws.spectrum().data()), ws.real().data());
}

}  // namespace gridsurv
