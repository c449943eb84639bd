#include "gridsurv/log.hpp"

#include <iostream>
#include <mutex>
#include <sstream>

#include "gridsurv/errors.hpp"

namespace gridsurv {

namespace {

std::mutex& handler_mutex() {
  static std::mutex m;
  return m;
}

WarningHandler& handler() {
  static WarningHandler h;
  return h;
}

std::string describe_non_pd(double min_eig, double phi, double tolerance) {
  std::ostringstream os;
  os << "covariance on the extended grid is not positive definite (min eigenvalue " << min_eig
     << " <= tolerance " << tolerance << ", phi = " << phi
     << "); extend the grid (larger ext_factor) or use a tighter prior on phi";
  return os.str();
}

}  // namespace

NonPositiveDefinite::NonPositiveDefinite(double min_eig, double phi, double tolerance)
    : NumericalError(describe_non_pd(min_eig, phi, tolerance)),
      min_eig_(min_eig),
      phi_(phi),
      tolerance_(tolerance) {}

WarningHandler set_warning_handler(WarningHandler h) {
  std::lock_guard lock(handler_mutex());
  auto previous = std::move(handler());
  handler() = std::move(h);
  return previous;
}

void warn(const std::string& message) {
  std::lock_guard lock(handler_mutex());
  if (handler()) {
    handler()(message);
  } else {
    std::cerr << "gridsurv warning: " << message << '\n';
  }
}

}  // namespace gridsurv
