#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gridsurv {

// Bad input: malformed data, out-of-range arguments, misuse of an API.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Base for failures of the numerics rather than of the input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The toroidal covariance matrix has an eigenvalue at or below the positive
// definiteness tolerance. Remedy: extend the grid or restrict the decay prior.
class NonPositiveDefinite : public NumericalError {
 public:
  NonPositiveDefinite(double min_eig, double phi, double tolerance);

  double min_eig() const noexcept { return min_eig_; }
  double phi() const noexcept { return phi_; }
  double tolerance() const noexcept { return tolerance_; }

 private:
  double min_eig_;
  double phi_;
  double tolerance_;
};

// A likelihood contribution is -inf for every parameter value (e.g. an
// interval whose end points have equal cumulative hazard).
class ModelDegenerate : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::vector<double> trace)
      : NumericalError(what), trace_(std::move(trace)) {}

  // Objective value per optimizer iteration.
  const std::vector<double>& trace() const noexcept { return trace_; }

 private:
  std::vector<double> trace_;
};

}  // namespace gridsurv
