#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/mcmc.hpp"
#include "gridsurv/posterior.hpp"

namespace gridsurv {

// Least-squares quadratic q(x) = c + b^T x + x^T A x / 2 over d-dimensional
// points (needs at least (d+1)(d+2)/2 of them).
struct QuadraticFit {
  Eigen::VectorXd gradient_at_zero;  // b
  Eigen::MatrixXd hessian;           // A
  double constant = 0.0;
  bool concave = false;
  // Stationary point -A^{-1} b; only meaningful when concave.
  Eigen::VectorXd maximizer;
};

QuadraticFit fit_quadratic_surface(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values);

struct MleResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd omega_t;
  double loglik = 0.0;
  // Negative log-likelihood per optimizer iteration.
  std::vector<double> trace;
  bool used_finite_differences = false;
};

// Stage 1: maximum likelihood of (beta, omega_t) with no spatial field.
// Throws ConvergenceError (with the trace) when neither the analytic nor the
// finite-difference gradient run converges.
MleResult fit_nonspatial_mle(const Dataset& data);

// Stage 2: per-cell mean of the record-wise eta maximizers minus X beta.
// Records without a finite maximizer are skipped; empty cells get the overall
// mean (0 when no record has one).
Eigen::VectorXd adhoc_field(const SpatialPosterior& posterior, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& omega_t);

struct InitOptions {
  int lattice_points = 7;
  double lattice_span_sd = 3.0;
  double hessian_step = 1e-4;
};

struct Initialization {
  ParameterState state;
  ProposalScalings scalings;
  MleResult mle;
  Eigen::VectorXd field;  // stage 2
  QuadraticFit eta_fit;
  // True when the stage 3 surface was not concave and the prior variance and
  // best lattice point were used instead.
  bool eta_fallback = false;
};

// Three-stage initial values and preconditioners. The returned state has
// gamma = 0 and u = 0.
Initialization initialize(const SpatialPosterior& posterior, const InitOptions& options = {});

}  // namespace gridsurv
