#pragma once

#include <cstddef>
#include <limits>

#include <Eigen/Core>

namespace gridsurv {

// The sampled quantities, all on the transformed (unconstrained) scale:
// covariate effects, log baseline parameters, log covariance parameters,
// whitened field and optional iid frailties.
struct ParameterState {
  Eigen::VectorXd beta;
  Eigen::VectorXd omega_t;
  Eigen::VectorXd eta_t;
  Eigen::VectorXd gamma;
  Eigen::VectorXd u;

  // (beta, omega_t) stacked: the first Langevin block.
  Eigen::VectorXd beta_omega() const;
  void set_beta_omega(const Eigen::VectorXd& bo);
  // (gamma, u) stacked: the second Langevin block.
  Eigen::VectorXd latent() const;
  void set_latent(const Eigen::VectorXd& latent);

  bool all_finite() const;
};

struct Evaluation {
  // False marks a zero-probability state (non positive definite covariance
  // or a non-finite density); such candidates are always rejected.
  bool valid = false;
  double log_post = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd grad_beta_omega;
  Eigen::VectorXd grad_latent;
  // The latent field implied by the state (Y on the grid), for retention.
  Eigen::VectorXd field;
};

// A log density over ParameterState with gradients for the Langevin blocks.
// evaluate() must be safe to call concurrently.
class Target {
 public:
  virtual ~Target() = default;

  virtual std::size_t beta_dim() const = 0;
  virtual std::size_t omega_dim() const = 0;
  virtual std::size_t eta_dim() const = 0;
  virtual std::size_t gamma_dim() const = 0;
  virtual std::size_t u_dim() const = 0;

  virtual Evaluation evaluate(const ParameterState& state, bool with_gradient = true) const = 0;

  std::size_t beta_omega_dim() const { return beta_dim() + omega_dim(); }
  std::size_t latent_dim() const { return gamma_dim() + u_dim(); }
};

}  // namespace gridsurv
