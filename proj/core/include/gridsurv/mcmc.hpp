#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/rng.hpp"
#include "gridsurv/target.hpp"

namespace gridsurv {

inline constexpr double kTargetAcceptance = 0.574;
inline constexpr double kRandomWalkRatio = 0.4;

// 1.65^2 / dim^(1/3), the MALA scaling for Gaussian targets.
double langevin_scaling(std::size_t dim);
// 2.38^2 / dim, the random-walk scaling for Gaussian targets.
double random_walk_scaling(std::size_t dim);

// Proposal covariance is h^2 * blockdiag(h2_bo Sigma_bo, c h2_eta Sigma_eta,
// h2_gamma diag(Sigma_gamma)); the Langevin blocks are shifted by half their
// covariance times the gradient.
class ProposalScalings {
 public:
  ProposalScalings() = default;
  // Identity preconditioners and the dimension-based constants.
  static ProposalScalings for_dims(std::size_t beta_omega_dim, std::size_t eta_dim, std::size_t latent_dim);
  static ProposalScalings for_target(const Target& target);

  double h = 1.0;
  double h2_bo = 1.0;
  double h2_eta = 1.0;
  double h2_gamma = 1.0;
  double c = kRandomWalkRatio;

  const Eigen::MatrixXd& sigma_bo() const { return sigma_bo_; }
  const Eigen::MatrixXd& sigma_eta() const { return sigma_eta_; }
  const Eigen::VectorXd& sigma_gamma() const { return sigma_gamma_; }
  const Eigen::MatrixXd& chol_bo() const { return chol_bo_; }
  const Eigen::MatrixXd& chol_eta() const { return chol_eta_; }

  // Throw ValidationError unless symmetric positive definite / positive.
  void set_sigma_bo(const Eigen::MatrixXd& m);
  void set_sigma_eta(const Eigen::MatrixXd& m);
  void set_sigma_gamma(const Eigen::VectorXd& d);

 private:
  Eigen::MatrixXd sigma_bo_;
  Eigen::MatrixXd sigma_eta_;
  Eigen::VectorXd sigma_gamma_;
  Eigen::MatrixXd chol_bo_;
  Eigen::MatrixXd chol_eta_;
};

// Robbins-Monro update of log h with gain i^-exponent.
struct AdaptationSchedule {
  double exponent = 0.6;
  double target = kTargetAcceptance;
  double h_min = 1e-6;
  double h_max = 1e3;
  bool continue_after_burnin = false;
  // False keeps h fixed for the whole run (e.g. reusing calibrated scalings).
  bool enabled = true;

  double gain(std::size_t iteration) const;
};

// log h += gain(i) * (acceptance - target), clamped to [h_min, h_max].
void adapt(ProposalScalings& scalings, double acceptance, std::size_t iteration, const AdaptationSchedule& schedule);

struct ChainConfig {
  std::size_t n_iterations = 1000;
  std::size_t burnin = 100;
  std::size_t thin = 1;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  AdaptationSchedule adaptation;

  void validate() const;
  std::size_t retained_count() const { return (n_iterations - burnin) / thin; }
};

struct ChainState {
  ParameterState state;
  Evaluation eval;
};

struct Candidate {
  ParameterState state;
  Evaluation eval;
  // log q(current | candidate) - log q(candidate | current); 0 when the
  // candidate is invalid.
  double log_q_ratio = 0.0;
};

// Draws one joint candidate and evaluates the target there. Noise is drawn
// in block order (beta/omega, eta, latent).
Candidate propose(const Target& target, const ChainState& current, const ProposalScalings& scalings, Rng& rng);

// Log of the Metropolis-Hastings ratio for a candidate; -inf when invalid.
double log_acceptance_ratio(const ChainState& current, const Candidate& candidate);

struct StepResult {
  bool accepted = false;
  double accept_prob = 0.0;
};

StepResult mh_step(const Target& target, ChainState& current, const ProposalScalings& scalings, Rng& rng);

struct ParallelStepResult {
  std::optional<std::size_t> accepted_index;
  // Candidates whose own accept test passed (all k are tested).
  std::size_t passed = 0;
};

// k = streams.size() candidates from the same current state, evaluated
// concurrently; each gets its own uniform from its own stream and the lowest
// accepted index becomes the next state. With one stream this is mh_step.
ParallelStepResult parallel_propose(const Target& target, ChainState& current, const ProposalScalings& scalings,
                                    std::span<Rng> streams);

// Probability that at least one of k independent candidates is accepted
// when each is accepted with probability p: 1 - (1 - p)^k.
double multi_proposal_move_probability(double p, std::size_t k);

struct Sample {
  std::size_t iteration = 0;
  double log_post = 0.0;
  Eigen::VectorXd beta;
  Eigen::VectorXd omega_t;
  Eigen::VectorXd eta_t;
  Eigen::VectorXd field;
};

struct ChainOutput {
  std::vector<Sample> samples;
  // Per retained sample: running per-candidate acceptance rate and h.
  std::vector<double> acceptance_trace;
  std::vector<double> h_trace;
  double initial_log_post = 0.0;
  // Per-candidate acceptance rates.
  double burnin_acceptance = 0.0;
  double post_burnin_acceptance = 0.0;
  // Fraction of post burn-in iterations in which the chain moved.
  double post_burnin_move_rate = 0.0;
  ProposalScalings final_scalings;

  std::vector<double> log_post_trace() const;
};

// Deterministic given config.seed. Stream j of the run is Rng(seed, j).
ChainOutput run_chain(const Target& target, const ChainConfig& config, ParameterState initial,
                      ProposalScalings scalings);

}  // namespace gridsurv
