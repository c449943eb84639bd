#include "gridsurv/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "gridsurv/errors.hpp"

namespace gridsurv {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& m, const char* what) {
  if (m.rows() != m.cols()) throw ValidationError(std::string(what) + " must be square");
  if (!m.allFinite()) throw ValidationError(std::string(what) + " must be finite");
  if (!m.isApprox(m.transpose(), 1e-8) && m.size() > 0) throw ValidationError(std::string(what) + " must be symmetric");
  if (m.size() == 0) return m;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (m + m.transpose()));
  if (llt.info() != Eigen::Success) throw ValidationError(std::string(what) + " must be positive definite");
  return llt.matrixL();
}

// log q(to | from) up to a constant shared by both directions, for a Langevin
// block with covariance s * L L^T.
double langevin_log_q_dense(const Eigen::VectorXd& to, const Eigen::VectorXd& from, const Eigen::VectorXd& grad,
                            double s, const Eigen::MatrixXd& sigma, const Eigen::MatrixXd& chol) {
  if (to.size() == 0) return 0.0;
  const Eigen::VectorXd diff = to - from - 0.5 * s * (sigma * grad);
  const Eigen::VectorXd w = chol.triangularView<Eigen::Lower>().solve(diff);
  return -0.5 * w.squaredNorm() / s;
}

double langevin_log_q_diag(const Eigen::VectorXd& to, const Eigen::VectorXd& from, const Eigen::VectorXd& grad,
                           double s, const Eigen::VectorXd& d) {
  if (to.size() == 0) return 0.0;
  const Eigen::ArrayXd diff = (to - from).array() - 0.5 * s * d.array() * grad.array();
  return -0.5 * (diff.square() / d.array()).sum() / s;
}

}  // namespace

double langevin_scaling(std::size_t dim) {
  if (dim == 0) return 1.0;
  return 1.65 * 1.65 / std::cbrt(static_cast<double>(dim));
}

double random_walk_scaling(std::size_t dim) {
  if (dim == 0) return 1.0;
  return 2.38 * 2.38 / static_cast<double>(dim);
}

ProposalScalings ProposalScalings::for_dims(std::size_t beta_omega_dim, std::size_t eta_dim,
                                            std::size_t latent_dim) {
  ProposalScalings s;
  s.h2_bo = langevin_scaling(beta_omega_dim);
  s.h2_eta = random_walk_scaling(eta_dim);
  s.h2_gamma = langevin_scaling(latent_dim);
  const auto bo = static_cast<Eigen::Index>(beta_omega_dim);
  const auto et = static_cast<Eigen::Index>(eta_dim);
  s.set_sigma_bo(Eigen::MatrixXd::Identity(bo, bo));
  s.set_sigma_eta(Eigen::MatrixXd::Identity(et, et));
  s.set_sigma_gamma(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(latent_dim)));
  return s;
}

ProposalScalings ProposalScalings::for_target(const Target& target) {
  return for_dims(target.beta_omega_dim(), target.eta_dim(), target.latent_dim());
}

void ProposalScalings::set_sigma_bo(const Eigen::MatrixXd& m) {
  chol_bo_ = checked_cholesky(m, "Sigma_bo");
  sigma_bo_ = 0.5 * (m + m.transpose());
}

void ProposalScalings::set_sigma_eta(const Eigen::MatrixXd& m) {
  chol_eta_ = checked_cholesky(m, "Sigma_eta");
  sigma_eta_ = 0.5 * (m + m.transpose());
}

void ProposalScalings::set_sigma_gamma(const Eigen::VectorXd& d) {
  if (!d.allFinite() || (d.size() > 0 && !(d.minCoeff() > 0.0))) {
    throw ValidationError("Sigma_gamma entries must be positive and finite");
  }
  sigma_gamma_ = d;
}

double AdaptationSchedule::gain(std::size_t iteration) const {
  return std::pow(static_cast<double>(std::max<std::size_t>(iteration, 1)), -exponent);
}

void adapt(ProposalScalings& scalings, double acceptance, std::size_t iteration, const AdaptationSchedule& schedule) {
  const double log_h = std::log(scalings.h) + schedule.gain(iteration) * (acceptance - schedule.target);
  scalings.h = std::clamp(std::exp(log_h), schedule.h_min, schedule.h_max);
}

void ChainConfig::validate() const {
  if (n_iterations == 0) throw ValidationError("chain: n_iterations must be > 0");
  if (burnin >= n_iterations) throw ValidationError("chain: burnin must be < n_iterations");
  if (thin == 0) throw ValidationError("chain: thin must be >= 1");
  if (workers == 0) throw ValidationError("chain: workers must be >= 1");
  if (!(adaptation.exponent > 0.5) || !(adaptation.exponent <= 1.0)) {
    throw ValidationError("chain: adaptation exponent must lie in (0.5, 1]");
  }
  if (!(adaptation.h_min > 0.0) || !(adaptation.h_max > adaptation.h_min)) {
    throw ValidationError("chain: need 0 < h_min < h_max");
  }
}

Candidate propose(const Target& target, const ChainState& current, const ProposalScalings& scalings, Rng& rng) {
  const auto& x = current.state;
  const auto& gx = current.eval;
  const double h2 = scalings.h * scalings.h;
  const double s_bo = h2 * scalings.h2_bo;
  const double s_eta = h2 * scalings.c * scalings.h2_eta;
  const double s_lat = h2 * scalings.h2_gamma;

  const auto n_bo = static_cast<Eigen::Index>(target.beta_omega_dim());
  const auto n_eta = static_cast<Eigen::Index>(target.eta_dim());
  const auto n_lat = static_cast<Eigen::Index>(target.latent_dim());
  const Eigen::VectorXd z_bo = rng.normal_vector(n_bo);
  const Eigen::VectorXd z_eta = rng.normal_vector(n_eta);
  const Eigen::VectorXd z_lat = rng.normal_vector(n_lat);

  const Eigen::VectorXd bo = x.beta_omega();
  const Eigen::VectorXd lat = x.latent();
  const Eigen::VectorXd& d = scalings.sigma_gamma();

  Eigen::VectorXd bo_new = bo;
  if (n_bo > 0) {
    bo_new = bo + 0.5 * s_bo * (scalings.sigma_bo() * gx.grad_beta_omega) + std::sqrt(s_bo) * (scalings.chol_bo() * z_bo);
  }
  Eigen::VectorXd lat_new = lat;
  if (n_lat > 0) {
    lat_new = lat + (0.5 * s_lat * d.array() * gx.grad_latent.array()).matrix() +
              std::sqrt(s_lat) * (d.array().sqrt() * z_lat.array()).matrix();
  }

  Candidate cand;
  cand.state = x;
  cand.state.set_beta_omega(bo_new);
  if (n_eta > 0) cand.state.eta_t = x.eta_t + std::sqrt(s_eta) * (scalings.chol_eta() * z_eta);
  cand.state.set_latent(lat_new);

  if (!cand.state.all_finite()) {
    cand.eval = Evaluation{};
    return cand;
  }
  cand.eval = target.evaluate(cand.state, true);
  if (!cand.eval.valid) return cand;

  // The random-walk block is symmetric and drops out.
  const double forward = langevin_log_q_dense(bo_new, bo, gx.grad_beta_omega, s_bo, scalings.sigma_bo(),
                                              scalings.chol_bo()) +
                         langevin_log_q_diag(lat_new, lat, gx.grad_latent, s_lat, d);
  const double backward = langevin_log_q_dense(bo, bo_new, cand.eval.grad_beta_omega, s_bo, scalings.sigma_bo(),
                                               scalings.chol_bo()) +
                          langevin_log_q_diag(lat, lat_new, cand.eval.grad_latent, s_lat, d);
  cand.log_q_ratio = backward - forward;
  return cand;
}

double log_acceptance_ratio(const ChainState& current, const Candidate& candidate) {
  if (!candidate.eval.valid) return kNegInf;
  const double r = candidate.eval.log_post - current.eval.log_post + candidate.log_q_ratio;
  return std::isnan(r) ? kNegInf : r;
}

StepResult mh_step(const Target& target, ChainState& current, const ProposalScalings& scalings, Rng& rng) {
  Candidate cand = propose(target, current, scalings, rng);
  const double log_r = log_acceptance_ratio(current, cand);
  const double u = rng.uniform();
  StepResult out;
  out.accept_prob = log_r >= 0.0 ? 1.0 : std::exp(log_r);
  if (std::log(u) < log_r) {
    out.accepted = true;
    current.state = std::move(cand.state);
    current.eval = std::move(cand.eval);
  }
  return out;
}

ParallelStepResult parallel_propose(const Target& target, ChainState& current, const ProposalScalings& scalings,
                                    std::span<Rng> streams) {
  const std::size_t k = streams.size();
  if (k == 0) throw ValidationError("parallel_propose: need at least one stream");
  std::vector<Candidate> cands(k);
  std::vector<double> log_u(k);
  auto work = [&](std::size_t j) {
    cands[j] = propose(target, current, scalings, streams[j]);
    log_u[j] = std::log(streams[j].uniform());
  };
  if (k == 1) {
    work(0);
  } else {
    tbb::parallel_for(std::size_t{0}, k, work);
  }

  ParallelStepResult out;
  for (std::size_t j = 0; j < k; ++j) {
    if (log_u[j] < log_acceptance_ratio(current, cands[j])) {
      ++out.passed;
      if (!out.accepted_index) out.accepted_index = j;
    }
  }
  if (out.accepted_index) {
    auto& c = cands[*out.accepted_index];
    current.state = std::move(c.state);
    current.eval = std::move(c.eval);
  }
  return out;
}

double multi_proposal_move_probability(double p, std::size_t k) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError("acceptance probability must lie in [0, 1]");
  return 1.0 - std::pow(1.0 - p, static_cast<double>(k));
}

std::vector<double> ChainOutput::log_post_trace() const {
  std::vector<double> out;
  out.reserve(samples.size());
  for (const auto& s : samples) out.push_back(s.log_post);
  return out;
}

ChainOutput run_chain(const Target& target, const ChainConfig& config, ParameterState initial,
                      ProposalScalings scalings) {
  config.validate();
  ChainState current{std::move(initial), {}};
  current.eval = target.evaluate(current.state, true);
  if (!current.eval.valid) throw ValidationError("chain: the initial state has zero posterior density");

  std::vector<Rng> streams;
  streams.reserve(config.workers);
  for (std::size_t j = 0; j < config.workers; ++j) streams.emplace_back(config.seed, j);

  tbb::task_arena arena(static_cast<int>(config.workers));

  ChainOutput out;
  out.initial_log_post = current.eval.log_post;
  out.samples.reserve(config.retained_count());
  double acc_burnin = 0.0;
  double acc_post = 0.0;
  double moves_post = 0.0;
  for (std::size_t i = 1; i <= config.n_iterations; ++i) {
    double acceptance = 0.0;
    bool moved = false;
    if (config.workers == 1) {
      const auto r = mh_step(target, current, scalings, streams[0]);
      acceptance = r.accepted ? 1.0 : 0.0;
      moved = r.accepted;
    } else {
      ParallelStepResult r;
      arena.execute([&] { r = parallel_propose(target, current, scalings, streams); });
      acceptance = static_cast<double>(r.passed) / static_cast<double>(config.workers);
      moved = r.accepted_index.has_value();
    }
    const bool in_burnin = i <= config.burnin;
    if (config.adaptation.enabled && (in_burnin || config.adaptation.continue_after_burnin)) adapt(scalings, acceptance, i, config.adaptation);
    if (in_burnin) {
      acc_burnin += acceptance;
      continue;
    }
    acc_post += acceptance;
    if (moved) moves_post += 1.0;
    const std::size_t k = i - config.burnin;
    if (k % config.thin == 0) {
      Sample s;
      s.iteration = i;
      s.log_post = current.eval.log_post;
      s.beta = current.state.beta;
      s.omega_t = current.state.omega_t;
      s.eta_t = current.state.eta_t;
      s.field = current.eval.field;
      out.samples.push_back(std::move(s));
      out.acceptance_trace.push_back(acc_post / static_cast<double>(k));
      out.h_trace.push_back(scalings.h);
    }
  }
  const auto n_post = static_cast<double>(config.n_iterations - config.burnin);
  out.burnin_acceptance = config.burnin > 0 ? acc_burnin / static_cast<double>(config.burnin) : 0.0;
  out.post_burnin_acceptance = acc_post / n_post;
  out.post_burnin_move_rate = moves_post / n_post;
  out.final_scalings = std::move(scalings);
  return out;
}

}  // namespace gridsurv
