#include "gridsurv/posterior.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "gridsurv/errors.hpp"

namespace gridsurv {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

Eigen::VectorXd stack(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  Eigen::VectorXd out(a.size() + b.size());
  out << a, b;
  return out;
}

template <class Record>
Eigen::MatrixXd covariate_matrix(const std::vector<Record>& records, std::size_t p) {
  Eigen::MatrixXd x(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].covariates.size() != p) {
      throw ValidationError("record '" + records[i].id + "' has " + std::to_string(records[i].covariates.size()) +
                            " covariates, expected " + std::to_string(p));
    }
    for (std::size_t j = 0; j < p; ++j) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = records[i].covariates[j];
    }
  }
  return x;
}

}  // namespace

Eigen::VectorXd ParameterState::beta_omega() const { return stack(beta, omega_t); }

void ParameterState::set_beta_omega(const Eigen::VectorXd& bo) {
  beta = bo.head(beta.size());
  omega_t = bo.tail(omega_t.size());
}

Eigen::VectorXd ParameterState::latent() const { return stack(gamma, u); }

void ParameterState::set_latent(const Eigen::VectorXd& latent) {
  gamma = latent.head(gamma.size());
  u = latent.tail(u.size());
}

bool ParameterState::all_finite() const {
  return beta.allFinite() && omega_t.allFinite() && eta_t.allFinite() && gamma.allFinite() && u.allFinite();
}

double NormalPrior::log_density(double x) const {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kHalfLog2Pi;
}

Priors Priors::defaults(std::size_t beta_dim, std::size_t omega_dim, NormalPrior log_phi) {
  Priors p;
  p.beta.assign(beta_dim, NormalPrior{0.0, 10.0});
  p.omega_t.assign(omega_dim, NormalPrior{0.0, 10.0});
  p.log_sigma = NormalPrior{0.0, 0.5};
  p.log_phi = log_phi;
  return p;
}

void Priors::validate(std::size_t beta_dim, std::size_t omega_dim) const {
  if (beta.size() != beta_dim) throw ValidationError("priors: expected " + std::to_string(beta_dim) + " beta priors");
  if (omega_t.size() != omega_dim) {
    throw ValidationError("priors: expected " + std::to_string(omega_dim) + " baseline priors");
  }
  auto check = [](const NormalPrior& p, const char* what) {
    if (!(p.sd > 0.0) || !std::isfinite(p.sd) || !std::isfinite(p.mean)) {
      throw ValidationError(std::string("priors: ") + what + " needs a finite mean and sd > 0");
    }
  };
  for (const auto& p : beta) check(p, "beta");
  for (const auto& p : omega_t) check(p, "omega");
  check(log_sigma, "log_sigma");
  check(log_phi, "log_phi");
  if (log_sigma_u) check(*log_sigma_u, "log_sigma_u");
  if (sigma_u && !(*sigma_u > 0.0)) throw ValidationError("priors: sigma_u must be > 0");
}

Dataset Dataset::from_survival(std::vector<SurvivalRecord> records, std::vector<std::string> covariate_names,
                               std::optional<double> fixed_shape) {
  Dataset d;
  d.covariates = covariate_matrix(records, covariate_names.size());
  d.covariate_names = std::move(covariate_names);
  for (const auto& r : records) {
    d.ids.push_back(r.id);
    d.locations.push_back(r.location);
  }
  d.outcome = std::make_shared<SurvivalOutcome>(std::move(records), fixed_shape);
  return d;
}

Dataset Dataset::from_counts(std::vector<CountRecord> records, std::vector<std::string> covariate_names) {
  Dataset d;
  d.covariates = covariate_matrix(records, covariate_names.size());
  d.covariate_names = std::move(covariate_names);
  for (const auto& r : records) {
    d.ids.push_back(r.id);
    d.locations.push_back(r.location);
  }
  d.outcome = std::make_shared<PoissonOutcome>(std::move(records));
  return d;
}

SpatialPosterior::SpatialPosterior(std::shared_ptr<const Dataset> data, Grid grid, Priors priors,
                                   PosteriorOptions options)
    : data_(std::move(data)), grid_(std::move(grid)), lags_(grid_), priors_(std::move(priors)), options_(options) {
  if (!data_ || !data_->outcome) throw ValidationError("posterior: dataset has no outcome model");
  if (data_->outcome->size() != data_->size()) throw ValidationError("posterior: outcome/record count mismatch");
  priors_.validate(beta_dim(), omega_dim());
  if (options_.iid_frailties && !priors_.sigma_u && !priors_.log_sigma_u) {
    throw ValidationError("posterior: iid frailties need either a fixed sigma_u or a prior on log sigma_u");
  }
  if (!options_.iid_frailties && priors_.log_sigma_u) {
    throw ValidationError("posterior: a log sigma_u prior requires iid frailties");
  }
  cell_index_.reserve(data_->size());
  for (const auto& p : data_->locations) cell_index_.push_back(grid_.cell_of(p));
}

CovarianceModel SpatialPosterior::covariance_at(const Eigen::VectorXd& eta_t) const {
  if (eta_t.size() != static_cast<Eigen::Index>(eta_dim())) throw ValidationError("posterior: wrong eta_t dimension");
  return CovarianceModel{options_.kind, std::exp(2.0 * eta_t[0]), std::exp(eta_t[1]), options_.nu};
}

SpectralBase SpatialPosterior::spectral_at(const Eigen::VectorXd& eta_t) const {
  return build_spectral(lags_, covariance_at(eta_t), options_.pd_tolerance);
}

double SpatialPosterior::sigma_u_at(const Eigen::VectorXd& eta_t) const {
  if (priors_.log_sigma_u) return std::exp(eta_t[2]);
  return priors_.sigma_u.value_or(1.0);
}

ParameterState SpatialPosterior::zero_state() const {
  ParameterState s;
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(beta_dim()));
  s.omega_t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(omega_dim()));
  s.eta_t = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(eta_dim()));
  s.eta_t[0] = priors_.log_sigma.mean;
  s.eta_t[1] = priors_.log_phi.mean;
  if (priors_.log_sigma_u) s.eta_t[2] = priors_.log_sigma_u->mean;
  s.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gamma_dim()));
  s.u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(u_dim()));
  return s;
}

void SpatialPosterior::check_dims(const ParameterState& s) const {
  if (s.beta.size() != static_cast<Eigen::Index>(beta_dim()) || s.omega_t.size() != static_cast<Eigen::Index>(omega_dim()) ||
      s.eta_t.size() != static_cast<Eigen::Index>(eta_dim()) || s.gamma.size() != static_cast<Eigen::Index>(gamma_dim()) ||
      s.u.size() != static_cast<Eigen::Index>(u_dim())) {
    throw ValidationError("posterior: parameter state has the wrong dimensions");
  }
}

Eigen::VectorXd SpatialPosterior::linear_predictor(const ParameterState& s, const Eigen::VectorXd& field) const {
  Eigen::VectorXd eta = data_->covariates * s.beta;
  for (std::size_t i = 0; i < cell_index_.size(); ++i) {
    eta[static_cast<Eigen::Index>(i)] += field[static_cast<Eigen::Index>(cell_index_[i])];
  }
  if (s.u.size() > 0) eta += s.u;
  return eta;
}

double SpatialPosterior::log_prior(const ParameterState& s) const {
  double lp = 0.0;
  for (Eigen::Index j = 0; j < s.beta.size(); ++j) lp += priors_.beta[static_cast<std::size_t>(j)].log_density(s.beta[j]);
  for (Eigen::Index j = 0; j < s.omega_t.size(); ++j) {
    lp += priors_.omega_t[static_cast<std::size_t>(j)].log_density(s.omega_t[j]);
  }
  lp += priors_.log_sigma.log_density(s.eta_t[0]);
  lp += priors_.log_phi.log_density(s.eta_t[1]);
  if (priors_.log_sigma_u) lp += priors_.log_sigma_u->log_density(s.eta_t[2]);
  lp += -0.5 * s.gamma.squaredNorm() - static_cast<double>(s.gamma.size()) * kHalfLog2Pi;
  if (s.u.size() > 0) {
    const double su = sigma_u_at(s.eta_t);
    lp += -0.5 * s.u.squaredNorm() / (su * su) - static_cast<double>(s.u.size()) * (std::log(su) + kHalfLog2Pi);
  }
  return lp;
}

Evaluation SpatialPosterior::assemble(const ParameterState& s, const SpectralBase& sb, bool with_gradient) const {
  const double sigma2 = sb.model().sigma2;
  Evaluation ev;
  ev.field = gamma_to_field(sb, s.gamma, sigma2);
  const Eigen::VectorXd eta = linear_predictor(s, ev.field);

  const std::size_t n = data_->size();
  Eigen::VectorXd deta = with_gradient ? Eigen::VectorXd(static_cast<Eigen::Index>(n)) : Eigen::VectorXd();
  Eigen::VectorXd domega = with_gradient ? Eigen::VectorXd(static_cast<Eigen::Index>(omega_dim())) : Eigen::VectorXd();
  const double ll = data_->outcome->evaluate({eta.data(), n}, {s.omega_t.data(), omega_dim()},
                                             {deta.data(), static_cast<std::size_t>(deta.size())},
                                             {domega.data(), static_cast<std::size_t>(domega.size())});
  ev.log_post = ll + log_prior(s);
  ev.valid = std::isfinite(ev.log_post);
  if (!ev.valid || !with_gradient) return ev;

  const auto p = static_cast<Eigen::Index>(beta_dim());
  ev.grad_beta_omega.resize(p + static_cast<Eigen::Index>(omega_dim()));
  ev.grad_beta_omega.head(p) = data_->covariates.transpose() * deta;
  for (Eigen::Index j = 0; j < p; ++j) ev.grad_beta_omega[j] += priors_.beta[static_cast<std::size_t>(j)].score(s.beta[j]);
  for (Eigen::Index j = 0; j < s.omega_t.size(); ++j) {
    ev.grad_beta_omega[p + j] = domega[j] + priors_.omega_t[static_cast<std::size_t>(j)].score(s.omega_t[j]);
  }

  Eigen::VectorXd cell_score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gamma_dim()));
  for (std::size_t i = 0; i < n; ++i) cell_score[static_cast<Eigen::Index>(cell_index_[i])] += deta[static_cast<Eigen::Index>(i)];
  ev.grad_latent.resize(static_cast<Eigen::Index>(latent_dim()));
  ev.grad_latent.head(s.gamma.size()) = sb.sqrt_matvec(cell_score) - s.gamma;
  if (s.u.size() > 0) {
    const double su = sigma_u_at(s.eta_t);
    ev.grad_latent.tail(s.u.size()) = deta - s.u / (su * su);
  }
  ev.valid = ev.grad_beta_omega.allFinite() && ev.grad_latent.allFinite();
  return ev;
}

Evaluation SpatialPosterior::evaluate(const ParameterState& s, bool with_gradient) const {
  check_dims(s);
  if (!s.all_finite()) return Evaluation{};
  try {
    return assemble(s, spectral_at(s.eta_t), with_gradient);
  } catch (const NonPositiveDefinite&) {
    return Evaluation{};
  }
}

double SpatialPosterior::log_posterior(const ParameterState& s, Eigen::VectorXd* field) const {
  check_dims(s);
  auto ev = assemble(s, spectral_at(s.eta_t), false);
  if (!ev.valid) throw NumericalError("log_posterior: value is not finite");
  if (field != nullptr) *field = std::move(ev.field);
  return ev.log_post;
}

Eigen::VectorXd SpatialPosterior::grad_beta_omega(const ParameterState& s) const {
  check_dims(s);
  auto ev = assemble(s, spectral_at(s.eta_t), true);
  if (!ev.valid) throw NumericalError("grad_beta_omega: posterior is not finite at this state");
  return ev.grad_beta_omega;
}

Eigen::VectorXd SpatialPosterior::grad_gamma(const ParameterState& s) const {
  check_dims(s);
  auto ev = assemble(s, spectral_at(s.eta_t), true);
  if (!ev.valid) throw NumericalError("grad_gamma: posterior is not finite at this state");
  return ev.grad_latent.head(s.gamma.size());
}

double SpatialPosterior::log_posterior_given_field(const ParameterState& s, const Eigen::VectorXd& field) const {
  check_dims(s);
  if (field.size() != static_cast<Eigen::Index>(gamma_dim())) throw ValidationError("posterior: field length mismatch");
  const Eigen::VectorXd eta = linear_predictor(s, field);
  const double ll = data_->outcome->evaluate({eta.data(), data_->size()}, {s.omega_t.data(), omega_dim()}, {}, {});
  return ll + log_prior(s);
}

}  // namespace gridsurv
