#include "gridsurv/initialize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <ceres/gradient_problem.h>
#include <ceres/gradient_problem_solver.h>

#include "gridsurv/errors.hpp"
#include "gridsurv/log.hpp"

namespace gridsurv {

namespace {

// Negative log-likelihood of (beta, omega_t) with no field.
class NonspatialObjective final : public ceres::FirstOrderFunction {
 public:
  NonspatialObjective(const Dataset& data, bool finite_differences)
      : data_(data), fd_(finite_differences), p_(data.covariates.cols()),
        q_(static_cast<Eigen::Index>(data.outcome->omega_dim())) {}

  int NumParameters() const override { return static_cast<int>(p_ + q_); }

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> x(parameters, p_ + q_);
    if (!x.allFinite()) return false;
    if (gradient == nullptr || !fd_) {
      Eigen::VectorXd g;
      const double v = value(x, gradient != nullptr ? &g : nullptr);
      if (!std::isfinite(v)) return false;
      *cost = -v;
      if (gradient != nullptr) {
        if (!g.allFinite()) return false;
        Eigen::Map<Eigen::VectorXd>(gradient, p_ + q_) = -g;
      }
      return true;
    }
    const double v = value(x, nullptr);
    if (!std::isfinite(v)) return false;
    *cost = -v;
    Eigen::VectorXd xp = x;
    for (Eigen::Index j = 0; j < p_ + q_; ++j) {
      const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
      xp[j] = x[j] + step;
      const double up = value(xp, nullptr);
      xp[j] = x[j] - step;
      const double down = value(xp, nullptr);
      xp[j] = x[j];
      if (!std::isfinite(up) || !std::isfinite(down)) return false;
      gradient[j] = -(up - down) / (2.0 * step);
    }
    return true;
  }

 private:
  double value(const Eigen::VectorXd& x, Eigen::VectorXd* grad) const {
    const Eigen::VectorXd beta = x.head(p_);
    const Eigen::VectorXd omega = x.tail(q_);
    const Eigen::VectorXd eta = data_.covariates * beta;
    const std::size_t n = data_.size();
    Eigen::VectorXd deta;
    Eigen::VectorXd domega;
    if (grad != nullptr) {
      deta.resize(static_cast<Eigen::Index>(n));
      domega.resize(q_);
    }
    const double ll = data_.outcome->evaluate({eta.data(), n}, {omega.data(), static_cast<std::size_t>(q_)},
                                              {deta.data(), static_cast<std::size_t>(deta.size())},
                                              {domega.data(), static_cast<std::size_t>(domega.size())});
    if (grad != nullptr) {
      grad->resize(p_ + q_);
      grad->head(p_) = data_.covariates.transpose() * deta;
      grad->tail(q_) = domega;
    }
    return ll;
  }

  const Dataset& data_;
  bool fd_;
  Eigen::Index p_;
  Eigen::Index q_;
};

bool run_bfgs(const Dataset& data, bool fd, Eigen::VectorXd& x, std::vector<double>& trace, std::string& message) {
  ceres::GradientProblem problem(new NonspatialObjective(data, fd));
  ceres::GradientProblemSolver::Options opts;
  opts.line_search_direction_type = ceres::BFGS;
  opts.max_num_iterations = 2000;
  opts.function_tolerance = 1e-15;
  opts.gradient_tolerance = 1e-12;
  opts.parameter_tolerance = 1e-14;
  opts.logging_type = ceres::SILENT;
  ceres::GradientProblemSolver::Summary summary;
  ceres::Solve(opts, problem, x.data(), &summary);
  // Iterations that stop on a convergence test do not appear in
  // summary.iterations, so the final cost is appended explicitly.
  for (const auto& it : summary.iterations) trace.push_back(it.cost);
  if (trace.empty() || trace.back() != summary.final_cost) trace.push_back(summary.final_cost);
  message = summary.message;
  return summary.termination_type == ceres::CONVERGENCE && x.allFinite();
}

Eigen::MatrixXd positive_definite_inverse(const Eigen::MatrixXd& neg_hessian, double floor) {
  const Eigen::MatrixXd sym = 0.5 * (neg_hessian + neg_hessian.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  Eigen::VectorXd ev = es.eigenvalues();
  bool fixed = false;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (!(ev[i] > floor)) {
      ev[i] = std::max(std::abs(ev[i]), floor);
      fixed = true;
    }
  }
  if (fixed) warn("initialize: (beta, omega) curvature is not negative definite; eigenvalues were floored");
  return es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

}  // namespace

QuadraticFit fit_quadratic_surface(const std::vector<Eigen::VectorXd>& points, const std::vector<double>& values) {
  if (points.empty() || points.size() != values.size()) throw ValidationError("quadratic fit: points/values mismatch");
  const Eigen::Index d = points.front().size();
  const Eigen::Index k = 1 + d + d * (d + 1) / 2;
  if (static_cast<Eigen::Index>(points.size()) < k) throw ValidationError("quadratic fit: too few points");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(points.size()), k);
  Eigen::VectorXd y(static_cast<Eigen::Index>(points.size()));
  for (std::size_t r = 0; r < points.size(); ++r) {
    const auto& x = points[r];
    if (x.size() != d) throw ValidationError("quadratic fit: inconsistent point dimension");
    const auto row = static_cast<Eigen::Index>(r);
    Eigen::Index c = 0;
    design(row, c++) = 1.0;
    for (Eigen::Index i = 0; i < d; ++i) design(row, c++) = x[i];
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = i; j < d; ++j) design(row, c++) = i == j ? 0.5 * x[i] * x[i] : x[i] * x[j];
    }
    y[row] = values[r];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(y);
  QuadraticFit fit;
  fit.constant = coef[0];
  fit.gradient_at_zero = coef.segment(1, d);
  fit.hessian.resize(d, d);
  Eigen::Index c = 1 + d;
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = i; j < d; ++j) {
      fit.hessian(i, j) = coef[c];
      fit.hessian(j, i) = coef[c];
      ++c;
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(-fit.hessian);
  fit.concave = llt.info() == Eigen::Success;
  if (fit.concave) {
    fit.maximizer = llt.solve(fit.gradient_at_zero);
  } else {
    fit.maximizer = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::quiet_NaN());
  }
  return fit;
}

MleResult fit_nonspatial_mle(const Dataset& data) {
  const Eigen::Index p = data.covariates.cols();
  const auto omega0 = data.outcome->default_omega();
  Eigen::VectorXd start(p + static_cast<Eigen::Index>(omega0.size()));
  start.head(p).setZero();
  for (std::size_t j = 0; j < omega0.size(); ++j) start[p + static_cast<Eigen::Index>(j)] = omega0[j];

  MleResult out;
  std::string message;
  Eigen::VectorXd x = start;
  bool ok = run_bfgs(data, false, x, out.trace, message);
  if (!ok) {
    warn("initialize: analytic-gradient BFGS did not converge (" + message + "); retrying with finite differences");
    x = start;
    out.trace.clear();
    out.used_finite_differences = true;
    ok = run_bfgs(data, true, x, out.trace, message);
  }
  if (!ok) throw ConvergenceError("maximum likelihood did not converge: " + message, out.trace);
  out.beta = x.head(p);
  out.omega_t = x.tail(x.size() - p);
  const Eigen::VectorXd eta = data.covariates * out.beta;
  out.loglik = data.outcome->evaluate({eta.data(), data.size()}, {out.omega_t.data(), static_cast<std::size_t>(out.omega_t.size())}, {}, {});
  return out;
}

Eigen::VectorXd adhoc_field(const SpatialPosterior& posterior, const Eigen::VectorXd& beta,
                            const Eigen::VectorXd& omega_t) {
  const auto& data = posterior.data();
  const auto m = static_cast<Eigen::Index>(posterior.gamma_dim());
  const Eigen::VectorXd xb = data.covariates * beta;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd count = Eigen::VectorXd::Zero(m);
  double total = 0.0;
  double used = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double eta = data.outcome->eta_maximizer(i, {omega_t.data(), static_cast<std::size_t>(omega_t.size())});
    if (!std::isfinite(eta)) continue;
    const double y = eta - xb[static_cast<Eigen::Index>(i)];
    const auto c = static_cast<Eigen::Index>(posterior.cell_index()[i]);
    sum[c] += y;
    count[c] += 1.0;
    total += y;
    used += 1.0;
  }
  const double overall = used > 0.0 ? total / used : 0.0;
  Eigen::VectorXd field(m);
  for (Eigen::Index c = 0; c < m; ++c) field[c] = count[c] > 0.0 ? sum[c] / count[c] : overall;
  return field;
}

Initialization initialize(const SpatialPosterior& posterior, const InitOptions& options) {
  if (options.lattice_points < 3) throw ValidationError("initialize: need at least 3 lattice points per axis");
  if (posterior.data().size() == 0) throw ValidationError("initialize: need at least one record");
  Initialization init;

  // Stage 1.
  init.mle = fit_nonspatial_mle(posterior.data());

  // Stage 2.
  init.field = adhoc_field(posterior, init.mle.beta, init.mle.omega_t);

  // Stage 3: conditional log density of eta_t given the ad hoc field, i.e.
  // N(Y; -sigma^2/2, Sigma) times the priors. In the gamma parameterization
  // this is the full log posterior plus the Jacobian -log|Sigma|/2.
  const auto& priors = posterior.priors();
  const std::size_t d = posterior.eta_dim();
  std::vector<NormalPrior> eta_priors{priors.log_sigma, priors.log_phi};
  if (d == 3) eta_priors.push_back(*priors.log_sigma_u);

  ParameterState probe = posterior.zero_state();
  probe.beta = init.mle.beta;
  probe.omega_t = init.mle.omega_t;

  auto conditional = [&](const Eigen::VectorXd& eta_t, Eigen::VectorXd* gamma) -> double {
    try {
      const auto sb = posterior.spectral_at(eta_t);
      if (sb.degenerate()) return -std::numeric_limits<double>::infinity();
      ParameterState s = probe;
      s.eta_t = eta_t;
      s.gamma = field_to_gamma(sb, init.field, sb.model().sigma2);
      double log_det = 0.0;
      for (double e : sb.eigenvalues()) log_det += std::log(e);
      const double v = posterior.log_posterior_given_field(s, init.field) - 0.5 * log_det;
      if (gamma != nullptr) *gamma = std::move(s.gamma);
      return v;
    } catch (const NonPositiveDefinite&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  const int k = options.lattice_points;
  std::size_t total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= static_cast<std::size_t>(k);
  std::vector<Eigen::VectorXd> points;
  std::vector<double> values;
  Eigen::VectorXd lo(static_cast<Eigen::Index>(d));
  Eigen::VectorXd hi(static_cast<Eigen::Index>(d));
  for (std::size_t j = 0; j < d; ++j) {
    lo[static_cast<Eigen::Index>(j)] = eta_priors[j].mean - options.lattice_span_sd * eta_priors[j].sd;
    hi[static_cast<Eigen::Index>(j)] = eta_priors[j].mean + options.lattice_span_sd * eta_priors[j].sd;
  }
  Eigen::VectorXd best;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t flat = 0; flat < total; ++flat) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(d));
    std::size_t rest = flat;
    for (std::size_t j = 0; j < d; ++j) {
      const auto idx = static_cast<double>(rest % static_cast<std::size_t>(k));
      rest /= static_cast<std::size_t>(k);
      const auto jj = static_cast<Eigen::Index>(j);
      x[jj] = lo[jj] + (hi[jj] - lo[jj]) * idx / static_cast<double>(k - 1);
    }
    const double v = conditional(x, nullptr);
    if (!std::isfinite(v)) continue;
    points.push_back(x);
    values.push_back(v);
    if (v > best_value) {
      best_value = v;
      best = x;
    }
  }
  if (points.empty()) {
    // Report the prior-centre phi; spectral_at throws NonPositiveDefinite
    // with the remedy when that is where it fails.
    Eigen::VectorXd centre(static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) centre[static_cast<Eigen::Index>(j)] = eta_priors[j].mean;
    (void)posterior.spectral_at(centre);
    throw NumericalError("initialize: the posterior is not finite anywhere on the covariance-parameter lattice");
  }

  Eigen::VectorXd eta0;
  Eigen::MatrixXd sigma_eta;
  bool have_fit = false;
  if (points.size() >= static_cast<std::size_t>(1 + d + d * (d + 1) / 2)) {
    init.eta_fit = fit_quadratic_surface(points, values);
    have_fit = init.eta_fit.concave;
  }
  if (have_fit) {
    eta0 = init.eta_fit.maximizer.cwiseMax(lo).cwiseMin(hi);
    sigma_eta = (-init.eta_fit.hessian).inverse();
    sigma_eta = 0.5 * (sigma_eta + sigma_eta.transpose());
    if (!std::isfinite(conditional(eta0, nullptr))) eta0 = best;
  } else {
    warn("initialize: covariance-parameter surface is not concave; using the prior variance and the best lattice point");
    init.eta_fallback = true;
    eta0 = best;
    sigma_eta = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
    for (std::size_t j = 0; j < d; ++j) {
      sigma_eta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = eta_priors[j].sd * eta_priors[j].sd;
    }
  }

  // Preconditioners at (beta_hat, omega_hat, eta0, gamma_hat).
  ParameterState at = probe;
  at.eta_t = eta0;
  conditional(eta0, &at.gamma);
  const auto sb = posterior.spectral_at(eta0);
  const Eigen::VectorXd field = gamma_to_field(sb, at.gamma, sb.model().sigma2);

  const auto n_bo = static_cast<Eigen::Index>(posterior.beta_omega_dim());
  Eigen::MatrixXd hess(n_bo, n_bo);
  const Eigen::VectorXd bo = at.beta_omega();
  for (Eigen::Index j = 0; j < n_bo; ++j) {
    const double step = options.hessian_step * std::max(1.0, std::abs(bo[j]));
    ParameterState up = at;
    ParameterState down = at;
    Eigen::VectorXd b = bo;
    b[j] += step;
    up.set_beta_omega(b);
    b[j] = bo[j] - step;
    down.set_beta_omega(b);
    const auto eu = posterior.evaluate(up, true);
    const auto ed = posterior.evaluate(down, true);
    if (!eu.valid || !ed.valid) throw NumericalError("initialize: posterior not finite near the initial state");
    hess.col(j) = (eu.grad_beta_omega - ed.grad_beta_omega) / (2.0 * step);
  }

  const auto& data = posterior.data();
  const Eigen::VectorXd eta = posterior.linear_predictor(at, field);
  Eigen::VectorXd d2(static_cast<Eigen::Index>(data.size()));
  data.outcome->second_derivative({eta.data(), data.size()}, {at.omega_t.data(), static_cast<std::size_t>(at.omega_t.size())},
                                  {d2.data(), data.size()});
  const auto m = static_cast<Eigen::Index>(posterior.gamma_dim());
  Eigen::VectorXd cell_info = Eigen::VectorXd::Zero(m);
  for (std::size_t i = 0; i < data.size(); ++i) {
    cell_info[static_cast<Eigen::Index>(posterior.cell_index()[i])] += std::max(-d2[static_cast<Eigen::Index>(i)], 0.0);
  }
  Eigen::VectorXd sigma_latent(static_cast<Eigen::Index>(posterior.latent_dim()));
  sigma_latent.head(m) = (1.0 + sb.sqrt_squared_convolve(cell_info).array().max(0.0)).inverse().matrix();
  if (posterior.u_dim() > 0) {
    const double su = posterior.sigma_u_at(eta0);
    sigma_latent.tail(static_cast<Eigen::Index>(posterior.u_dim())) =
        (1.0 / (su * su) + (-d2.array()).max(0.0)).inverse().matrix();
  }

  init.scalings = ProposalScalings::for_target(posterior);
  init.scalings.set_sigma_bo(positive_definite_inverse(-hess, 1e-8));
  init.scalings.set_sigma_eta(sigma_eta);
  init.scalings.set_sigma_gamma(sigma_latent);

  init.state = posterior.zero_state();
  init.state.beta = init.mle.beta;
  init.state.omega_t = init.mle.omega_t;
  init.state.eta_t = eta0;
  return init;
}

}  // namespace gridsurv
