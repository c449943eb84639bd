#include "gridsurv/dense_oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "gridsurv/errors.hpp"
#include "gridsurv/mcmc.hpp"
#include "gridsurv/simulate.hpp"

namespace gridsurv {

namespace {

constexpr double kHalfLog2Pi = 0.91893853320467274178;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 == 1 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::shared_ptr<const Dataset> bench_dataset(std::size_t n, const Grid& grid, std::uint64_t seed) {
  const Eigen::VectorXd beta = Eigen::VectorXd::Constant(2, 0.2);
  const Eigen::VectorXd field = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.size()));
  CensoringScheme scheme;
  scheme.admin_time = 50.0;
  auto records = simulate_survival(n, beta, {1.0, 0.02}, field, grid, scheme, seed);
  return std::make_shared<const Dataset>(Dataset::from_survival(std::move(records), {"x1", "x2"}));
}

Grid unit_grid(int m1, int m2, double ext_factor) {
  const std::vector<Point> corners{{0.0, 0.0}, {1.0, 1.0}};
  return Grid::build(corners, m1, m2, ext_factor);
}

double time_chain(const Target& target, ParameterState init, std::size_t iterations, const BenchmarkConfig& config) {
  ChainConfig cc;
  cc.n_iterations = iterations;
  cc.burnin = 0;
  cc.thin = iterations;
  cc.seed = config.seed;
  cc.workers = config.workers;
  auto scalings = ProposalScalings::for_target(target);
  scalings.h = 0.1;
  std::vector<double> times;
  for (std::size_t r = 0; r < config.repetitions; ++r) {
    const auto start = std::chrono::steady_clock::now();
    const auto out = run_chain(target, cc, init, scalings);
    const auto stop = std::chrono::steady_clock::now();
    if (out.samples.size() != 1) throw NumericalError("benchmark: unexpected chain length");
    times.push_back(std::chrono::duration<double>(stop - start).count());
  }
  return median(times) * 1000.0 / static_cast<double>(iterations);
}

}  // namespace

Eigen::MatrixXd dense_cov(const Grid& grid, const CovarianceModel& model, std::size_t max_cells) {
  const std::size_t m = grid.size();
  if (m > max_cells) {
    throw ValidationError("dense_cov: " + std::to_string(m) + " cells exceeds the dense limit of " +
                          std::to_string(max_cells));
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a; b < m; ++b) {
      const double v = cov_value_unchecked(model, grid.toroidal_distance(a, b));
      out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = v;
      out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = v;
    }
  }
  return out;
}

Eigen::MatrixXd dense_point_cov(const std::vector<Point>& points, const CovarianceModel& model) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    out(a, a) = model.sigma2;
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const auto& p = points[static_cast<std::size_t>(a)];
      const auto& q = points[static_cast<std::size_t>(b)];
      const double v = cov_value_unchecked(model, std::hypot(p.x - q.x, p.y - q.y));
      out(a, b) = v;
      out(b, a) = v;
    }
  }
  return out;
}

Eigen::MatrixXd dense_sqrt(const Eigen::MatrixXd& sigma, double sigma2, double phi, double pd_tolerance) {
  if (sigma.size() == 0) return sigma;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (es.info() != Eigen::Success) throw NumericalError("dense_sqrt: eigendecomposition failed");
  const double min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig > pd_tolerance * sigma2)) throw NonPositiveDefinite(min_eig, phi, pd_tolerance * sigma2);
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double dense_posterior(const SpatialPosterior& posterior, const ParameterState& state) {
  const auto model = posterior.covariance_at(state.eta_t);
  const Eigen::MatrixXd root =
      dense_sqrt(dense_cov(posterior.grid(), model), model.sigma2, model.phi, posterior.options().pd_tolerance);
  const Eigen::VectorXd field = Eigen::VectorXd::Constant(state.gamma.size(), -0.5 * model.sigma2) + root * state.gamma;
  return posterior.log_posterior_given_field(state, field);
}

StandardPosterior::StandardPosterior(std::shared_ptr<const Dataset> data, Priors priors, PosteriorOptions options,
                                     DenseFactor factor)
    : data_(std::move(data)), priors_(std::move(priors)), options_(options), factor_(factor) {
  if (!data_ || !data_->outcome) throw ValidationError("standard posterior: dataset has no outcome model");
  priors_.validate(beta_dim(), omega_dim());
}

ParameterState StandardPosterior::zero_state() const {
  ParameterState s;
  s.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(beta_dim()));
  const auto omega = data_->outcome->default_omega();
  s.omega_t = Eigen::Map<const Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(omega.size()));
  s.eta_t = Eigen::Vector2d(priors_.log_sigma.mean, priors_.log_phi.mean);
  s.gamma = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(gamma_dim()));
  return s;
}

Evaluation StandardPosterior::evaluate(const ParameterState& s, bool with_gradient) const {
  if (!s.all_finite()) return Evaluation{};
  const CovarianceModel model{options_.kind, std::exp(2.0 * s.eta_t[0]), std::exp(s.eta_t[1]), options_.nu};
  const Eigen::MatrixXd sigma = dense_point_cov(data_->locations, model);
  Eigen::MatrixXd root;
  try {
    if (factor_ == DenseFactor::eigen) {
      root = dense_sqrt(sigma, model.sigma2, model.phi, options_.pd_tolerance);
    } else {
      Eigen::LLT<Eigen::MatrixXd> llt(sigma);
      if (llt.info() != Eigen::Success) return Evaluation{};
      root = llt.matrixL();
    }
  } catch (const NonPositiveDefinite&) {
    return Evaluation{};
  }

  Evaluation ev;
  ev.field = Eigen::VectorXd::Constant(s.gamma.size(), -0.5 * model.sigma2) + root * s.gamma;
  const Eigen::VectorXd eta = data_->covariates * s.beta + ev.field;
  const std::size_t n = data_->size();
  Eigen::VectorXd deta = with_gradient ? Eigen::VectorXd(static_cast<Eigen::Index>(n)) : Eigen::VectorXd();
  Eigen::VectorXd domega = with_gradient ? Eigen::VectorXd(static_cast<Eigen::Index>(omega_dim())) : Eigen::VectorXd();
  double lp = data_->outcome->evaluate({eta.data(), n}, {s.omega_t.data(), omega_dim()},
                                       {deta.data(), static_cast<std::size_t>(deta.size())},
                                       {domega.data(), static_cast<std::size_t>(domega.size())});
  for (Eigen::Index j = 0; j < s.beta.size(); ++j) lp += priors_.beta[static_cast<std::size_t>(j)].log_density(s.beta[j]);
  for (Eigen::Index j = 0; j < s.omega_t.size(); ++j) {
    lp += priors_.omega_t[static_cast<std::size_t>(j)].log_density(s.omega_t[j]);
  }
  lp += priors_.log_sigma.log_density(s.eta_t[0]) + priors_.log_phi.log_density(s.eta_t[1]);
  lp += -0.5 * s.gamma.squaredNorm() - static_cast<double>(s.gamma.size()) * kHalfLog2Pi;
  ev.log_post = lp;
  ev.valid = std::isfinite(lp);
  if (!ev.valid || !with_gradient) return ev;

  const auto p = s.beta.size();
  ev.grad_beta_omega.resize(p + s.omega_t.size());
  ev.grad_beta_omega.head(p) = data_->covariates.transpose() * deta;
  for (Eigen::Index j = 0; j < p; ++j) ev.grad_beta_omega[j] += priors_.beta[static_cast<std::size_t>(j)].score(s.beta[j]);
  for (Eigen::Index j = 0; j < s.omega_t.size(); ++j) {
    ev.grad_beta_omega[p + j] = domega[j] + priors_.omega_t[static_cast<std::size_t>(j)].score(s.omega_t[j]);
  }
  ev.grad_latent = root.transpose() * deta - s.gamma;
  ev.valid = ev.grad_beta_omega.allFinite() && ev.grad_latent.allFinite();
  return ev;
}

void BenchmarkConfig::validate() const {
  if (iterations == 0 || dense_iterations == 0) throw ValidationError("benchmark: iterations must be > 0");
  if (repetitions == 0) throw ValidationError("benchmark: repetitions must be > 0");
  if (workers == 0) throw ValidationError("benchmark: workers must be >= 1");
  for (auto n : dense_sizes) {
    if (n == 0) throw ValidationError("benchmark: sizes must be > 0");
  }
  for (auto n : fourier_sizes) {
    if (n == 0) throw ValidationError("benchmark: sizes must be > 0");
  }
}

double time_dense(std::size_t n, const BenchmarkConfig& config, std::size_t iterations) {
  const Grid grid = unit_grid(1, 1, 2.0);
  const auto data = bench_dataset(n, grid, config.seed + n);
  auto priors = Priors::defaults(2, data->outcome->omega_dim(), NormalPrior{std::log(0.25), 0.5});
  const StandardPosterior target(data, priors, {}, config.factor);
  auto init = target.zero_state();
  const auto omega = data->outcome->default_omega();
  init.omega_t = Eigen::Map<const Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(omega.size()));
  return time_chain(target, init, iterations, config);
}

double time_fourier(std::size_t n, std::pair<int, int> g, const BenchmarkConfig& config, std::size_t iterations) {
  const Grid grid = unit_grid(g.first, g.second, config.ext_factor);
  const auto data = bench_dataset(n, grid, config.seed + n);
  auto priors = Priors::defaults(2, data->outcome->omega_dim(), NormalPrior{std::log(0.25), 0.5});
  const SpatialPosterior target(data, grid, priors);
  auto init = target.zero_state();
  const auto omega = data->outcome->default_omega();
  init.omega_t = Eigen::Map<const Eigen::VectorXd>(omega.data(), static_cast<Eigen::Index>(omega.size()));
  return time_chain(target, init, iterations, config);
}

std::vector<TimingRow> benchmark(const BenchmarkConfig& config) {
  config.validate();
  std::vector<TimingRow> rows;
  for (auto n : config.dense_sizes) {
    const std::size_t iters = n > config.dense_short_above ? config.dense_iterations : config.iterations;
    rows.push_back({"dense", n, "-", time_dense(n, config, iters)});
  }
  for (const auto& g : config.grids) {
    const std::string name = std::to_string(1 << g.first) + "x" + std::to_string(1 << g.second);
    for (auto n : config.fourier_sizes) rows.push_back({"fourier", n, name, time_fourier(n, g, config, config.iterations)});
  }
  return rows;
}

}  // namespace gridsurv
