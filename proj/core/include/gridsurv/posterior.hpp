#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gridsurv/covariance.hpp"
#include "gridsurv/grid.hpp"
#include "gridsurv/outcome.hpp"
#include "gridsurv/spectral.hpp"
#include "gridsurv/target.hpp"

namespace gridsurv {

struct NormalPrior {
  double mean = 0.0;
  double sd = 1.0;

  double log_density(double x) const;
  double score(double x) const { return -(x - mean) / (sd * sd); }
};

// Priors on the transformed scale. Defaults mirror a diffuse setting:
// N(0, 10^2) for beta and log omega, N(0, 0.5^2) for log sigma.
struct Priors {
  std::vector<NormalPrior> beta;
  std::vector<NormalPrior> omega_t;
  NormalPrior log_sigma{0.0, 0.5};
  NormalPrior log_phi{0.0, 1.0};
  // iid frailties: either a fixed sigma_u, or a prior on log sigma_u (which
  // then becomes the third covariance parameter, sampled by random walk).
  std::optional<double> sigma_u;
  std::optional<NormalPrior> log_sigma_u;

  static Priors defaults(std::size_t beta_dim, std::size_t omega_dim, NormalPrior log_phi);
  void validate(std::size_t beta_dim, std::size_t omega_dim) const;
};

// Records, covariates and locations in a single ordering.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<Point> locations;
  Eigen::MatrixXd covariates;  // n x p
  std::vector<std::string> covariate_names;
  std::shared_ptr<const OutcomeModel> outcome;

  std::size_t size() const { return locations.size(); }

  static Dataset from_survival(std::vector<SurvivalRecord> records, std::vector<std::string> covariate_names,
                               std::optional<double> fixed_shape = std::nullopt);
  static Dataset from_counts(std::vector<CountRecord> records, std::vector<std::string> covariate_names);
};

struct PosteriorOptions {
  CovarianceKind kind = CovarianceKind::exponential;
  double nu = 1.0;
  bool iid_frailties = false;
  double pd_tolerance = kDefaultPdTolerance;
};

// Log posterior of (beta, omega_t, eta_t, gamma [, u]) for the grid model
//   eta_i = X_i beta + Y_c(i) [+ u_i],  Y = -sigma^2/2 + Sigma^{1/2} gamma,
// with gamma ~ N(0, I), eta_t = (log sigma, log phi [, log sigma_u]).
class SpatialPosterior final : public Target {
 public:
  SpatialPosterior(std::shared_ptr<const Dataset> data, Grid grid, Priors priors, PosteriorOptions options = {});

  std::size_t beta_dim() const override { return static_cast<std::size_t>(data_->covariates.cols()); }
  std::size_t omega_dim() const override { return data_->outcome->omega_dim(); }
  std::size_t eta_dim() const override { return priors_.log_sigma_u ? 3 : 2; }
  std::size_t gamma_dim() const override { return grid_.size(); }
  std::size_t u_dim() const override { return options_.iid_frailties ? data_->size() : 0; }

  // Returns valid = false instead of throwing on non positive definite or
  // non-finite states.
  Evaluation evaluate(const ParameterState& state, bool with_gradient = true) const override;

  // Throws NonPositiveDefinite when the covariance at eta_t is not PD and
  // NumericalError when the value is not finite. `field` receives Y.
  double log_posterior(const ParameterState& state, Eigen::VectorXd* field = nullptr) const;
  Eigen::VectorXd grad_beta_omega(const ParameterState& state) const;
  Eigen::VectorXd grad_gamma(const ParameterState& state) const;

  // The log posterior with the field Y supplied directly rather than from
  // gamma: log-likelihood at Y plus every prior term (including N(gamma; 0, I)).
  double log_posterior_given_field(const ParameterState& state, const Eigen::VectorXd& field) const;

  CovarianceModel covariance_at(const Eigen::VectorXd& eta_t) const;
  SpectralBase spectral_at(const Eigen::VectorXd& eta_t) const;
  double sigma_u_at(const Eigen::VectorXd& eta_t) const;

  // Linear predictor of every record for a given field.
  Eigen::VectorXd linear_predictor(const ParameterState& state, const Eigen::VectorXd& field) const;

  ParameterState zero_state() const;

  const Dataset& data() const { return *data_; }
  const Grid& grid() const { return grid_; }
  const Priors& priors() const { return priors_; }
  const PosteriorOptions& options() const { return options_; }
  const std::vector<std::size_t>& cell_index() const { return cell_index_; }

 private:
  void check_dims(const ParameterState& state) const;
  double log_prior(const ParameterState& state) const;
  Evaluation assemble(const ParameterState& state, const SpectralBase& sb, bool with_gradient) const;

  std::shared_ptr<const Dataset> data_;
  Grid grid_;
  LagTable lags_;
  Priors priors_;
  PosteriorOptions options_;
  std::vector<std::size_t> cell_index_;
};

}  // namespace gridsurv
