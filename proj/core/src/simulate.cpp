#include "gridsurv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "gridsurv/errors.hpp"

namespace gridsurv {

namespace {

struct Design {
  std::vector<Point> locations;
  Eigen::MatrixXd covariates;
  Eigen::VectorXd eta;
};

Design draw_design(std::size_t n, const Eigen::VectorXd& beta, const Eigen::VectorXd& field, const Grid& grid,
                   Rng& rng) {
  if (field.size() != static_cast<Eigen::Index>(grid.size())) throw ValidationError("simulate: field length != grid size");
  if (!beta.allFinite()) throw ValidationError("simulate: beta must be finite");
  const auto& box = grid.bbox();
  Design d;
  d.locations.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = box.xmin + box.width() * rng.uniform();
    const double y = box.ymin + box.height() * rng.uniform();
    d.locations.push_back({x, y});
  }
  d.covariates.resize(static_cast<Eigen::Index>(n), beta.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < beta.size(); ++j) d.covariates(static_cast<Eigen::Index>(i), j) = rng.normal();
  }
  d.eta = d.covariates * beta;
  for (std::size_t i = 0; i < n; ++i) d.eta[static_cast<Eigen::Index>(i)] += field[static_cast<Eigen::Index>(grid.cell_of(d.locations[i]))];
  return d;
}

std::vector<double> row(const Eigen::MatrixXd& m, std::size_t i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(static_cast<Eigen::Index>(i), j);
  return out;
}

}  // namespace

SimulatedField simulate_field(const SpectralBase& sb, Rng& rng) {
  SimulatedField out;
  out.gamma = rng.normal_vector(static_cast<Eigen::Index>(sb.size()));
  out.field = gamma_to_field(sb, out.gamma, sb.model().sigma2);
  return out;
}

SimulatedField simulate_field(const Grid& grid, const CovarianceModel& model, std::uint64_t seed,
                              double pd_tolerance) {
  Rng rng(seed);
  return simulate_field(build_spectral(grid, model, pd_tolerance), rng);
}

void CensoringScheme::validate() const {
  if (!(left_rate >= 0.0 && left_rate <= 1.0)) throw ValidationError("censoring: left_rate must lie in [0, 1]");
  if (!(interval_rate >= 0.0 && interval_rate <= 1.0)) {
    throw ValidationError("censoring: interval_rate must lie in [0, 1]");
  }
  if (left_rate + interval_rate > 1.0) throw ValidationError("censoring: left_rate + interval_rate must be <= 1");
  if (admin_time && !(*admin_time > 0.0)) throw ValidationError("censoring: admin_time must be > 0");
  if (left_rate > 0.0 && !(inspection_max > 0.0)) throw ValidationError("censoring: inspection_max must be > 0");
  if (interval_rate > 0.0 && !(inspection_width > 0.0)) {
    throw ValidationError("censoring: inspection_width must be > 0");
  }
}

std::vector<SurvivalRecord> simulate_survival(std::size_t n, const Eigen::VectorXd& beta,
                                              const WeibullBaseline& baseline, const Eigen::VectorXd& field,
                                              const Grid& grid, const CensoringScheme& scheme, std::uint64_t seed) {
  scheme.validate();
  if (!(baseline.alpha > 0.0) || !(baseline.lambda > 0.0)) throw ValidationError("simulate: alpha, lambda must be > 0");
  Rng rng(seed);
  const auto design = draw_design(n, beta, field, grid, rng);
  const double admin = scheme.admin_time.value_or(std::numeric_limits<double>::infinity());
  const double tiny = std::numeric_limits<double>::min();

  std::vector<SurvivalRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double eta = design.eta[static_cast<Eigen::Index>(i)];
    const double e = -std::log(rng.uniform()) / (std::exp(eta) * baseline.lambda);
    const double t = std::max(std::pow(e, 1.0 / baseline.alpha), tiny);
    const double plan = rng.uniform();

    SurvivalRecord r;
    r.id = "r" + std::to_string(i + 1);
    r.covariates = row(design.covariates, i);
    r.location = design.locations[i];
    if (plan < scheme.left_rate) {
      const double c = std::min(scheme.inspection_max * rng.uniform(), admin);
      r.censoring = t <= c ? Censoring::left : Censoring::right;
      r.time = c;
    } else if (plan < scheme.left_rate + scheme.interval_rate) {
      const double offset = scheme.inspection_width * rng.uniform();
      if (t > admin) {
        r.censoring = Censoring::right;
        r.time = admin;
      } else if (t <= offset) {
        r.censoring = Censoring::left;
        r.time = offset;
      } else {
        const double k = std::floor((t - offset) / scheme.inspection_width);
        const double lo = offset + k * scheme.inspection_width;
        const double hi = lo + scheme.inspection_width;
        if (hi > admin) {
          r.censoring = Censoring::right;
          r.time = lo;
        } else {
          r.censoring = Censoring::interval;
          r.time = lo;
          r.time_hi = hi;
        }
      }
    } else if (t > admin) {
      r.censoring = Censoring::right;
      r.time = admin;
    } else {
      r.censoring = Censoring::uncensored;
      r.time = t;
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CountRecord> simulate_poisson(std::size_t n, const Eigen::VectorXd& beta, const Eigen::VectorXd& field,
                                          const Grid& grid, std::uint64_t seed) {
  Rng rng(seed);
  const auto design = draw_design(n, beta, field, grid, rng);
  std::vector<CountRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double rate = std::exp(design.eta[static_cast<Eigen::Index>(i)]);
    CountRecord r;
    r.id = "r" + std::to_string(i + 1);
    r.covariates = row(design.covariates, i);
    r.location = design.locations[i];
    if (rate > 0.0) {
      if (!std::isfinite(rate)) throw NumericalError("simulate_poisson: rate overflow");
      std::poisson_distribution<std::int64_t> pois(rate);
      r.count = pois(rng.engine());
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gridsurv
