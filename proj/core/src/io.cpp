#include "gridsurv/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridsurv/errors.hpp"
#include "gridsurv/log.hpp"

namespace gridsurv {

namespace {

using json = nlohmann::json;

std::string describe(std::size_t row, const std::string& column, const std::string& message) {
  std::string out = "row " + std::to_string(row);
  if (!column.empty()) out += ", column '" + column + "'";
  return out + ": " + message;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field.push_back(c);
    }
  }
  out.push_back(field);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct Table {
  std::vector<std::string> header;
  std::map<std::string, std::size_t> column;
  std::vector<std::vector<std::string>> rows;  // row r is file row r + 2
};

Table read_table(std::istream& in) {
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "", "missing header");
  for (auto& h : split(line)) {
    h = trim(h);
    if (h.empty()) throw CsvError(1, "", "empty column name in header");
    if (t.column.count(h) != 0) throw CsvError(1, h, "duplicate column");
    t.column[h] = t.header.size();
    t.header.push_back(h);
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw CsvError(row, "", "expected " + std::to_string(t.header.size()) + " fields, found " +
                                  std::to_string(fields.size()));
    }
    for (auto& f : fields) f = trim(f);
    t.rows.push_back(std::move(fields));
  }
  return t;
}

class RowReader {
 public:
  RowReader(const Table& t, std::size_t index) : t_(t), fields_(t.rows[index]), row_(index + 2) {}

  std::size_t row() const { return row_; }
  bool blank(const std::string& name) const { return field(name).empty(); }
  const std::string& field(const std::string& name) const { return fields_[t_.column.at(name)]; }

  double number(const std::string& name) const {
    const auto& s = field(name);
    if (s.empty()) throw CsvError(row_, name, "missing value");
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw CsvError(row_, name, "'" + s + "' is not a number");
    }
    if (!std::isfinite(v)) throw CsvError(row_, name, "value must be finite");
    return v;
  }

  std::int64_t integer(const std::string& name) const {
    const auto& s = field(name);
    if (s.empty()) throw CsvError(row_, name, "missing value");
    std::int64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
      throw CsvError(row_, name, "'" + s + "' is not an integer");
    }
    return v;
  }

 private:
  const Table& t_;
  const std::vector<std::string>& fields_;
  std::size_t row_;
};

void require_columns(const Table& t, const std::vector<std::string>& names) {
  for (const auto& n : names) {
    if (t.column.count(n) == 0) throw CsvError(1, n, "required column is missing");
  }
}

std::vector<std::string> trailing_columns(const Table& t, std::size_t first) {
  return {t.header.begin() + static_cast<std::ptrdiff_t>(first), t.header.end()};
}

void check_id(const std::string& id) {
  if (id.find_first_of(",\n\r\"") != std::string::npos) throw ValidationError("id '" + id + "' contains a delimiter");
}

void write_header(std::ostream& out, std::vector<std::string> cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

// JSON helpers with key-addressed errors.
template <class T>
T value_at(const json& j, const std::string& key, const std::string& path, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: '" + path + key + "' has the wrong type");
  }
}

NormalPrior prior_at(const json& j, const std::string& path) {
  if (!j.is_object()) throw ValidationError("config: '" + path + "' must be an object {mean, sd}");
  NormalPrior p;
  p.mean = value_at<double>(j, "mean", path + ".", 0.0);
  p.sd = value_at<double>(j, "sd", path + ".", 1.0);
  if (!(p.sd > 0.0)) throw ValidationError("config: '" + path + ".sd' must be > 0");
  return p;
}

std::vector<NormalPrior> prior_list_at(const json& j, const std::string& path) {
  std::vector<NormalPrior> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(prior_at(j[i], path + "[" + std::to_string(i) + "]"));
  } else {
    out.push_back(prior_at(j, path));
  }
  return out;
}

std::vector<NormalPrior> broadcast(const std::vector<NormalPrior>& p, std::size_t n, const char* what) {
  if (p.size() == n) return p;
  if (p.size() == 1) return std::vector<NormalPrior>(n, p.front());
  throw ValidationError(std::string("config: ") + what + " priors: expected 1 or " + std::to_string(n) + " entries");
}

const json& section(const json& root, const std::string& key) {
  static const json empty = json::object();
  if (!root.contains(key)) return empty;
  const auto& s = root.at(key);
  if (!s.is_object()) throw ValidationError("config: '" + key + "' must be an object");
  return s;
}

}  // namespace

CsvError::CsvError(std::size_t row, std::string column, const std::string& message)
    : ValidationError(describe(row, column, message)), row_(row), column_(std::move(column)) {}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_survival_csv(std::ostream& out, const SurvivalTable& table) {
  std::vector<std::string> cols{"id", "event", "time", "time_lo", "time_hi", "x", "y"};
  cols.insert(cols.end(), table.covariate_names.begin(), table.covariate_names.end());
  write_header(out, cols);
  for (const auto& r : table.records) {
    check_id(r.id);
    if (r.covariates.size() != table.covariate_names.size()) throw ValidationError("record '" + r.id + "': covariate count");
    out << r.id << ',' << static_cast<int>(r.censoring) << ',';
    if (r.censoring == Censoring::interval) {
      out << ',' << format_double(r.time) << ',' << format_double(r.time_hi);
    } else {
      out << format_double(r.time) << ",,";
    }
    out << ',' << format_double(r.location.x) << ',' << format_double(r.location.y);
    for (double x : r.covariates) out << ',' << format_double(x);
    out << '\n';
  }
}

SurvivalTable read_survival_csv(std::istream& in) {
  const Table t = read_table(in);
  const std::vector<std::string> fixed{"id", "event", "time", "time_lo", "time_hi", "x", "y"};
  require_columns(t, fixed);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (t.header[i] != fixed[i]) throw CsvError(1, t.header[i], "expected column '" + fixed[i] + "' here");
  }
  SurvivalTable out;
  out.covariate_names = trailing_columns(t, fixed.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const RowReader r(t, i);
    SurvivalRecord rec;
    rec.id = r.field("id");
    if (rec.id.empty()) throw CsvError(r.row(), "id", "missing value");
    if (!seen.insert(rec.id).second) throw CsvError(r.row(), "id", "duplicate id '" + rec.id + "'");
    const auto code = r.integer("event");
    try {
      rec.censoring = censoring_from_code(static_cast<int>(code));
    } catch (const ValidationError& e) {
      throw CsvError(r.row(), "event", e.what());
    }
    if (rec.censoring == Censoring::interval) {
      rec.time = r.number("time_lo");
      rec.time_hi = r.number("time_hi");
    } else {
      rec.time = r.number("time");
    }
    rec.location = {r.number("x"), r.number("y")};
    for (const auto& c : out.covariate_names) rec.covariates.push_back(r.number(c));
    try {
      rec.validate();
    } catch (const ValidationError& e) {
      throw CsvError(r.row(), rec.censoring == Censoring::interval ? "time_hi" : "time", e.what());
    }
    out.records.push_back(std::move(rec));
  }
  return out;
}

void write_count_csv(std::ostream& out, const CountTable& table) {
  std::vector<std::string> cols{"id", "count", "x", "y"};
  cols.insert(cols.end(), table.covariate_names.begin(), table.covariate_names.end());
  write_header(out, cols);
  for (const auto& r : table.records) {
    check_id(r.id);
    out << r.id << ',' << r.count << ',' << format_double(r.location.x) << ',' << format_double(r.location.y);
    for (double x : r.covariates) out << ',' << format_double(x);
    out << '\n';
  }
}

CountTable read_count_csv(std::istream& in) {
  const Table t = read_table(in);
  const std::vector<std::string> fixed{"id", "count", "x", "y"};
  require_columns(t, fixed);
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    if (t.header[i] != fixed[i]) throw CsvError(1, t.header[i], "expected column '" + fixed[i] + "' here");
  }
  CountTable out;
  out.covariate_names = trailing_columns(t, fixed.size());
  std::set<std::string> seen;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const RowReader r(t, i);
    CountRecord rec;
    rec.id = r.field("id");
    if (rec.id.empty()) throw CsvError(r.row(), "id", "missing value");
    if (!seen.insert(rec.id).second) throw CsvError(r.row(), "id", "duplicate id '" + rec.id + "'");
    rec.count = r.integer("count");
    if (rec.count < 0) throw CsvError(r.row(), "count", "must be >= 0");
    rec.location = {r.number("x"), r.number("y")};
    for (const auto& c : out.covariate_names) rec.covariates.push_back(r.number(c));
    out.records.push_back(std::move(rec));
  }
  return out;
}

std::string detect_data_kind(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw CsvError(1, "", "missing header");
  const auto cols = split(line);
  if (cols.size() > 1 && trim(cols[1]) == "event") return "survival";
  if (cols.size() > 1 && trim(cols[1]) == "count") return "poisson";
  throw CsvError(1, cols.size() > 1 ? trim(cols[1]) : "", "second column must be 'event' or 'count'");
}

std::vector<std::string> parameter_names(const std::vector<std::string>& covariate_names,
                                         const std::vector<std::string>& omega_names, std::size_t eta_dim) {
  std::vector<std::string> out;
  for (const auto& c : covariate_names) out.push_back("beta_" + c);
  out.insert(out.end(), omega_names.begin(), omega_names.end());
  out.push_back("log_sigma");
  out.push_back("log_phi");
  if (eta_dim == 3) out.push_back("log_sigma_u");
  return out;
}

void write_samples_csv(std::ostream& out, const ChainOutput& chain, const std::vector<std::string>& names) {
  std::vector<std::string> cols{"iter", "log_post"};
  cols.insert(cols.end(), names.begin(), names.end());
  const Eigen::Index m = chain.samples.empty() ? 0 : chain.samples.front().field.size();
  for (Eigen::Index c = 0; c < m; ++c) cols.push_back("Y_" + std::to_string(c));
  write_header(out, cols);
  for (const auto& s : chain.samples) {
    if (static_cast<std::size_t>(s.beta.size() + s.omega_t.size() + s.eta_t.size()) != names.size()) {
      throw ValidationError("write_samples_csv: parameter names do not match the samples");
    }
    out << s.iteration << ',' << format_double(s.log_post);
    for (Eigen::Index j = 0; j < s.beta.size(); ++j) out << ',' << format_double(s.beta[j]);
    for (Eigen::Index j = 0; j < s.omega_t.size(); ++j) out << ',' << format_double(s.omega_t[j]);
    for (Eigen::Index j = 0; j < s.eta_t.size(); ++j) out << ',' << format_double(s.eta_t[j]);
    for (Eigen::Index j = 0; j < s.field.size(); ++j) out << ',' << format_double(s.field[j]);
    out << '\n';
  }
}

SamplesTable read_samples_csv(std::istream& in) {
  const Table t = read_table(in);
  require_columns(t, {"iter", "log_post", "log_sigma", "log_phi"});
  SamplesTable out;
  std::vector<std::string> beta_cols;
  std::vector<std::string> field_cols;
  for (const auto& h : t.header) {
    if (h == "iter" || h == "log_post") continue;
    if (h.rfind("beta_", 0) == 0) {
      beta_cols.push_back(h);
      out.beta_names.push_back(h.substr(5));
    } else if (h == "log_alpha" || h == "log_lambda") {
      out.omega_names.push_back(h);
    } else if (h == "log_sigma" || h == "log_phi" || h == "log_sigma_u") {
      out.eta_names.push_back(h);
    } else if (h.rfind("Y_", 0) == 0) {
      if (h != "Y_" + std::to_string(field_cols.size())) throw CsvError(1, h, "field columns must be Y_0, Y_1, ...");
      field_cols.push_back(h);
    } else {
      throw CsvError(1, h, "unrecognized column");
    }
  }
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const RowReader r(t, i);
    Sample s;
    const auto iter = r.integer("iter");
    if (iter < 0) throw CsvError(r.row(), "iter", "must be >= 0");
    s.iteration = static_cast<std::size_t>(iter);
    s.log_post = r.number("log_post");
    s.beta.resize(static_cast<Eigen::Index>(beta_cols.size()));
    for (std::size_t j = 0; j < beta_cols.size(); ++j) s.beta[static_cast<Eigen::Index>(j)] = r.number(beta_cols[j]);
    s.omega_t.resize(static_cast<Eigen::Index>(out.omega_names.size()));
    for (std::size_t j = 0; j < out.omega_names.size(); ++j) {
      s.omega_t[static_cast<Eigen::Index>(j)] = r.number(out.omega_names[j]);
    }
    s.eta_t.resize(static_cast<Eigen::Index>(out.eta_names.size()));
    for (std::size_t j = 0; j < out.eta_names.size(); ++j) s.eta_t[static_cast<Eigen::Index>(j)] = r.number(out.eta_names[j]);
    s.field.resize(static_cast<Eigen::Index>(field_cols.size()));
    for (std::size_t j = 0; j < field_cols.size(); ++j) s.field[static_cast<Eigen::Index>(j)] = r.number(field_cols[j]);
    out.chain.samples.push_back(std::move(s));
  }
  return out;
}

void write_cells_csv(std::ostream& out, const Grid& grid) {
  write_header(out, {"cell", "row", "col", "x", "y", "in_window"});
  for (std::size_t c = 0; c < grid.size(); ++c) {
    const auto p = grid.centroid(c);
    out << c << ',' << grid.row(c) << ',' << grid.col(c) << ',' << format_double(p.x) << ',' << format_double(p.y)
        << ',' << (grid.in_window(c) ? 1 : 0) << '\n';
  }
}

void write_field_summary_csv(std::ostream& out, const FieldSummary& s, const Grid& grid) {
  std::vector<std::string> cols{"cell", "row", "col", "x", "y", "mean_exp"};
  for (double p : s.probabilities) cols.push_back("q" + format_double(p));
  for (double c : s.thresholds) cols.push_back("exceed_" + format_double(c));
  write_header(out, cols);
  for (std::size_t r = 0; r < s.cells.size(); ++r) {
    const auto c = s.cells[r];
    const auto p = grid.centroid(c);
    const auto rr = static_cast<Eigen::Index>(r);
    out << c << ',' << grid.row(c) << ',' << grid.col(c) << ',' << format_double(p.x) << ',' << format_double(p.y)
        << ',' << format_double(s.mean_exp[rr]);
    for (Eigen::Index k = 0; k < s.quantiles.cols(); ++k) out << ',' << format_double(s.quantiles(rr, k));
    for (Eigen::Index k = 0; k < s.exceedance.cols(); ++k) out << ',' << format_double(s.exceedance(rr, k));
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, const CurveSummary& curve, const std::string& abscissa) {
  write_header(out, {abscissa, "lower", "median", "upper"});
  for (std::size_t i = 0; i < curve.abscissae.size(); ++i) {
    out << format_double(curve.abscissae[i]) << ',' << format_double(curve.lower[i]) << ','
        << format_double(curve.median[i]) << ',' << format_double(curve.upper[i]) << '\n';
  }
}

void write_trace_csv(std::ostream& out, const ChainOutput& chain) {
  write_header(out, {"iter", "log_post", "acceptance", "h"});
  for (std::size_t i = 0; i < chain.samples.size(); ++i) {
    out << chain.samples[i].iteration << ',' << format_double(chain.samples[i].log_post) << ','
        << format_double(i < chain.acceptance_trace.size() ? chain.acceptance_trace[i] : std::nan("")) << ','
        << format_double(i < chain.h_trace.size() ? chain.h_trace[i] : std::nan("")) << '\n';
  }
}

void write_timing_csv(std::ostream& out, const std::vector<TimingRow>& rows) {
  write_header(out, {"method", "n", "grid", "seconds_per_1000_iter"});
  for (const auto& r : rows) out << r.method << ',' << r.n << ',' << r.grid << ',' << format_double(r.seconds_per_1000_iter) << '\n';
}

Priors RunConfig::priors(std::size_t beta_dim, std::size_t omega_dim) const {
  Priors p;
  p.beta = broadcast(beta_priors, beta_dim, "beta");
  p.omega_t = broadcast(omega_priors, omega_dim, "baseline");
  p.log_sigma = log_sigma;
  p.log_phi = log_phi;
  p.sigma_u = sigma_u;
  p.log_sigma_u = log_sigma_u;
  return p;
}

Grid RunConfig::simulation_grid() const {
  const std::vector<Point> corners{{sim_bbox.xmin, sim_bbox.ymin}, {sim_bbox.xmax, sim_bbox.ymax}};
  return Grid::build(corners, m1, m2, ext_factor, sim_bbox);
}

RunConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ValidationError("config: the document must be a JSON object");
  static const std::set<std::string> known{"outcome", "grid",      "covariance", "priors",   "baseline", "frailties",
                                           "mcmc",    "prediction", "simulate",  "benchmark", "output_dir"};
  for (const auto& [key, _] : root.items()) {
    if (known.count(key) == 0) throw ValidationError("config: unknown section '" + key + "'");
  }

  RunConfig c;
  c.outcome = value_at<std::string>(root, "outcome", "", c.outcome);
  if (c.outcome != "survival" && c.outcome != "poisson") {
    throw ValidationError("config: 'outcome' must be \"survival\" or \"poisson\"");
  }
  c.output_dir = value_at<std::string>(root, "output_dir", "", c.output_dir);

  const auto& g = section(root, "grid");
  c.m1 = value_at<int>(g, "m1", "grid.", c.m1);
  c.m2 = value_at<int>(g, "m2", "grid.", c.m2);
  c.ext_factor = value_at<double>(g, "ext_factor", "grid.", c.ext_factor);
  if (g.contains("window")) {
    const auto w = value_at<std::vector<double>>(g, "window", "grid.", {});
    if (w.size() != 4) throw ValidationError("config: 'grid.window' must be [xmin, ymin, xmax, ymax]");
    c.window = BoundingBox{w[0], w[1], w[2], w[3]};
  }

  const auto& cov = section(root, "covariance");
  c.posterior.kind = parse_covariance_kind(value_at<std::string>(cov, "kind", "covariance.", "exponential"));
  c.posterior.nu = value_at<double>(cov, "nu", "covariance.", c.posterior.nu);
  c.posterior.pd_tolerance = value_at<double>(cov, "pd_tolerance", "covariance.", c.posterior.pd_tolerance);
  if (!(c.posterior.nu > 0.0)) throw ValidationError("config: 'covariance.nu' must be > 0");

  const auto& base = section(root, "baseline");
  const auto family = value_at<std::string>(base, "family", "baseline.", "weibull");
  if (family != "weibull") throw ValidationError("config: 'baseline.family' must be \"weibull\"");
  if (base.contains("fixed_shape") && !base.at("fixed_shape").is_null()) {
    c.fixed_shape = value_at<double>(base, "fixed_shape", "baseline.", 1.0);
    if (!(*c.fixed_shape > 0.0)) throw ValidationError("config: 'baseline.fixed_shape' must be > 0");
  }

  const auto& pr = section(root, "priors");
  if (pr.contains("beta")) c.beta_priors = prior_list_at(pr.at("beta"), "priors.beta");
  if (pr.contains("omega")) c.omega_priors = prior_list_at(pr.at("omega"), "priors.omega");
  if (pr.contains("log_sigma")) c.log_sigma = prior_at(pr.at("log_sigma"), "priors.log_sigma");
  if (pr.contains("log_phi")) c.log_phi = prior_at(pr.at("log_phi"), "priors.log_phi");
  if (pr.contains("sigma_u")) c.sigma_u = value_at<double>(pr, "sigma_u", "priors.", 1.0);
  if (pr.contains("log_sigma_u")) c.log_sigma_u = prior_at(pr.at("log_sigma_u"), "priors.log_sigma_u");

  const auto& fr = section(root, "frailties");
  c.posterior.iid_frailties = value_at<bool>(fr, "iid", "frailties.", false);

  const auto& mc = section(root, "mcmc");
  c.mcmc.n_iterations = value_at<std::size_t>(mc, "iterations", "mcmc.", c.mcmc.n_iterations);
  c.mcmc.burnin = value_at<std::size_t>(mc, "burnin", "mcmc.", c.mcmc.burnin);
  c.mcmc.thin = value_at<std::size_t>(mc, "thin", "mcmc.", c.mcmc.thin);
  c.mcmc.seed = value_at<std::uint64_t>(mc, "seed", "mcmc.", c.mcmc.seed);
  c.mcmc.workers = value_at<std::size_t>(mc, "workers", "mcmc.", c.mcmc.workers);
  c.mcmc.adaptation.continue_after_burnin =
      value_at<bool>(mc, "adapt_after_burnin", "mcmc.", c.mcmc.adaptation.continue_after_burnin);
  c.mcmc.adaptation.exponent = value_at<double>(mc, "adaptation_exponent", "mcmc.", c.mcmc.adaptation.exponent);
  c.mcmc.validate();

  const auto& pd = section(root, "prediction");
  c.thresholds = value_at<std::vector<double>>(pd, "thresholds", "prediction.", c.thresholds);
  c.times = value_at<std::vector<double>>(pd, "times", "prediction.", c.times);
  c.distances = value_at<std::vector<double>>(pd, "distances", "prediction.", c.distances);
  c.full_grid = value_at<bool>(pd, "full_grid", "prediction.", c.full_grid);

  const auto& sim = section(root, "simulate");
  c.sim_n = value_at<std::size_t>(sim, "n", "simulate.", c.sim_n);
  c.sim_seed = value_at<std::uint64_t>(sim, "seed", "simulate.", c.sim_seed);
  c.sim_beta = value_at<std::vector<double>>(sim, "beta", "simulate.", c.sim_beta);
  c.sim_alpha = value_at<double>(sim, "alpha", "simulate.", c.sim_alpha);
  c.sim_lambda = value_at<double>(sim, "lambda", "simulate.", c.sim_lambda);
  c.sim_sigma = value_at<double>(sim, "sigma", "simulate.", c.sim_sigma);
  c.sim_phi = value_at<double>(sim, "phi", "simulate.", c.sim_phi);
  if (sim.contains("bbox")) {
    const auto b = value_at<std::vector<double>>(sim, "bbox", "simulate.", {});
    if (b.size() != 4 || !(b[2] > b[0]) || !(b[3] > b[1])) {
      throw ValidationError("config: 'simulate.bbox' must be [xmin, ymin, xmax, ymax] with positive extent");
    }
    c.sim_bbox = BoundingBox{b[0], b[1], b[2], b[3]};
  }
  const auto& cens = sim.contains("censoring") ? sim.at("censoring") : json::object();
  if (!cens.is_object()) throw ValidationError("config: 'simulate.censoring' must be an object");
  if (cens.contains("admin_time") && !cens.at("admin_time").is_null()) {
    c.sim_censoring.admin_time = value_at<double>(cens, "admin_time", "simulate.censoring.", 1.0);
  }
  c.sim_censoring.left_rate = value_at<double>(cens, "left_rate", "simulate.censoring.", 0.0);
  c.sim_censoring.interval_rate = value_at<double>(cens, "interval_rate", "simulate.censoring.", 0.0);
  c.sim_censoring.inspection_max = value_at<double>(cens, "inspection_max", "simulate.censoring.", 1.0);
  c.sim_censoring.inspection_width = value_at<double>(cens, "inspection_width", "simulate.censoring.", 1.0);
  c.sim_censoring.validate();

  const auto& bm = section(root, "benchmark");
  c.bench.dense_sizes = value_at<std::vector<std::size_t>>(bm, "dense_sizes", "benchmark.", c.bench.dense_sizes);
  c.bench.fourier_sizes = value_at<std::vector<std::size_t>>(bm, "fourier_sizes", "benchmark.", c.bench.fourier_sizes);
  if (bm.contains("grids")) {
    c.bench.grids.clear();
    for (const auto& gg : value_at<std::vector<std::vector<int>>>(bm, "grids", "benchmark.", {})) {
      if (gg.size() != 2) throw ValidationError("config: 'benchmark.grids' entries must be [m1, m2]");
      c.bench.grids.emplace_back(gg[0], gg[1]);
    }
  }
  c.bench.ext_factor = value_at<double>(bm, "ext_factor", "benchmark.", c.bench.ext_factor);
  c.bench.iterations = value_at<std::size_t>(bm, "iterations", "benchmark.", c.bench.iterations);
  c.bench.dense_iterations = value_at<std::size_t>(bm, "dense_iterations", "benchmark.", c.bench.dense_iterations);
  c.bench.dense_short_above = value_at<std::size_t>(bm, "dense_short_above", "benchmark.", c.bench.dense_short_above);
  c.bench.repetitions = value_at<std::size_t>(bm, "repetitions", "benchmark.", c.bench.repetitions);
  c.bench.seed = value_at<std::uint64_t>(bm, "seed", "benchmark.", c.bench.seed);
  c.bench.workers = value_at<std::size_t>(bm, "workers", "benchmark.", c.bench.workers);
  const auto factor = value_at<std::string>(bm, "dense_factor", "benchmark.", "eigen");
  if (factor == "eigen") {
    c.bench.factor = DenseFactor::eigen;
  } else if (factor == "cholesky") {
    c.bench.factor = DenseFactor::cholesky;
  } else {
    throw ValidationError("config: 'benchmark.dense_factor' must be \"eigen\" or \"cholesky\"");
  }
  c.bench.validate();
  return c;
}

}  // namespace gridsurv
