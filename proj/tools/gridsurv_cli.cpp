#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gridsurv/dense_oracle.hpp"
#include "gridsurv/errors.hpp"
#include "gridsurv/initialize.hpp"
#include "gridsurv/io.hpp"
#include "gridsurv/mcmc.hpp"
#include "gridsurv/posterior.hpp"
#include "gridsurv/prediction.hpp"
#include "gridsurv/simulate.hpp"
#include "gridsurv/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr const char* kOutputDirEnv = "GRIDSURV_OUTPUT_DIR";

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw gridsurv::ValidationError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw gridsurv::ValidationError("cannot write '" + path.string() + "'");
  return out;
}

struct Run {
  std::string command;
  json config_echo;
  gridsurv::RunConfig config;
  fs::path out_dir;
  std::vector<std::string> outputs;

  fs::path file(const std::string& name) {
    outputs.push_back(name);
    return out_dir / name;
  }
};

// Flag > environment > config file.
Run start_run(const std::string& command, const std::string& config_path, const std::string& out_flag) {
  Run run;
  run.command = command;
  const std::string text = config_path.empty() ? std::string("{}") : read_text(config_path);
  run.config = gridsurv::parse_config(text);
  run.config_echo = json::parse(text);
  std::string dir = run.config.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env != nullptr && *env != '\0') dir = env;
  if (!out_flag.empty()) dir = out_flag;
  run.out_dir = dir;
  fs::create_directories(run.out_dir);
  return run;
}

void write_manifest(Run& run, std::uint64_t seed, const json& extra = json::object()) {
  json m;
  m["command"] = run.command;
  m["seed"] = seed;
  m["config"] = run.config_echo;
  json versions = json::object();
  for (const auto& [name, v] : gridsurv::component_versions()) versions[name] = v;
  m["versions"] = versions;
  m["outputs"] = run.outputs;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  auto out = open_output(run.out_dir / (run.command + "_manifest.json"));
  out << m.dump(2) << '\n';
}

json bbox_json(const gridsurv::BoundingBox& b) { return json::array({b.xmin, b.ymin, b.xmax, b.ymax}); }

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Grid geometry and model facts the predict step needs.
json fit_info(const gridsurv::Grid& grid, const gridsurv::RunConfig& cfg, const gridsurv::Dataset& data,
              double max_time) {
  json j;
  j["m1"] = grid.m1();
  j["m2"] = grid.m2();
  j["ext_factor"] = grid.ext_factor();
  j["bbox"] = bbox_json(grid.bbox());
  j["outcome"] = cfg.outcome;
  j["covariance"] = gridsurv::to_string(cfg.posterior.kind);
  j["nu"] = cfg.posterior.nu;
  j["fixed_shape"] = cfg.fixed_shape ? json(*cfg.fixed_shape) : json(nullptr);
  j["covariates"] = data.covariate_names;
  j["max_time"] = max_time;
  return j;
}

gridsurv::Grid grid_from_info(const json& j) {
  const auto b = j.at("bbox").get<std::vector<double>>();
  if (b.size() != 4) throw gridsurv::ValidationError("fit info: bbox must have 4 entries");
  const gridsurv::BoundingBox box{b[0], b[1], b[2], b[3]};
  const std::vector<gridsurv::Point> corners{{box.xmin, box.ymin}, {box.xmax, box.ymax}};
  return gridsurv::Grid::build(corners, j.at("m1").get<int>(), j.at("m2").get<int>(), j.at("ext_factor").get<double>(),
                               box);
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return out;
}

int cmd_simulate(const std::string& config_path, const std::string& out_flag) {
  Run run = start_run("simulate", config_path, out_flag);
  const auto& c = run.config;
  const gridsurv::Grid grid = c.simulation_grid();
  const gridsurv::CovarianceModel model{c.posterior.kind, c.sim_sigma * c.sim_sigma, c.sim_phi, c.posterior.nu};
  const auto field = gridsurv::simulate_field(grid, model, c.sim_seed, c.posterior.pd_tolerance);
  const Eigen::Map<const Eigen::VectorXd> beta(c.sim_beta.data(), static_cast<Eigen::Index>(c.sim_beta.size()));
  std::vector<std::string> names;
  for (std::size_t j = 0; j < c.sim_beta.size(); ++j) names.push_back("x" + std::to_string(j + 1));

  // Record draws use a seed distinct from the field's.
  const std::uint64_t record_seed = c.sim_seed + 0x9e3779b97f4a7c15ULL;
  if (c.outcome == "survival") {
    gridsurv::SurvivalTable t;
    t.covariate_names = names;
    t.records = gridsurv::simulate_survival(c.sim_n, beta, {c.sim_alpha, c.sim_lambda}, field.field, grid,
                                            c.sim_censoring, record_seed);
    auto out = open_output(run.file("data.csv"));
    gridsurv::write_survival_csv(out, t);
  } else {
    gridsurv::CountTable t;
    t.covariate_names = names;
    t.records = gridsurv::simulate_poisson(c.sim_n, beta, field.field, grid, record_seed);
    auto out = open_output(run.file("data.csv"));
    gridsurv::write_count_csv(out, t);
  }
  {
    auto out = open_output(run.file("truth_field.csv"));
    out << "cell,Y\n";
    for (Eigen::Index i = 0; i < field.field.size(); ++i) out << i << ',' << gridsurv::format_double(field.field[i]) << '\n';
  }
  {
    auto out = open_output(run.file("cells.csv"));
    gridsurv::write_cells_csv(out, grid);
  }
  json truth;
  truth["outcome"] = c.outcome;
  truth["n"] = c.sim_n;
  truth["beta"] = c.sim_beta;
  if (c.outcome == "survival") {
    truth["alpha"] = c.sim_alpha;
    truth["lambda"] = c.sim_lambda;
  }
  truth["sigma"] = c.sim_sigma;
  truth["phi"] = c.sim_phi;
  truth["covariance"] = gridsurv::to_string(c.posterior.kind);
  truth["nu"] = c.posterior.nu;
  truth["grid"] = {{"m1", grid.m1()}, {"m2", grid.m2()}, {"ext_factor", grid.ext_factor()}, {"bbox", bbox_json(grid.bbox())}};
  {
    auto out = open_output(run.file("truth.json"));
    out << truth.dump(2) << '\n';
  }
  write_manifest(run, c.sim_seed);
  std::cout << "simulate: wrote " << c.sim_n << " records to " << (run.out_dir / "data.csv").string() << '\n';
  return 0;
}

int cmd_fit(const std::string& config_path, const std::string& data_path, const std::string& out_flag) {
  Run run = start_run("fit", config_path, out_flag);
  const auto& c = run.config;
  const std::string text = read_text(data_path);
  std::istringstream kind_in(text);
  const std::string kind = gridsurv::detect_data_kind(kind_in);
  if (kind != c.outcome) {
    throw gridsurv::ValidationError("data file holds " + kind + " data but the config outcome is " + c.outcome);
  }
  std::istringstream in(text);
  std::vector<gridsurv::Point> locations;
  double max_time = 0.0;
  std::shared_ptr<const gridsurv::Dataset> data;
  if (kind == "survival") {
    auto t = gridsurv::read_survival_csv(in);
    for (const auto& r : t.records) {
      locations.push_back(r.location);
      max_time = std::max(max_time, r.censoring == gridsurv::Censoring::interval ? r.time_hi : r.time);
    }
    data = std::make_shared<const gridsurv::Dataset>(
        gridsurv::Dataset::from_survival(std::move(t.records), t.covariate_names, c.fixed_shape));
  } else {
    auto t = gridsurv::read_count_csv(in);
    for (const auto& r : t.records) locations.push_back(r.location);
    data = std::make_shared<const gridsurv::Dataset>(gridsurv::Dataset::from_counts(std::move(t.records), t.covariate_names));
  }
  if (data->size() == 0) throw gridsurv::ValidationError("data file has no records");

  const gridsurv::Grid grid = gridsurv::Grid::build(locations, c.m1, c.m2, c.ext_factor, c.window);
  const auto priors = c.priors(static_cast<std::size_t>(data->covariates.cols()), data->outcome->omega_dim());
  gridsurv::SpatialPosterior post(data, grid, priors, c.posterior);

  const auto init = gridsurv::initialize(post);
  // Surfaces a non positive definite covariance as a typed error with phi.
  (void)post.log_posterior(init.state);
  const auto chain = gridsurv::run_chain(post, c.mcmc, init.state, init.scalings);

  const auto names = gridsurv::parameter_names(data->covariate_names, data->outcome->omega_names(), post.eta_dim());
  {
    auto out = open_output(run.file("samples.csv"));
    gridsurv::write_samples_csv(out, chain, names);
  }
  {
    auto out = open_output(run.file("cells.csv"));
    gridsurv::write_cells_csv(out, grid);
  }
  {
    auto out = open_output(run.file("trace.csv"));
    gridsurv::write_trace_csv(out, chain);
  }
  std::vector<gridsurv::NormalPrior> scalar_priors = priors.beta;
  scalar_priors.insert(scalar_priors.end(), priors.omega_t.begin(), priors.omega_t.end());
  scalar_priors.push_back(priors.log_sigma);
  scalar_priors.push_back(priors.log_phi);
  if (priors.log_sigma_u) scalar_priors.push_back(*priors.log_sigma_u);
  const auto diag = gridsurv::diagnostics(chain, names, scalar_priors);
  {
    auto out = open_output(run.file("diagnostics.csv"));
    out << "cell,lag1\n";
    for (std::size_t i = 0; i < diag.lag1.size(); ++i) {
      out << i << ',' << (std::isnan(diag.lag1[i]) ? std::string() : gridsurv::format_double(diag.lag1[i])) << '\n';
    }
  }
  {
    auto out = open_output(run.file("histograms.csv"));
    out << "parameter,bin_lo,bin_hi,density,prior_density\n";
    for (const auto& h : diag.histograms) {
      for (std::size_t b = 0; b < h.density.size(); ++b) {
        out << h.name << ',' << gridsurv::format_double(h.edges[b]) << ',' << gridsurv::format_double(h.edges[b + 1])
            << ',' << gridsurv::format_double(h.density[b]) << ',' << gridsurv::format_double(h.prior_density[b])
            << '\n';
      }
    }
  }
  {
    auto out = open_output(run.file("fit_info.json"));
    out << fit_info(grid, c, *data, max_time).dump(2) << '\n';
  }
  json extra;
  extra["retained"] = chain.samples.size();
  extra["burnin_acceptance"] = chain.burnin_acceptance;
  extra["post_burnin_acceptance"] = chain.post_burnin_acceptance;
  extra["post_burnin_move_rate"] = chain.post_burnin_move_rate;
  extra["final_h"] = chain.final_scalings.h;
  extra["initial_log_post"] = chain.initial_log_post;
  extra["mle_loglik"] = init.mle.loglik;
  extra["eta_fallback"] = init.eta_fallback;
  json lag = json::array();
  for (double v : diag.lag1_summary) lag.push_back(nan_safe(v));
  extra["lag1_summary"] = lag;
  extra["lag1_missing"] = diag.lag1_missing;
  write_manifest(run, c.mcmc.seed, extra);
  std::cout << "fit: " << chain.samples.size() << " samples, post burn-in acceptance "
            << chain.post_burnin_acceptance << '\n';
  return 0;
}

int cmd_predict(const std::string& config_path, const std::string& samples_path, std::string info_path,
                const std::string& out_flag) {
  Run run = start_run("predict", config_path, out_flag);
  const auto& c = run.config;
  if (info_path.empty()) info_path = (fs::path(samples_path).parent_path() / "fit_info.json").string();
  json info;
  try {
    info = json::parse(read_text(info_path));
  } catch (const json::exception& e) {
    throw gridsurv::ValidationError("fit info '" + info_path + "': " + e.what());
  }
  const gridsurv::Grid grid = grid_from_info(info);
  std::ifstream sin(samples_path, std::ios::binary);
  if (!sin) throw gridsurv::ValidationError("cannot open '" + samples_path + "'");
  const auto table = gridsurv::read_samples_csv(sin);
  if (table.chain.samples.empty()) throw gridsurv::ValidationError("samples file has no rows");
  if (table.chain.samples.front().field.size() != static_cast<Eigen::Index>(grid.size())) {
    throw gridsurv::ValidationError("samples file has " + std::to_string(table.chain.samples.front().field.size()) +
                                    " field columns but the grid has " + std::to_string(grid.size()) + " cells");
  }

  gridsurv::FieldSummaryOptions opts;
  opts.thresholds = c.thresholds;
  opts.window_only = !c.full_grid;
  const auto summary = gridsurv::summarize_field(table.chain, grid, opts);
  {
    auto out = open_output(run.file("field_summary.csv"));
    gridsurv::write_field_summary_csv(out, summary, grid);
  }
  const auto kind = gridsurv::parse_covariance_kind(info.at("covariance").get<std::string>());
  const double nu = info.at("nu").get<double>();
  std::vector<double> distances = c.distances;
  if (distances.empty()) {
    const auto& b = grid.bbox();
    distances = linspace(0.0, std::hypot(b.width(), b.height()), 51);
  }
  {
    auto out = open_output(run.file("covariance_curve.csv"));
    gridsurv::write_curve_csv(out, gridsurv::covariance_band(gridsurv::covariance_draws(table.chain, kind, nu), distances),
                              "distance");
  }
  if (info.at("outcome").get<std::string>() == "survival") {
    std::optional<double> fixed;
    if (!info.at("fixed_shape").is_null()) fixed = info.at("fixed_shape").get<double>();
    std::vector<double> times = c.times;
    if (times.empty()) {
      const double tmax = info.at("max_time").get<double>();
      times = linspace(tmax / 50.0, tmax, 50);
    }
    auto out = open_output(run.file("baseline_hazard_curve.csv"));
    gridsurv::write_curve_csv(out, gridsurv::baseline_hazard_band(gridsurv::weibull_draws(table.chain, fixed), times),
                              "time");
  }
  write_manifest(run, c.mcmc.seed, {{"samples", samples_path}, {"cells_reported", summary.cells.size()}});
  std::cout << "predict: summarized " << summary.cells.size() << " cells over " << table.chain.samples.size()
            << " samples\n";
  return 0;
}

int cmd_benchmark(const std::string& config_path, const std::string& out_flag) {
  Run run = start_run("benchmark", config_path, out_flag);
  const auto rows = gridsurv::benchmark(run.config.bench);
  {
    auto out = open_output(run.file("timing.csv"));
    gridsurv::write_timing_csv(out, rows);
  }
  write_manifest(run, run.config.bench.seed);
  for (const auto& r : rows) {
    std::cout << r.method << " n=" << r.n << " grid=" << r.grid << " s/1000it=" << r.seconds_per_1000_iter << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial survival and count models on a toroidal grid: simulate, fit, predict, benchmark"};
  app.set_version_flag("--version", gridsurv::version());
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string data_path;
  std::string samples_path;
  std::string info_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("-o,--output-dir", out_dir,
                    std::string("Output directory (overrides ") + kOutputDirEnv + " and the config)");
  };
  auto* sim = app.add_subcommand("simulate", "Simulate a field and a dataset; writes data.csv and truth.json");
  add_common(sim);
  auto* fit = app.add_subcommand("fit", "Run the sampler; writes samples.csv, diagnostics and fit_info.json");
  add_common(fit);
  fit->add_option("-d,--data", data_path, "Data CSV")->required();
  auto* pred = app.add_subcommand("predict", "Summarize samples; writes field and curve summaries");
  add_common(pred);
  pred->add_option("-s,--samples", samples_path, "samples.csv from fit")->required()->check(CLI::ExistingFile);
  pred->add_option("--fit-info", info_path, "fit_info.json (default: next to the samples file)");
  auto* bench = app.add_subcommand("benchmark", "Time the Fourier and dense samplers; writes timing.csv");
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*sim) return cmd_simulate(config_path, out_dir);
    if (*fit) return cmd_fit(config_path, data_path, out_dir);
    if (*pred) return cmd_predict(config_path, samples_path, info_path, out_dir);
    if (*bench) return cmd_benchmark(config_path, out_dir);
  } catch (const gridsurv::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const gridsurv::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
