#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "ateband/asymptotics.hpp"
#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"
#include "ateband/errors.hpp"
#include "ateband/gformula.hpp"
#include "ateband/resampling.hpp"
#include "ateband/serialize.hpp"
#include "ateband/simulate.hpp"

namespace {

using ateband::Dataset;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

int default_threads() {
  if (const char* env = std::getenv("ATEBAND_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

struct CommonArgs {
  std::string input;
  std::string out_dir = ".";
  int causes = 1;
  double tau = -1.0;
  bool jitter_ties = false;
  std::vector<double> grid;
};

Dataset load_dataset(const CommonArgs& a) {
  ateband::DatasetOptions opts;
  opts.tau = a.tau;
  opts.jitter_ties = a.jitter_ties;
  return ateband::parse_dataset(ateband::read_text_file(a.input), a.causes, opts);
}

Eigen::VectorXd resolve_grid(const CommonArgs& a, const Dataset& ds,
                             const std::vector<ateband::CoxFit>& fits) {
  if (a.grid.empty()) return ateband::default_grid(ds, fits);
  Eigen::VectorXd g(a.grid.size());
  for (std::size_t i = 0; i < a.grid.size(); ++i) g[static_cast<Eigen::Index>(i)] = a.grid[i];
  return g;
}

std::vector<ateband::CoxFit> fit_all(const Dataset& ds) {
  std::vector<ateband::CoxFit> fits;
  for (int k = 1; k <= ds.n_causes(); ++k)
    fits.push_back(ateband::fit_cause_specific_cox(ds, k));
  return fits;
}

void write_json(const std::string& path, const json& j) {
  ateband::write_text_file(path, j.dump(2) + "\n");
}

int run_fit(const CommonArgs& a, const json& config) {
  const Dataset ds = load_dataset(a);
  const auto report = ateband::validate(ds);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << "\n";
  const auto fits = fit_all(ds);
  const Eigen::VectorXd grid = resolve_grid(a, ds, fits);
  const auto ate = ateband::ate_estimate(fits, ds, grid);

  std::filesystem::create_directories(a.out_dir);
  for (const auto& fit : fits) {
    json j = ateband::coxfit_to_json(fit);
    j["config"] = config;
    write_json(a.out_dir + "/cox_cause" + std::to_string(fit.cause) + ".json", j);
  }
  ateband::write_text_file(a.out_dir + "/ate.csv",
                           ateband::curve_to_csv(ate.grid, ate.estimate, "ate"));
  std::cout << ateband::curve_to_json(ate.grid, ate.estimate).dump() << "\n";
  return kExitOk;
}

int run_band(const CommonArgs& a, const std::string& method,
             const std::string& multiplier, int B, double level, std::uint64_t seed,
             bool stabilize, int threads, const json& config) {
  if (!(level > 0.0 && level < 1.0))
    throw ateband::ValidationError("--level must lie in (0, 1)");
  const Dataset ds = load_dataset(a);
  const auto fits = fit_all(ds);
  const Eigen::VectorXd grid = resolve_grid(a, ds, fits);
  const auto ate = ateband::ate_estimate(fits, ds, grid);

  ateband::ResampleEnsemble ens;
  const ateband::TildeH th = ateband::tilde_h_curves(fits, ds, grid);
  if (method == "efron") {
    ens = ateband::efron_bootstrap(ds, grid, B, seed, {}, nullptr, threads);
  } else if (method == "wild") {
    ens = ateband::wild_bootstrap(th, ds, B, multiplier, seed);
  } else if (method == "influence") {
    ens = ateband::if_resample(ateband::influence_curves(th, ds), B, seed);
  } else {
    throw ateband::ValidationError(
        "--method must be one of efron, wild, influence");
  }
  if (ens.failures > 0)
    std::cerr << "warning: " << ens.failures << " bootstrap refits excluded\n";

  const Eigen::VectorXd xi_diag = ateband::xi_diagonal(th);
  const auto pw = ateband::pointwise_ci(ate, ens, level);
  const auto band = ateband::simultaneous_band(ate, ens, level, stabilize,
                                               stabilize ? &xi_diag : nullptr);

  std::filesystem::create_directories(a.out_dir);
  write_json(a.out_dir + "/band.json", ateband::band_to_json(band, &config));
  write_json(a.out_dir + "/pointwise.json", ateband::band_to_json(pw, &config));
  ateband::write_text_file(a.out_dir + "/ensemble.csv",
                           ateband::ensemble_to_csv(ens));
  write_json(a.out_dir + "/ensemble_meta.json",
             ateband::ensemble_metadata(ens, &config));
  ateband::write_text_file(a.out_dir + "/ate.csv",
                           ateband::curve_to_csv(ate.grid, ate.estimate, "ate"));
  std::cout << ateband::band_to_json(band, &config).dump() << "\n";
  return kExitOk;
}

ateband::Scenario load_scenario(const std::string& path) {
  if (path.empty()) return ateband::default_scenario();
  return ateband::scenario_from_json(json::parse(ateband::read_text_file(path)));
}

int run_simulate(const std::string& scenario_path, int n, std::uint64_t seed,
                 const std::string& out_path, const json& config) {
  const auto sc = load_scenario(scenario_path);
  const Dataset ds = ateband::generate_dataset(sc, n, seed);
  std::string csv = "# ateband " + std::string(ateband::kVersion) +
                    " config=" + config.dump() + "\n" + ateband::dataset_to_csv(ds);
  ateband::write_text_file(out_path, csv);
  std::cerr << "wrote " << ds.n() << " subjects to " << out_path << "\n";
  std::cout << json({{"n", ds.n()}, {"path", out_path}}).dump() << "\n";
  return kExitOk;
}

int run_coverage(const std::string& scenario_path, int n, int reps, int B,
                 const std::string& method, double level, std::uint64_t seed,
                 int threads, const std::string& out_path, const json& config) {
  const auto sc = load_scenario(scenario_path);
  if (reps < 100)
    std::cerr << "warning: reps=" << reps
              << " is below the reliability floor of 100; results are noisy\n";
  std::cerr << "running " << reps << " replications (method=" << method
            << ", n=" << n << ", B=" << B << ")...\n";
  const auto report =
      ateband::coverage_experiment(sc, n, reps, B, method, level, seed, threads);
  const json j = ateband::coverage_to_json(report, &config);
  if (!out_path.empty()) write_json(out_path, j);
  std::cerr << ateband::coverage_table(report);
  std::cout << j.dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"g-formula ATE curves for competing risks, with resampling bands"};
  app.require_subcommand(1);
  int threads = default_threads();
  app.add_option("--threads", threads, "worker thread cap")->check(CLI::PositiveNumber);

  CommonArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit Cox models and the ATE curve");
  fit_cmd->add_option("--input", fit_args.input, "dataset CSV")->required();
  fit_cmd->add_option("--causes", fit_args.causes, "number of causes")->required();
  fit_cmd->add_option("--out", fit_args.out_dir, "output directory");
  fit_cmd->add_option("--tau", fit_args.tau, "time horizon");
  fit_cmd->add_flag("--jitter-ties", fit_args.jitter_ties, "break ties by jitter");
  fit_cmd->add_option("--grid", fit_args.grid, "evaluation times")->delimiter(',');

  CommonArgs band_args;
  std::string method = "wild", multiplier = "normal";
  int B = 1000;
  double level = 0.95;
  std::uint64_t seed = 1;
  bool stabilize = false;
  auto* band_cmd = app.add_subcommand("band", "resampling confidence band");
  band_cmd->add_option("--input", band_args.input, "dataset CSV")->required();
  band_cmd->add_option("--causes", band_args.causes, "number of causes")->required();
  band_cmd->add_option("--out", band_args.out_dir, "output directory");
  band_cmd->add_option("--tau", band_args.tau, "time horizon");
  band_cmd->add_flag("--jitter-ties", band_args.jitter_ties, "break ties by jitter");
  band_cmd->add_option("--grid", band_args.grid, "evaluation times")->delimiter(',');
  band_cmd->add_option("--method", method, "efron | wild | influence");
  band_cmd->add_option("--multiplier", multiplier, "normal | poisson (wild only)");
  band_cmd->add_option("--B", B, "replicates")->check(CLI::PositiveNumber);
  band_cmd->add_option("--level", level, "confidence level");
  band_cmd->add_option("--seed", seed, "RNG seed");
  band_cmd->add_flag("--stabilize", stabilize, "variance-stabilized band");

  std::string scenario_path, sim_out = "simulated.csv", cov_out = "coverage.json";
  int sim_n = 300, cov_n = 300, reps = 1000, cov_B = 500;
  std::uint64_t sim_seed = 1, cov_seed = 1;
  std::string cov_method = "wild";
  double cov_level = 0.95;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a known-truth dataset");
  sim_cmd->add_option("--scenario", scenario_path, "scenario JSON (default built-in)");
  sim_cmd->add_option("--n", sim_n, "sample size")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--out", sim_out, "output CSV path");

  std::string cov_scenario;
  auto* cov_cmd = app.add_subcommand("coverage", "Monte-Carlo coverage experiment");
  cov_cmd->add_option("--scenario", cov_scenario, "scenario JSON (default built-in)");
  cov_cmd->add_option("--n", cov_n, "sample size")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--reps", reps, "Monte-Carlo replications")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--B", cov_B, "bootstrap replicates")->check(CLI::PositiveNumber);
  cov_cmd->add_option("--method", cov_method, "efron | wild | influence");
  cov_cmd->add_option("--level", cov_level, "confidence level");
  cov_cmd->add_option("--seed", cov_seed, "RNG seed");
  cov_cmd->add_option("--out", cov_out, "report JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  json config;
  // threads deliberately not echoed: outputs must not depend on worker count
  config["version"] = ateband::kVersion;
  try {
    if (app.got_subcommand(fit_cmd)) {
      config["subcommand"] = "fit";
      config["input"] = fit_args.input;
      config["causes"] = fit_args.causes;
      config["tau"] = fit_args.tau;
      config["grid"] = fit_args.grid;
      return run_fit(fit_args, config);
    }
    if (app.got_subcommand(band_cmd)) {
      config["subcommand"] = "band";
      config["input"] = band_args.input;
      config["causes"] = band_args.causes;
      config["tau"] = band_args.tau;
      config["grid"] = band_args.grid;
      config["method"] = method;
      config["multiplier"] = method == "wild" ? multiplier : std::string("none");
      config["B"] = B;
      config["level"] = level;
      config["seed"] = seed;
      config["stabilize"] = stabilize;
      return run_band(band_args, method, multiplier, B, level, seed, stabilize,
                      threads, config);
    }
    if (app.got_subcommand(sim_cmd)) {
      config["subcommand"] = "simulate";
      config["scenario"] = scenario_path;
      config["n"] = sim_n;
      config["seed"] = sim_seed;
      return run_simulate(scenario_path, sim_n, sim_seed, sim_out, config);
    }
    config["subcommand"] = "coverage";
    config["scenario"] = cov_scenario;
    config["n"] = cov_n;
    config["reps"] = reps;
    config["B"] = cov_B;
    config["method"] = cov_method;
    config["level"] = cov_level;
    config["seed"] = cov_seed;
    return run_coverage(cov_scenario, cov_n, reps, cov_B, cov_method, cov_level,
                        cov_seed, threads, cov_out, config);
  } catch (const ateband::FitError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const ateband::SingularMatrixError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
}
