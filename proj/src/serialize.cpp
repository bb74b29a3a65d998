#include "ateband/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "ateband/errors.hpp"
#include "ateband/step_function.hpp"

namespace ateband {

namespace {

using nlohmann::json;

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json vec_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vec_from_json(const json& arr) {
  Eigen::VectorXd v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
  return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    rows.push_back(vec_to_json(m.row(i).transpose()));
  return rows;
}

Eigen::MatrixXd mat_from_json(const json& rows) {
  const auto r = static_cast<Eigen::Index>(rows.size());
  if (r == 0) return {};
  const auto c = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    m.row(i) = vec_from_json(rows[static_cast<std::size_t>(i)]).transpose();
  return m;
}

void stamp(json& j, const json* config) {
  j["version"] = kVersion;
  if (config) j["config"] = *config;
}

}  // namespace

json coxfit_to_json(const CoxFit& fit) {
  json j;
  j["version"] = kVersion;
  j["cause"] = fit.cause;
  j["beta"] = vec_to_json(fit.beta);
  j["baseline_times"] = vec_to_json(fit.baseline.times);
  j["baseline_values"] = vec_to_json(fit.baseline.values);
  j["information"] = mat_to_json(fit.information);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  return j;
}

CoxFit coxfit_from_json(const json& j) {
  CoxFit fit;
  fit.cause = j.at("cause");
  fit.beta = vec_from_json(j.at("beta"));
  fit.baseline = StepFunction(vec_from_json(j.at("baseline_times")),
                              vec_from_json(j.at("baseline_values")), 0.0);
  fit.information = mat_from_json(j.at("information"));
  fit.iterations = j.at("iterations");
  fit.converged = j.at("converged");
  return fit;
}

json curve_to_json(const Eigen::VectorXd& times, const Eigen::VectorXd& values) {
  if (times.size() != values.size())
    throw ValidationError("curve serialization: times/values length mismatch");
  json j;
  j["times"] = vec_to_json(times);
  j["values"] = vec_to_json(values);
  return j;
}

std::string curve_to_csv(const Eigen::VectorXd& times, const Eigen::VectorXd& values,
                         const std::string& value_header) {
  if (times.size() != values.size())
    throw ValidationError("curve serialization: times/values length mismatch");
  std::string out = "time," + value_header + "\n";
  for (Eigen::Index i = 0; i < times.size(); ++i)
    out += fmt(times[i]) + "," + fmt(values[i]) + "\n";
  return out;
}

std::string matrix_to_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ",";
      out += fmt(m(i, j));
    }
    out += "\n";
  }
  return out;
}

std::string dataset_to_csv(const Dataset& ds) {
  std::string out = "id,time,status,treatment";
  for (int j = 1; j <= ds.n_covariates(); ++j) out += ",z" + std::to_string(j);
  out += "\n";
  for (int i = 0; i < ds.n(); ++i) {
    const Subject& s = ds.subject(i);
    out += s.id + "," + fmt(s.time) + "," + std::to_string(s.status) + "," +
           std::to_string(s.treatment);
    for (Eigen::Index j = 0; j < s.covariates.size(); ++j)
      out += "," + fmt(s.covariates[j]);
    out += "\n";
  }
  return out;
}

json band_to_json(const ConfidenceBand& band, const json* config) {
  json j;
  j["grid"] = vec_to_json(band.grid);
  j["estimate"] = vec_to_json(band.estimate);
  j["lower"] = vec_to_json(band.lower);
  j["upper"] = vec_to_json(band.upper);
  j["level"] = band.level;
  j["method"] = band.method;
  j["sup_quantile"] = band.sup_quantile;
  stamp(j, config);
  return j;
}

std::string ensemble_to_csv(const ResampleEnsemble& ens) {
  return matrix_to_csv(ens.paths);
}

json ensemble_metadata(const ResampleEnsemble& ens, const json* config) {
  json j;
  j["method"] = ens.method;
  j["multiplier"] = ens.multiplier;
  j["grid"] = vec_to_json(ens.grid);
  j["seed"] = ens.seed;
  j["B"] = ens.B;
  j["requested_B"] = ens.requested_B;
  j["failures"] = ens.failures;
  stamp(j, config);
  return j;
}

json scenario_to_json(const Scenario& sc) {
  json j;
  j["name"] = sc.name;
  j["K"] = sc.K;
  j["p"] = sc.p;
  json betas = json::array();
  for (const auto& b : sc.beta) betas.push_back(vec_to_json(b));
  j["beta"] = betas;
  j["lambda0"] = vec_to_json(sc.lambda0);
  j["shape"] = vec_to_json(sc.shape);
  j["treatment_coef"] = vec_to_json(sc.treatment_coef);
  j["lambda_c"] = sc.lambda_c;
  return j;
}

Scenario scenario_from_json(const json& j) {
  Scenario sc = default_scenario();
  sc.name = j.value("name", std::string("unnamed"));
  sc.K = j.at("K");
  sc.p = j.at("p");
  sc.beta.clear();
  for (const auto& b : j.at("beta")) sc.beta.push_back(vec_from_json(b));
  sc.lambda0 = vec_from_json(j.at("lambda0"));
  sc.shape = j.contains("shape") ? vec_from_json(j.at("shape"))
                                 : Eigen::VectorXd::Ones(sc.K);
  sc.treatment_coef = vec_from_json(j.at("treatment_coef"));
  sc.lambda_c = j.at("lambda_c");
  sc.check();
  return sc;
}

json coverage_to_json(const CoverageReport& rep, const json* config) {
  json j;
  j["scenario"] = rep.scenario;
  j["method"] = rep.method;
  j["level"] = rep.level;
  j["n"] = rep.n;
  j["reps"] = rep.reps;
  j["B"] = rep.B;
  j["seed"] = rep.seed;
  j["grid"] = vec_to_json(rep.grid);
  j["truth"] = vec_to_json(rep.truth);
  j["pointwise_coverage"] = vec_to_json(rep.pointwise);
  j["simultaneous_coverage"] = rep.simultaneous;
  j["mean_band_width"] = rep.mean_width;
  j["failures"] = rep.failures;
  stamp(j, config);
  return j;
}

std::string coverage_table(const CoverageReport& rep) {
  std::ostringstream os;
  os << "coverage report: scenario=" << rep.scenario << " method=" << rep.method
     << " n=" << rep.n << " reps=" << rep.reps << " B=" << rep.B
     << " level=" << rep.level << "\n";
  os << "  t        truth      pointwise\n";
  for (Eigen::Index g = 0; g < rep.grid.size(); ++g) {
    char line[96];
    std::snprintf(line, sizeof(line), "  %-8.4g %-10.4g %.4f\n", rep.grid[g],
                  rep.truth[g], rep.pointwise[g]);
    os << line;
  }
  char tail[128];
  std::snprintf(tail, sizeof(tail),
                "  simultaneous=%.4f mean_width=%.4g failures=%d\n",
                rep.simultaneous, rep.mean_width, rep.failures);
  os << tail;
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ParseError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace ateband
