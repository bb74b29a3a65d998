#include "ateband/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "ateband/rng.hpp"

namespace ateband {

namespace {

// Rank-preserving tie break: within a tie group (row order) each duplicate is
// shifted by a strictly increasing sub-gap offset far below the data scale.
void apply_jitter(std::vector<Subject>& subjects, std::uint64_t seed) {
  std::vector<double> sorted_times;
  sorted_times.reserve(subjects.size());
  for (const auto& s : subjects) sorted_times.push_back(s.time);
  std::sort(sorted_times.begin(), sorted_times.end());

  double min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < sorted_times.size(); ++j) {
    const double gap = sorted_times[j] - sorted_times[j - 1];
    if (gap > 0.0 && gap < min_gap) min_gap = gap;
  }
  if (!std::isfinite(min_gap)) min_gap = 1.0;
  const double eps = 1e-9 * min_gap;

  std::map<double, int> seen;
  RngStream rng(seed, 0);
  for (auto& s : subjects) {
    const int idx = seen[s.time]++;
    if (idx > 0) s.time += (static_cast<double>(idx) + 0.5 * rng.uniform()) * eps;
  }
}

}  // namespace

Dataset::Dataset(std::vector<Subject> subjects, int n_causes, DatasetOptions opts)
    : subjects_(std::move(subjects)), n_causes_(n_causes), opts_(opts) {
  if (n_causes_ < 1) throw ValidationError("number of causes must be >= 1");
  if (subjects_.empty()) throw ValidationError("dataset is empty");

  p_ = static_cast<int>(subjects_[0].covariates.size());
  for (std::size_t i = 0; i < subjects_.size(); ++i) {
    const Subject& s = subjects_[i];
    if (!(s.time >= 0.0) || !std::isfinite(s.time))
      throw ValidationError("subject " + s.id + ": time must be finite and >= 0");
    if (s.status < 0 || s.status > n_causes_)
      throw ValidationError("subject " + s.id + ": status " +
                            std::to_string(s.status) + " outside {0.." +
                            std::to_string(n_causes_) + "}");
    if (s.treatment != 0 && s.treatment != 1)
      throw ValidationError("subject " + s.id + ": treatment must be 0 or 1");
    if (static_cast<int>(s.covariates.size()) != p_)
      throw ValidationError("subject " + s.id + ": covariate length mismatch");
    for (Eigen::Index j = 0; j < s.covariates.size(); ++j) {
      if (!std::isfinite(s.covariates[j]))
        throw ValidationError("subject " + s.id + ": covariate z" +
                              std::to_string(j + 1) + " not finite");
    }
  }

  // No-ties assumption: reject duplicates, or jitter when explicitly enabled.
  {
    std::map<double, std::vector<std::string>> groups;
    for (const auto& s : subjects_) groups[s.time].push_back(s.id);
    bool has_tie = false;
    std::ostringstream offenders;
    for (const auto& [t, ids] : groups) {
      if (ids.size() > 1) {
        has_tie = true;
        offenders << " t=" << t << " (ids:";
        for (const auto& id : ids) offenders << ' ' << id;
        offenders << ')';
      }
    }
    had_ties_ = has_tie;
    if (has_tie) {
      if (!opts_.jitter_ties)
        throw ValidationError("tied observation times:" + offenders.str());
      apply_jitter(subjects_, opts_.jitter_seed);
      jitter_applied_ = true;
    }
  }

  double max_time = 0.0;
  for (const auto& s : subjects_) max_time = std::max(max_time, s.time);
  tau_ = opts_.tau > 0.0 ? opts_.tau : max_time;

  design_.resize(n(), p_ + 1);
  for (int i = 0; i < n(); ++i) {
    design_(i, 0) = static_cast<double>(subjects_[i].treatment);
    design_.row(i).tail(p_) = subjects_[i].covariates.transpose();
  }

  order_.resize(subjects_.size());
  std::iota(order_.begin(), order_.end(), 0);
  std::sort(order_.begin(), order_.end(),
            [this](int a, int b) { return subjects_[a].time < subjects_[b].time; });

  event_counts_.assign(n_causes_, 0);
  for (const auto& s : subjects_)
    if (s.status >= 1 && s.time > 0.0 && s.time <= tau_) ++event_counts_[s.status - 1];
}

int risk_set_size(const Dataset& ds, double t) {
  if (t < 0.0) throw ValidationError("risk_set_size: t must be >= 0");
  int count = 0;
  for (int i = 0; i < ds.n(); ++i)
    if (ds.time(i) >= t) ++count;
  return count;
}

Dataset parse_dataset(const std::string& csv_text, int n_causes, DatasetOptions opts) {
  std::istringstream in(csv_text);
  std::string line;
  int lineno = 0;

  auto split = [](const std::string& s) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(s);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!s.empty() && s.back() == ',') fields.emplace_back();
    return fields;
  };
  auto parse_num = [](const std::string& s, int lineno, const std::string& what) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &pos);
    } catch (const std::exception&) {
      throw ParseError("line " + std::to_string(lineno) + ": cannot parse " + what +
                       " from '" + s + "'");
    }
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size())
      throw ParseError("line " + std::to_string(lineno) + ": trailing junk in " + what +
                       " '" + s + "'");
    return v;
  };

  // Header.
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    header = split(line);
    break;
  }
  if (header.size() < 4 || header[0] != "id" || header[1] != "time" ||
      header[2] != "status" || header[3] != "treatment")
    throw ParseError("header must be id,time,status,treatment,z1..zp");
  const int p = static_cast<int>(header.size()) - 4;
  for (int j = 0; j < p; ++j)
    if (header[4 + j] != "z" + std::to_string(j + 1))
      throw ParseError("header: expected column z" + std::to_string(j + 1) +
                       ", found '" + header[4 + j] + "'");

  std::vector<Subject> subjects;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto fields = split(line);
    if (static_cast<int>(fields.size()) != p + 4)
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                       std::to_string(p + 4) + " fields, found " +
                       std::to_string(fields.size()));
    Subject s;
    s.id = fields[0];
    s.time = parse_num(fields[1], lineno, "time");
    const double status = parse_num(fields[2], lineno, "status");
    if (status != std::floor(status))
      throw ParseError("line " + std::to_string(lineno) + ": status must be integer");
    s.status = static_cast<int>(status);
    const double treatment = parse_num(fields[3], lineno, "treatment");
    if (treatment != 0.0 && treatment != 1.0)
      throw ParseError("line " + std::to_string(lineno) + ": treatment must be 0 or 1");
    s.treatment = static_cast<int>(treatment);
    s.covariates.resize(p);
    for (int j = 0; j < p; ++j)
      s.covariates[j] = parse_num(fields[4 + j], lineno, "z" + std::to_string(j + 1));
    subjects.push_back(std::move(s));
  }
  return Dataset(std::move(subjects), n_causes, opts);
}

DataReport validate(const Dataset& ds, int min_at_risk_warn) {
  DataReport report;
  report.had_ties = ds.had_ties();
  report.jitter_applied = ds.jitter_applied();
  report.events_per_cause.assign(ds.n_causes(), 0);
  for (int k = 1; k <= ds.n_causes(); ++k) {
    report.events_per_cause[k - 1] = ds.event_count(k);
    if (ds.event_count(k) == 0) {
      report.unfittable_causes.push_back(k);
      report.warnings.push_back("cause " + std::to_string(k) +
                                " has zero events in (0, tau]: unfittable");
    }
  }
  for (int i = 0; i < ds.n(); ++i)
    if (ds.status(i) == 0) ++report.n_censored;

  report.min_at_risk = risk_set_size(ds, ds.tau());
  if (report.min_at_risk < min_at_risk_warn)
    report.warnings.push_back("minimum at-risk count over [0, tau] is " +
                              std::to_string(report.min_at_risk) +
                              " (below threshold " +
                              std::to_string(min_at_risk_warn) + ")");

  for (int i = 0; i < ds.n(); ++i) {
    const auto& z = ds.subject(i).covariates;
    for (Eigen::Index j = 0; j < z.size(); ++j)
      if (std::abs(z[j]) > ds.covariate_cap()) report.covariate_bound_ok = false;
  }
  if (!report.covariate_bound_ok)
    report.warnings.push_back("covariate bound violation");
  return report;
}

}  // namespace ateband
