#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ateband/errors.hpp"

namespace ateband {

// One observation: (T ^ C, D, A, Z). status 0 means censored, k in {1..K}
// the observed cause of failure.
struct Subject {
  std::string id;
  double time = 0.0;
  int status = 0;
  int treatment = 0;
  Eigen::VectorXd covariates;
};

struct DatasetOptions {
  bool jitter_ties = false;     // ties are rejected unless this is set
  std::uint64_t jitter_seed = 0;
  double covariate_cap = 1e6;
  double tau = -1.0;            // <= 0: default to max observed time
};

// Immutable competing-risks sample. Construction validates every invariant;
// afterwards the object is safe for concurrent shared reads.
class Dataset {
 public:
  Dataset(std::vector<Subject> subjects, int n_causes, DatasetOptions opts = {});

  int n() const { return static_cast<int>(subjects_.size()); }
  int n_causes() const { return n_causes_; }
  int n_covariates() const { return p_; }
  double tau() const { return tau_; }
  double covariate_cap() const { return opts_.covariate_cap; }

  const Subject& subject(int i) const { return subjects_[i]; }
  double time(int i) const { return subjects_[i].time; }
  int status(int i) const { return subjects_[i].status; }

  // Row i of the regression design: (A_i, Z_i^T)^T, length p+1.
  Eigen::VectorXd design_row(int i) const { return design_.row(i).transpose(); }
  const Eigen::MatrixXd& design() const { return design_; }

  // Subject indices ordered by observed time, ascending.
  const std::vector<int>& sorted_order() const { return order_; }

  // Number of cause-k events in (0, tau].
  int event_count(int cause) const {
    if (cause < 1 || cause > n_causes_)
      throw ValidationError("cause " + std::to_string(cause) + " outside {1.." +
                            std::to_string(n_causes_) + "}");
    return event_counts_[cause - 1];
  }

  bool had_ties() const { return had_ties_; }
  bool jitter_applied() const { return jitter_applied_; }

 private:
  std::vector<Subject> subjects_;
  int n_causes_;
  int p_;
  double tau_;
  DatasetOptions opts_;
  Eigen::MatrixXd design_;
  std::vector<int> order_;
  std::vector<int> event_counts_;
  bool had_ties_ = false;
  bool jitter_applied_ = false;
};

// Y(t) = #\{i : time_i >= t\}; nonincreasing in t.
int risk_set_size(const Dataset& ds, double t);

// CSV schema: header `id,time,status,treatment,z1..zp`, UTF-8, '.' decimal
// separator, lines starting with '#' ignored.
Dataset parse_dataset(const std::string& csv_text, int n_causes,
                      DatasetOptions opts = {});

struct DataReport {
  bool had_ties = false;
  bool jitter_applied = false;
  std::vector<int> events_per_cause;    // length K
  std::vector<int> unfittable_causes;   // causes with zero events in (0, tau]
  int n_censored = 0;
  int min_at_risk = 0;                  // inf over [0, tau] of Y(u)
  bool covariate_bound_ok = true;
  std::vector<std::string> warnings;
};

// Report-only diagnostics; never throws on content findings.
DataReport validate(const Dataset& ds, int min_at_risk_warn = 10);

}  // namespace ateband
