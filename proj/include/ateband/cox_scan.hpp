#pragma once

#include <Eigen/Core>
#include <vector>

#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"

namespace ateband {

// One pass over the risk sets at a fixed beta. Events are ordered by
// ascending time; s0 and e are S^(0)(beta, t_j) and E(beta, t_j) at the j-th
// cause-k event time.
struct CoxScan {
  double loglik = 0.0;
  Eigen::VectorXd score;
  Eigen::MatrixXd information;
  std::vector<int> event_subjects;
  Eigen::VectorXd event_times;
  Eigen::VectorXd event_weights;
  Eigen::VectorXd s0;
  Eigen::MatrixXd e;  // (p+1) x #events
};

CoxScan cox_scan(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                 const Eigen::VectorXd* weights = nullptr,
                 bool need_information = true);

}  // namespace ateband
