#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "ateband/dataset.hpp"
#include "ateband/step_function.hpp"

namespace ateband {

// Risk-set weighted sums S^(0), S^(1), S^(2) and their ratio E = S^(1)/S^(0)
// at a single time point. s0 == 0 signals an empty risk set.
struct WeightedSums {
  double s0 = 0.0;
  Eigen::VectorXd s1;
  Eigen::MatrixXd s2;
  Eigen::VectorXd e;
};

struct CoxOptions {
  double score_tol = 1e-8;       // max-norm of the score at convergence
  double step_tol = 1e-10;       // max-norm of the Newton step
  int max_iterations = 50;
  int max_halvings = 20;
  double separation_cap = 50.0;  // ||beta||_inf beyond this means separation
};

// Result of one cause-specific fit: beta ordered (beta_A, beta_Z), Breslow
// cumulative baseline hazard, and the observed information at beta.
struct CoxFit {
  int cause = 1;
  Eigen::VectorXd beta;
  StepFunction baseline;
  Eigen::MatrixXd information;
  int iterations = 0;
  bool converged = false;
};

WeightedSums weighted_sums(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                           double t);

// Optional per-subject weights realize the multinomial-weights view of a
// bootstrap sample; nullptr means all weights 1.
double log_partial_likelihood(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd* weights = nullptr);

std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_information(
    const Dataset& ds, int cause, const Eigen::VectorXd& beta,
    const Eigen::VectorXd* weights = nullptr);

StepFunction breslow_baseline(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd* weights = nullptr);

// Newton-Raphson on the log partial likelihood, started at beta = 0 (or at
// `warm_start`), with step-halving. Throws FitError on separation or
// non-convergence, SingularMatrixError on a singular information matrix.
CoxFit fit_cause_specific_cox(const Dataset& ds, int cause, CoxOptions opts = {},
                              const Eigen::VectorXd* weights = nullptr,
                              const Eigen::VectorXd* warm_start = nullptr);

// Plug-in estimate of the per-cause information-per-subject matrix; equals
// information(beta-hat) / n. Throws SingularMatrixError when numerically
// singular (smallest eigenvalue < 1e-12 * trace).
Eigen::MatrixXd sigma_hat(const Dataset& ds, const CoxFit& fit);

}  // namespace ateband
