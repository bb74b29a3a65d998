#pragma once

#include <Eigen/Core>
#include <vector>

#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"
#include "ateband/step_function.hpp"

namespace ateband {

// G-formula average treatment effect curve on an evaluation grid.
struct AteCurve {
  Eigen::VectorXd grid;
  Eigen::VectorXd estimate;
  int n = 0;
};

// Lambda_k(t | a, z) = Lambda_0k(t) * exp(beta_A a + beta_Z' z).
StepFunction cumulative_hazard(const CoxFit& fit, int a, const Eigen::VectorXd& z);

// S(t | a, z) = exp(-sum_k Lambda_k(t | a, z)); jumps at every event time.
StepFunction survival_curve(const std::vector<CoxFit>& fits, int a,
                            const Eigen::VectorXd& z);

// F_1(t | a, z) with jumps S(u- | a, z) * dLambda_1(u | a, z) at cause-1
// event times.
StepFunction cif1(const std::vector<CoxFit>& fits, int a, const Eigen::VectorXd& z);

// t = 0 plus all cause-1 event times in (0, tau].
Eigen::VectorXd default_grid(const Dataset& ds, const std::vector<CoxFit>& fits);

// (1/n) sum_i [F_1(t | A=1, Z_i) - F_1(t | A=0, Z_i)] at each grid point.
// Optional weights give the weighted empirical covariate distribution of a
// bootstrap sample (weights sum to n).
AteCurve ate_estimate(const std::vector<CoxFit>& fits, const Dataset& ds,
                      const Eigen::VectorXd& grid,
                      const Eigen::VectorXd* weights = nullptr);

// Order-insensitive mean via pairwise summation.
double pairwise_mean(const Eigen::VectorXd& v);

}  // namespace ateband
