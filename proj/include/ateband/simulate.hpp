#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "ateband/dataset.hpp"
#include "ateband/gformula.hpp"

namespace ateband {

// Known-truth data generator: proportional cause-specific hazards
// lambda_k(t|a,z) = lambda0_k shape_k t^(shape_k - 1) exp(beta_k' (a, z)),
// logistic treatment assignment, independent exponential censoring,
// covariates i.i.d. uniform on [-1, 1].
struct Scenario {
  std::string name = "default";
  int K = 2;
  int p = 2;
  std::vector<Eigen::VectorXd> beta;  // per cause, length p+1, treatment first
  Eigen::VectorXd lambda0;            // per cause, > 0
  Eigen::VectorXd shape;              // per cause Weibull shape; 1 = constant hazard
  Eigen::VectorXd treatment_coef;     // length p+1: logit intercept, then z
  double lambda_c = 0.0;              // censoring rate, >= 0

  void check() const;
};

// Confounded default: treatment coefficient 1 on z1, visible treatment
// benefit on cause 1.
Scenario default_scenario();

Dataset generate_dataset(const Scenario& sc, int n, std::uint64_t seed,
                         double tau = -1.0);

// Population ATE(t) = E_Z[F1(t|1,Z) - F1(t|0,Z)]. Constant hazards use the
// closed form; Weibull shapes fall back to adaptive quadrature (tol 1e-6).
// The Z expectation is quasi-Monte Carlo with qmc_nodes points.
AteCurve true_ate(const Scenario& sc, const Eigen::VectorXd& grid,
                  int qmc_nodes = 100000);

struct CoverageReport {
  std::string scenario;
  std::string method;
  double level = 0.0;
  int n = 0;
  int reps = 0;
  int B = 0;
  std::uint64_t seed = 0;
  Eigen::VectorXd grid;
  Eigen::VectorXd truth;
  Eigen::VectorXd pointwise;      // per-grid-point coverage
  double simultaneous = 0.0;
  double mean_width = 0.0;        // mean simultaneous band width
  int failures = 0;
};

// Monte-Carlo check that the resampling bands cover the known truth. An
// empty grid picks 5 observed-time quantiles from a calibration sample.
CoverageReport coverage_experiment(const Scenario& sc, int n, int reps, int B,
                                   const std::string& method, double level,
                                   std::uint64_t seed, int n_threads = 1,
                                   Eigen::VectorXd grid = Eigen::VectorXd());

}  // namespace ateband
