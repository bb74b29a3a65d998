#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "ateband/asymptotics.hpp"
#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"
#include "ateband/gformula.hpp"

namespace ateband {

// Replicates of the centered sqrt(n)-scaled ATE process. paths holds one
// replicate per row; for efron, failed refits are excluded so B counts the
// rows actually kept.
struct ResampleEnsemble {
  std::string method;      // "efron" | "wild" | "influence"
  std::string multiplier;  // "normal" | "poisson" | "none"
  Eigen::VectorXd grid;
  Eigen::MatrixXd paths;   // B x |grid|
  std::uint64_t seed = 0;
  int B = 0;
  int requested_B = 0;
  int failures = 0;
};

struct ConfidenceBand {
  Eigen::VectorXd grid;
  Eigen::VectorXd estimate;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double level = 0.0;
  std::string method;
  double sup_quantile = 0.0;
};

class RngStream;

// i.i.d. mean-zero unit-variance multipliers: standard normal, or centered
// unit Poisson (P - 1).
Eigen::VectorXd multiplier_draw(const std::string& kind, int n, RngStream& stream);

// Multiplier perturbation of the estimated martingale summands: replicate b
// is sum_i G_bi X_i(t) over event subjects. `multipliers` (B x #events)
// overrides the drawn values; meant for tests.
ResampleEnsemble wild_bootstrap(const std::vector<CoxFit>& fits, const Dataset& ds,
                                const Eigen::VectorXd& grid, int B,
                                const std::string& kind, std::uint64_t seed,
                                const Eigen::MatrixXd* multipliers = nullptr);
ResampleEnsemble wild_bootstrap(const TildeH& th, const Dataset& ds, int B,
                                const std::string& kind, std::uint64_t seed,
                                const Eigen::MatrixXd* multipliers = nullptr);

// (1/sqrt(n)) sum_i IF_i(t) G_bi with standard normal multipliers.
ResampleEnsemble if_resample(const InfluenceCurves& curves, int B, std::uint64_t seed,
                             const Eigen::MatrixXd* multipliers = nullptr);

// Multinomial-weight nonparametric bootstrap: refit every cause-specific
// model under resampling weights, recompute the g-formula curve, path =
// sqrt(n) (ATE*_b - ATE). Failed refits are excluded and counted; more than
// 10% failures aborts. `weights` (B x n) overrides the drawn multinomial
// counts; meant for tests.
ResampleEnsemble efron_bootstrap(const Dataset& ds, const Eigen::VectorXd& grid, int B,
                                 std::uint64_t seed, CoxOptions fit_options = {},
                                 const Eigen::MatrixXd* weights = nullptr,
                                 int n_threads = 1);

// Symmetric percentile interval: estimate +- q_{level}(|path(t)|)/sqrt(n),
// clamped to [-1, 1].
ConfidenceBand pointwise_ci(const AteCurve& ate, const ResampleEnsemble& ens,
                            double level);

// Sup-statistic band: c = empirical level-quantile of sup_t |path(t)|/w(t);
// w = 1, or xi_hat(t,t)^(1/2) when stabilized (xi_diag required then).
ConfidenceBand simultaneous_band(const AteCurve& ate, const ResampleEnsemble& ens,
                                 double level, bool stabilize = false,
                                 const Eigen::VectorXd* xi_diag = nullptr);

}  // namespace ateband
