#include "ateband/gformula.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ateband/errors.hpp"

namespace ateband {

namespace {

// Fits are indexed by cause: fits[k-1] must be the cause-k fit.
void check_fit_order(const std::vector<CoxFit>& fits) {
  for (std::size_t k = 0; k < fits.size(); ++k)
    if (fits[k].cause != static_cast<int>(k) + 1)
      throw ValidationError("fits must be ordered by cause (fits[k] for cause k+1)");
}

struct MergedJump {
  double time;
  int cause;      // 1-based
  double jump;    // baseline increment of that cause
};

std::vector<MergedJump> merge_baselines(const std::vector<CoxFit>& fits) {
  std::vector<MergedJump> merged;
  for (const auto& fit : fits)
    for (Eigen::Index j = 0; j < fit.baseline.n_jumps(); ++j)
      merged.push_back({fit.baseline.times[j], fit.cause, fit.baseline.jump_at(j)});
  std::sort(merged.begin(), merged.end(),
            [](const MergedJump& a, const MergedJump& b) { return a.time < b.time; });
  return merged;
}

double linear_predictor_factor(const CoxFit& fit, int a, const Eigen::VectorXd& z) {
  return std::exp(fit.beta[0] * a + fit.beta.tail(fit.beta.size() - 1).dot(z));
}

}  // namespace

double pairwise_mean(const Eigen::VectorXd& v) {
  const auto n = v.size();
  if (n == 0) return 0.0;
  // Pairwise (cascade) summation: result independent of chunked reorderings.
  std::function<double(Eigen::Index, Eigen::Index)> sum =
      [&](Eigen::Index lo, Eigen::Index hi) -> double {
    if (hi - lo <= 8) {
      double s = 0.0;
      for (Eigen::Index i = lo; i < hi; ++i) s += v[i];
      return s;
    }
    const Eigen::Index mid = lo + (hi - lo) / 2;
    return sum(lo, mid) + sum(mid, hi);
  };
  return sum(0, n) / static_cast<double>(n);
}

StepFunction cumulative_hazard(const CoxFit& fit, int a, const Eigen::VectorXd& z) {
  if (!fit.converged) throw FitError("cumulative_hazard requires a converged fit");
  const double factor = linear_predictor_factor(fit, a, z);
  return StepFunction(fit.baseline.times, fit.baseline.values * factor, 0.0);
}

StepFunction survival_curve(const std::vector<CoxFit>& fits, int a,
                            const Eigen::VectorXd& z) {
  check_fit_order(fits);
  std::vector<double> factors;
  for (const auto& fit : fits) {
    if (!fit.converged) throw FitError("survival_curve requires converged fits");
    factors.push_back(linear_predictor_factor(fit, a, z));
  }
  const auto merged = merge_baselines(fits);
  Eigen::VectorXd times(merged.size()), values(merged.size());
  double cum = 0.0;
  for (std::size_t j = 0; j < merged.size(); ++j) {
    cum += merged[j].jump * factors[merged[j].cause - 1];
    times[j] = merged[j].time;
    values[j] = std::exp(-cum);
  }
  return StepFunction(std::move(times), std::move(values), 1.0);
}

StepFunction cif1(const std::vector<CoxFit>& fits, int a, const Eigen::VectorXd& z) {
  check_fit_order(fits);
  std::vector<double> factors;
  for (const auto& fit : fits) {
    if (!fit.converged) throw FitError("cif1 requires converged fits");
    factors.push_back(linear_predictor_factor(fit, a, z));
  }
  const auto merged = merge_baselines(fits);
  std::vector<double> t1, v1;
  double cum = 0.0;
  double f1 = 0.0;
  for (const auto& mj : merged) {
    if (mj.cause == 1) {
      const double s_left = std::exp(-cum);
      f1 += s_left * mj.jump * factors[0];
      t1.push_back(mj.time);
      v1.push_back(f1);
    }
    cum += mj.jump * factors[mj.cause - 1];
  }
  return StepFunction(Eigen::Map<Eigen::VectorXd>(t1.data(), t1.size()),
                      Eigen::Map<Eigen::VectorXd>(v1.data(), v1.size()), 0.0);
}

Eigen::VectorXd default_grid(const Dataset& ds, const std::vector<CoxFit>& fits) {
  std::vector<double> pts{0.0};
  for (const auto& fit : fits)
    if (fit.cause == 1)
      for (Eigen::Index j = 0; j < fit.baseline.n_jumps(); ++j)
        if (fit.baseline.times[j] <= ds.tau()) pts.push_back(fit.baseline.times[j]);
  std::sort(pts.begin(), pts.end());
  return Eigen::Map<Eigen::VectorXd>(pts.data(), pts.size());
}

AteCurve ate_estimate(const std::vector<CoxFit>& fits, const Dataset& ds,
                      const Eigen::VectorXd& grid, const Eigen::VectorXd* weights) {
  check_fit_order(fits);
  const int n = ds.n();
  const int p = ds.n_covariates();
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (grid[g] < 0.0 || grid[g] > ds.tau())
      throw ValidationError("ate_estimate: grid point outside [0, tau]");
    if (g > 0 && !(grid[g] > grid[g - 1]))
      throw ValidationError("ate_estimate: grid must be strictly increasing");
  }
  const Eigen::MatrixXd z = ds.design().rightCols(p);

  // Per-arm, per-cause relative risks exp(beta_A a + beta_Z' Z_i).
  std::vector<Eigen::ArrayXd> rr[2];
  for (int a = 0; a < 2; ++a)
    for (const auto& fit : fits) {
      if (!fit.converged) throw FitError("ate_estimate requires converged fits");
      rr[a].push_back(
          (z * fit.beta.tail(p) + Eigen::VectorXd::Constant(n, fit.beta[0] * a))
              .array()
              .exp());
    }

  const auto merged = merge_baselines(fits);
  Eigen::ArrayXd log_s[2] = {Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n)};
  Eigen::ArrayXd f1[2] = {Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n)};

  AteCurve out;
  out.grid = grid;
  out.estimate.resize(grid.size());
  out.n = n;

  auto record = [&](Eigen::Index g) {
    Eigen::VectorXd diff = (f1[1] - f1[0]).matrix();
    if (weights) diff = diff.cwiseProduct(*weights);
    out.estimate[g] = pairwise_mean(diff);
  };

  Eigen::Index g = 0;
  for (const auto& mj : merged) {
    if (mj.time > ds.tau()) break;
    while (g < grid.size() && grid[g] < mj.time) record(g++);
    const int c = mj.cause - 1;
    if (mj.cause == 1)
      for (int a = 0; a < 2; ++a)
        f1[a] += log_s[a].exp() * (mj.jump * rr[a][0]);
    for (int a = 0; a < 2; ++a) log_s[a] -= mj.jump * rr[a][c];
  }
  while (g < grid.size()) record(g++);
  return out;
}

}  // namespace ateband
