#include "ateband/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "ateband/errors.hpp"
#include "ateband/parallel.hpp"
#include "ateband/rng.hpp"

namespace ateband {

namespace {

// Order statistic at position ceil(level * B), 1-indexed.
double empirical_quantile(std::vector<double> vals, double level) {
  const auto b = static_cast<Eigen::Index>(vals.size());
  Eigen::Index idx = static_cast<Eigen::Index>(std::ceil(level * b)) - 1;
  idx = std::clamp<Eigen::Index>(idx, 0, b - 1);
  std::nth_element(vals.begin(), vals.begin() + idx, vals.end());
  return vals[idx];
}

void check_band_inputs(const AteCurve& ate, const ResampleEnsemble& ens,
                       double level) {
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("confidence level must lie in (0, 1)");
  if (ens.grid.size() != ate.grid.size() ||
      (ens.grid.array() != ate.grid.array()).any())
    throw ValidationError("ensemble and estimate grids differ");
  if (ens.B < 100)
    throw ValidationError("need at least 100 replicates");
  if (ens.B < 2.0 / (1.0 - level))
    throw ValidationError("too few replicates for the requested level");
}

void check_finite(const Eigen::MatrixXd& paths, const std::string& method) {
  if (!paths.allFinite())
    throw FitError(method + ": non-finite replicate path");
}

}  // namespace

Eigen::VectorXd multiplier_draw(const std::string& kind, int n, RngStream& stream) {
  if (n < 1) throw ValidationError("multiplier_draw: n must be >= 1");
  Eigen::VectorXd out(n);
  if (kind == "normal") {
    for (int i = 0; i < n; ++i) out[i] = stream.normal();
  } else if (kind == "poisson") {
    for (int i = 0; i < n; ++i) out[i] = stream.poisson_unit() - 1.0;
  } else {
    throw ValidationError("unknown multiplier kind: " + kind);
  }
  return out;
}

ResampleEnsemble wild_bootstrap(const TildeH& th, const Dataset& ds, int B,
                                const std::string& kind, std::uint64_t seed,
                                const Eigen::MatrixXd* multipliers) {
  if (B < 1) throw ValidationError("wild_bootstrap: B must be >= 1");
  const EventPaths ep = event_paths(th, ds);
  const auto m = static_cast<Eigen::Index>(ep.subjects.size());

  Eigen::MatrixXd g(B, m);
  if (multipliers) {
    if (multipliers->rows() != B || multipliers->cols() != m)
      throw ValidationError("injected multipliers must be B x #events");
    g = *multipliers;
  } else {
    for (int b = 0; b < B; ++b) {
      RngStream stream(seed, static_cast<std::uint64_t>(b));
      g.row(b) = multiplier_draw(kind, static_cast<int>(m), stream).transpose();
    }
  }

  ResampleEnsemble ens;
  ens.method = "wild";
  ens.multiplier = kind;
  ens.grid = th.grid;
  ens.seed = seed;
  ens.B = ens.requested_B = B;
  ens.paths.noalias() = g * ep.x;
  check_finite(ens.paths, ens.method);
  return ens;
}

ResampleEnsemble wild_bootstrap(const std::vector<CoxFit>& fits, const Dataset& ds,
                                const Eigen::VectorXd& grid, int B,
                                const std::string& kind, std::uint64_t seed,
                                const Eigen::MatrixXd* multipliers) {
  return wild_bootstrap(tilde_h_curves(fits, ds, grid), ds, B, kind, seed,
                        multipliers);
}

ResampleEnsemble if_resample(const InfluenceCurves& curves, int B, std::uint64_t seed,
                             const Eigen::MatrixXd* multipliers) {
  if (B < 1) throw ValidationError("if_resample: B must be >= 1");
  if (!curves.values.allFinite())
    throw ValidationError("if_resample: influence curves must be finite");
  const Eigen::Index n = curves.values.rows();

  Eigen::MatrixXd g(B, n);
  if (multipliers) {
    if (multipliers->rows() != B || multipliers->cols() != n)
      throw ValidationError("injected multipliers must be B x n");
    g = *multipliers;
  } else {
    for (int b = 0; b < B; ++b) {
      RngStream stream(seed, static_cast<std::uint64_t>(b));
      g.row(b) = multiplier_draw("normal", static_cast<int>(n), stream).transpose();
    }
  }

  ResampleEnsemble ens;
  ens.method = "influence";
  ens.multiplier = "normal";
  ens.grid = curves.grid;
  ens.seed = seed;
  ens.B = ens.requested_B = B;
  ens.paths.noalias() = g * curves.values / std::sqrt(static_cast<double>(n));
  check_finite(ens.paths, ens.method);
  return ens;
}

ResampleEnsemble efron_bootstrap(const Dataset& ds, const Eigen::VectorXd& grid, int B,
                                 std::uint64_t seed, CoxOptions fit_options,
                                 const Eigen::MatrixXd* weights, int n_threads) {
  if (B < 1) throw ValidationError("efron_bootstrap: B must be >= 1");
  if (weights && (weights->rows() != B || weights->cols() != ds.n()))
    throw ValidationError("injected weights must be B x n");
  const int n = ds.n();
  const int K = ds.n_causes();
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  std::vector<CoxFit> fits;
  for (int k = 1; k <= K; ++k)
    fits.push_back(fit_cause_specific_cox(ds, k, fit_options));
  const AteCurve base = ate_estimate(fits, ds, grid);

  Eigen::MatrixXd paths(B, grid.size());
  std::vector<char> ok(B, 0);
  std::vector<std::string> first_error(B);

  parallel_for(B, n_threads, [&](int b) {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    if (weights) {
      w = weights->row(b).transpose();
    } else {
      RngStream stream(seed, static_cast<std::uint64_t>(b));
      for (int i = 0; i < n; ++i)
        w[static_cast<int>(stream.uniform_index(n))] += 1.0;
    }
    try {
      std::vector<CoxFit> refits;
      for (int k = 1; k <= K; ++k)
        refits.push_back(
            fit_cause_specific_cox(ds, k, fit_options, &w, &fits[k - 1].beta));
      const AteCurve star = ate_estimate(refits, ds, grid, &w);
      paths.row(b) = sqrt_n * (star.estimate - base.estimate).transpose();
      ok[b] = 1;
    } catch (const std::exception& e) {
      first_error[b] = e.what();
    }
  });

  ResampleEnsemble ens;
  ens.method = "efron";
  ens.multiplier = "none";
  ens.grid = grid;
  ens.seed = seed;
  ens.requested_B = B;
  int kept = 0;
  for (int b = 0; b < B; ++b) kept += ok[b];
  ens.failures = B - kept;
  if (ens.failures > 0.1 * B) {
    std::string detail;
    for (int b = 0; b < B && detail.empty(); ++b)
      if (!ok[b]) detail = first_error[b];
    throw FitError("efron_bootstrap: " + std::to_string(ens.failures) + " of " +
                   std::to_string(B) + " refits failed (first: " + detail + ")");
  }
  ens.B = kept;
  ens.paths.resize(kept, grid.size());
  int row = 0;
  for (int b = 0; b < B; ++b)
    if (ok[b]) ens.paths.row(row++) = paths.row(b);
  check_finite(ens.paths, ens.method);
  return ens;
}

ConfidenceBand pointwise_ci(const AteCurve& ate, const ResampleEnsemble& ens,
                            double level) {
  check_band_inputs(ate, ens, level);
  const double sqrt_n = std::sqrt(static_cast<double>(ate.n));
  const Eigen::Index G = ate.grid.size();

  ConfidenceBand band;
  band.grid = ate.grid;
  band.estimate = ate.estimate;
  band.lower.resize(G);
  band.upper.resize(G);
  band.level = level;
  band.method = ens.method + "-pointwise";

  for (Eigen::Index g = 0; g < G; ++g) {
    std::vector<double> abs_vals(ens.B);
    for (int b = 0; b < ens.B; ++b) abs_vals[b] = std::abs(ens.paths(b, g));
    const double half = empirical_quantile(std::move(abs_vals), level) / sqrt_n;
    band.lower[g] = std::max(ate.estimate[g] - half, -1.0);
    band.upper[g] = std::min(ate.estimate[g] + half, 1.0);
  }
  return band;
}

ConfidenceBand simultaneous_band(const AteCurve& ate, const ResampleEnsemble& ens,
                                 double level, bool stabilize,
                                 const Eigen::VectorXd* xi_diag) {
  check_band_inputs(ate, ens, level);
  const Eigen::Index G = ate.grid.size();
  const double sqrt_n = std::sqrt(static_cast<double>(ate.n));

  Eigen::VectorXd w = Eigen::VectorXd::Ones(G);
  if (stabilize) {
    if (!xi_diag || xi_diag->size() != G)
      throw ValidationError("stabilized band requires xi_hat(t,t) on the grid");
    for (Eigen::Index g = 0; g < G; ++g) {
      if (ate.grid[g] > 0.0 && !((*xi_diag)[g] > 0.0))
        throw ValidationError("stabilized band: vanishing variance inside the grid");
      w[g] = std::sqrt(std::max((*xi_diag)[g], 0.0));
    }
  }

  std::vector<double> sups(ens.B, 0.0);
  for (int b = 0; b < ens.B; ++b) {
    double sup = 0.0;
    for (Eigen::Index g = 0; g < G; ++g)
      if (w[g] > 0.0) sup = std::max(sup, std::abs(ens.paths(b, g)) / w[g]);
    sups[b] = sup;
  }
  const double c = empirical_quantile(std::move(sups), level);

  ConfidenceBand band;
  band.grid = ate.grid;
  band.estimate = ate.estimate;
  band.lower.resize(G);
  band.upper.resize(G);
  band.level = level;
  band.method = ens.method + (stabilize ? "-band-stabilized" : "-band");
  band.sup_quantile = c;
  for (Eigen::Index g = 0; g < G; ++g) {
    const double half = c * w[g] / sqrt_n;
    band.lower[g] = std::max(ate.estimate[g] - half, -1.0);
    band.upper[g] = std::min(ate.estimate[g] + half, 1.0);
  }
  return band;
}

}  // namespace ateband
