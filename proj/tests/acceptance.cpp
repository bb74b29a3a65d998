// Acceptance gate: one PASS/FAIL line per criterion, exit code = #failures.
// Default is a fast profile; --full runs the larger Monte-Carlo sizes.
#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include "ateband/asymptotics.hpp"
#include "ateband/cox.hpp"
#include "ateband/errors.hpp"
#include "ateband/gformula.hpp"
#include "ateband/resampling.hpp"
#include "ateband/rng.hpp"
#include "ateband/simulate.hpp"
#include "helpers.hpp"

using namespace ateband;

namespace {

bool g_full = false;
int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::printf("%s: %s%s%s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.empty() ? "" : " -- ", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failures;
}

void run(const std::string& name, const std::function<std::pair<bool, std::string>()>& fn) {
  try {
    const auto [ok, detail] = fn();
    report(name, ok, detail);
  } catch (const std::exception& e) {
    report(name, false, std::string("exception: ") + e.what());
  }
}

Scenario scalar_scenario() {
  Scenario sc;
  sc.name = "scalar";
  sc.K = 2;
  sc.p = 0;
  sc.beta = {(Eigen::VectorXd(1) << -0.5).finished(),
             (Eigen::VectorXd(1) << 0.4).finished()};
  sc.lambda0 = (Eigen::VectorXd(2) << 0.8, 0.4).finished();
  sc.shape = Eigen::VectorXd::Ones(2);
  sc.treatment_coef = Eigen::VectorXd::Zero(1);
  sc.lambda_c = 0.2;
  return sc;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double ks = 0.0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    ks = std::max(ks, std::abs(static_cast<double>(i) / a.size() -
                               static_cast<double>(j) / b.size()));
  }
  return ks;
}

// ---- 1: the Newton solver lands on the partial-likelihood argmax.
std::pair<bool, std::string> crit_newton_argmax() {
  const Scenario sc = scalar_scenario();
  double worst_gap = 0.0, worst_fd = 0.0;
  for (int s = 0; s < 20; ++s) {
    const Dataset ds = generate_dataset(sc, 100, 1000 + s);
    const auto fit = fit_cause_specific_cox(ds, 1);

    auto lpl = [&](double b) {
      return log_partial_likelihood(ds, 1, Eigen::VectorXd::Constant(1, b));
    };
    double best = -2.0, best_val = lpl(-2.0);
    for (double b = -2.0; b <= 2.0; b += 1e-2) {
      const double v = lpl(b);
      if (v > best_val) best_val = v, best = b;
    }
    for (double b = best - 0.02; b <= best + 0.02; b += 1e-4) {
      const double v = lpl(b);
      if (v > best_val) best_val = v, best = b;
    }
    worst_gap = std::max(worst_gap, std::abs(fit.beta[0] - best));

    const Eigen::VectorXd probe = Eigen::VectorXd::Constant(1, 0.3);
    const double analytic = score_and_information(ds, 1, probe).first[0];
    const double h = 1e-6;
    const double fd = (lpl(0.3 + h) - lpl(0.3 - h)) / (2 * h);
    worst_fd = std::max(worst_fd,
                        std::abs(analytic - fd) / (1.0 + std::abs(analytic)));
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "max |beta - argmax| = %.2e, max score FD err = %.2e",
                worst_gap, worst_fd);
  return {worst_gap < 1e-3 && worst_fd < 1e-6, buf};
}

// ---- 2: the baseline estimator reduces to 1/Y increments at beta = 0.
std::pair<bool, std::string> crit_baseline_nelson_aalen() {
  const Scenario sc = default_scenario();
  double worst = 0.0;
  for (int s = 0; s < 10; ++s) {
    const Dataset ds = generate_dataset(sc, 80, 2000 + s);
    for (int k = 1; k <= 2; ++k) {
      const auto bl =
          breslow_baseline(ds, k, Eigen::VectorXd::Zero(ds.n_covariates() + 1));
      double cum = 0.0;
      for (Eigen::Index j = 0; j < bl.n_jumps(); ++j) {
        cum += 1.0 / risk_set_size(ds, bl.times[j]);
        worst = std::max(worst, std::abs(bl.values[j] - cum));
      }
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "max deviation = %.2e", worst);
  return {worst < 1e-12, buf};
}

// ---- 3: the plug-in variance matches the Monte-Carlo variance of the
// ---- sqrt(n)-scaled estimator.
std::pair<bool, std::string> crit_variance_consistency() {
  const Scenario sc = default_scenario();
  const int n = 400;
  const int reps = g_full ? 2000 : 800;
  Eigen::VectorXd grid(3);
  grid << 0.5, 1.0, 1.5;
  const Eigen::VectorXd truth = true_ate(sc, grid).estimate;

  Eigen::MatrixXd samples(reps, 3);
  Eigen::VectorXd xi_sum = Eigen::VectorXd::Zero(3);
  int kept = 0;
  for (int r = 0; r < reps; ++r) {
    try {
      const Dataset ds = generate_dataset(sc, n, 5000 + r, grid[2]);
      std::vector<CoxFit> fits;
      for (int k = 1; k <= sc.K; ++k) fits.push_back(fit_cause_specific_cox(ds, k));
      const auto ate = ate_estimate(fits, ds, grid);
      const auto th = tilde_h_curves(fits, ds, grid);
      samples.row(kept) =
          std::sqrt(static_cast<double>(n)) * (ate.estimate - truth).transpose();
      xi_sum += xi_diagonal(th);
      ++kept;
    } catch (const FitError&) {
    }
  }
  if (kept < reps * 0.98) return {false, "too many failed replicates"};

  double worst_ratio = 1.0;
  for (int g = 0; g < 3; ++g) {
    const auto col = samples.col(g).head(kept);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().sum() / (kept - 1);
    const double ratio = var / (xi_sum[g] / kept);
    if (std::abs(std::log(ratio)) > std::abs(std::log(worst_ratio)))
      worst_ratio = ratio;
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "reps = %d, worst var ratio = %.3f", kept,
                worst_ratio);
  return {worst_ratio > 0.85 && worst_ratio < 1.15, buf};
}

// ---- 4: the Gram matrix of the event paths converges to the plug-in
// ---- covariance function as n grows.
std::pair<bool, std::string> crit_gram_convergence() {
  const Scenario sc = default_scenario();
  const int sizes[] = {100, 400, 1600};
  const int seeds = g_full ? 20 : 12;
  double med[3] = {0, 0, 0};
  double diag_scale = 0.0;
  for (int s = 0; s < 3; ++s) {
    std::vector<double> disc;
    for (int r = 0; r < seeds; ++r) {
      const Dataset ds = generate_dataset(sc, sizes[s], 7000 + 100 * s + r);
      const auto fits = testutil::fit_all(ds);
      Eigen::VectorXd grid(4);
      for (int g = 0; g < 4; ++g) grid[g] = ds.tau() * (g + 1) / 5.0;
      const auto th = tilde_h_curves(fits, ds, grid);
      const Eigen::MatrixXd xi = xi_matrix(th);
      const Eigen::MatrixXd gram = path_second_moment(fits, ds, grid);
      disc.push_back((gram - xi).cwiseAbs().maxCoeff());
      if (s == 2) diag_scale = std::max(diag_scale, xi.diagonal().maxCoeff());
    }
    std::sort(disc.begin(), disc.end());
    med[s] = disc[disc.size() / 2];
  }
  char buf[128];
  std::snprintf(buf, sizeof(buf), "median gaps %.3g / %.3g / %.3g, scale %.3g",
                med[0], med[1], med[2], diag_scale);
  const bool ok = med[0] >= med[1] && med[1] >= med[2] && med[2] < 0.15 * diag_scale;
  return {ok, buf};
}

// ---- 5: the three resampling schemes draw from the same distribution.
std::pair<bool, std::string> crit_scheme_agreement() {
  const Scenario sc = default_scenario();
  const int n = 500, B = g_full ? 2000 : 1200;
  const Dataset ds = generate_dataset(sc, n, 9001);
  const auto fits = testutil::fit_all(ds);

  std::vector<double> times;
  for (int i = 0; i < ds.n(); ++i)
    if (ds.status(i) > 0) times.push_back(ds.time(i));
  std::sort(times.begin(), times.end());
  Eigen::VectorXd grid(1);
  grid << times[times.size() / 2];

  const auto th = tilde_h_curves(fits, ds, grid);
  std::vector<std::vector<double>> draws;
  std::vector<std::string> names;
  auto add = [&](const ResampleEnsemble& ens, const std::string& name) {
    std::vector<double> v(ens.B);
    for (int b = 0; b < ens.B; ++b) v[b] = ens.paths(b, 0);
    draws.push_back(std::move(v));
    names.push_back(name);
  };
  add(efron_bootstrap(ds, grid, B, 21), "efron");
  add(wild_bootstrap(th, ds, B, "normal", 22), "wild-normal");
  add(wild_bootstrap(th, ds, B, "poisson", 23), "wild-poisson");
  add(if_resample(influence_curves(th, ds), B, 24), "influence");

  double worst = 0.0;
  std::string pair;
  for (std::size_t i = 0; i < draws.size(); ++i)
    for (std::size_t j = i + 1; j < draws.size(); ++j) {
      const double ks = ks_statistic(draws[i], draws[j]);
      if (ks > worst) worst = ks, pair = names[i] + "/" + names[j];
    }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst pairwise KS = %.3f (%s)", worst,
                pair.c_str());
  return {worst <= 0.1, buf};
}

// ---- 6: simultaneous bands cover the truth at roughly the nominal rate.
std::pair<bool, std::string> crit_band_coverage() {
  const Scenario sc = default_scenario();
  const int reps = g_full ? 1000 : 200;
  const double lo = g_full ? 0.92 : 0.90;
  const double hi = g_full ? 0.98 : 0.99;
  const auto rep = coverage_experiment(sc, 300, reps, 500, "wild", 0.95, 42);
  bool ok = rep.simultaneous >= lo && rep.simultaneous <= hi &&
            rep.failures <= 0.02 * reps;
  for (Eigen::Index g = 1; g + 1 < rep.grid.size(); ++g)
    ok = ok && rep.pointwise[g] >= lo && rep.pointwise[g] <= hi;
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "reps = %d (%d failed), simultaneous = %.3f, pointwise mid = "
                "%.3f/%.3f/%.3f",
                reps, rep.failures, rep.simultaneous, rep.pointwise[1],
                rep.pointwise[2], rep.pointwise[3]);
  return {ok, buf};
}

// ---- 7: results do not depend on the thread count.
std::pair<bool, std::string> crit_thread_invariance() {
  const Scenario sc = default_scenario();
  const Dataset ds = generate_dataset(sc, 120, 11001);
  Eigen::VectorXd grid(3);
  grid << 0.4, 0.9, 1.4;
  const auto e1 = efron_bootstrap(ds, grid, 40, 13, {}, nullptr, 1);
  const auto e4 = efron_bootstrap(ds, grid, 40, 13, {}, nullptr, 4);
  const bool efron_same =
      e1.B == e4.B && (e1.paths - e4.paths).lpNorm<Eigen::Infinity>() == 0.0;

  const auto c1 = coverage_experiment(sc, 120, 6, 150, "wild", 0.9, 3, 1);
  const auto c4 = coverage_experiment(sc, 120, 6, 150, "wild", 0.9, 3, 4);
  const bool cov_same =
      c1.simultaneous == c4.simultaneous && c1.mean_width == c4.mean_width &&
      (c1.pointwise - c4.pointwise).lpNorm<Eigen::Infinity>() == 0.0;
  return {efron_same && cov_same,
          efron_same ? (cov_same ? "" : "coverage differs") : "efron differs"};
}

// ---- 8: exact null identities.
std::pair<bool, std::string> crit_null_identities() {
  const Dataset ds = testutil::simulated(80, 12001);
  std::vector<CoxFit> fits;
  for (int k = 1; k <= ds.n_causes(); ++k) {
    Eigen::VectorXd b(3);
    b << 0.0, 0.35, -0.2;  // no treatment component
    fits.push_back(testutil::fit_at(ds, k, b));
  }
  Eigen::VectorXd grid(3);
  grid << 0.0, ds.tau() / 2, ds.tau();
  const auto ate = ate_estimate(fits, ds, grid);
  const bool ate_zero = ate.estimate.lpNorm<Eigen::Infinity>() < 1e-12;

  const auto real_fits = testutil::fit_all(ds);
  Eigen::VectorXd inner(2);
  inner << ds.tau() * 0.3, ds.tau() * 0.8;
  const auto th = tilde_h_curves(real_fits, ds, inner);
  const auto ep = event_paths(th, ds);
  const Eigen::MatrixXd zeros =
      Eigen::MatrixXd::Zero(4, static_cast<Eigen::Index>(ep.subjects.size()));
  const auto ens = wild_bootstrap(th, ds, 4, "normal", 1, &zeros);
  const bool wild_zero = ens.paths.lpNorm<Eigen::Infinity>() < 1e-12;

  bool xi_zero = true;
  for (Eigen::Index g = 0; g < inner.size(); ++g)
    xi_zero = xi_zero && variance_xi(th, 0.0, inner[g]) == 0.0;

  std::string detail;
  if (!ate_zero) detail += "ATE not identically 0; ";
  if (!wild_zero) detail += "zero multipliers give nonzero path; ";
  if (!xi_zero) detail += "xi(0, t) != 0; ";
  return {ate_zero && wild_zero && xi_zero, detail};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i)
    if (std::strcmp(argv[i], "--full") == 0) g_full = true;
  std::printf("acceptance gate (%s profile)\n", g_full ? "full" : "fast");

  run("criterion 1: Newton fit matches the grid-search argmax", crit_newton_argmax);
  run("criterion 2: Breslow baseline = Nelson-Aalen at beta 0",
      crit_baseline_nelson_aalen);
  run("criterion 3: plug-in variance matches Monte-Carlo variance",
      crit_variance_consistency);
  run("criterion 4: event-path Gram matrix converges to xi", crit_gram_convergence);
  run("criterion 5: resampling schemes agree in distribution",
      crit_scheme_agreement);
  run("criterion 6: simultaneous band coverage near nominal", crit_band_coverage);
  run("criterion 7: thread-count invariance", crit_thread_invariance);
  run("criterion 8: exact null identities", crit_null_identities);

  return g_failures;
}
