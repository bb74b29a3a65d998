#include "ateband/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "ateband/asymptotics.hpp"
#include "ateband/cox.hpp"
#include "ateband/errors.hpp"
#include "ateband/parallel.hpp"
#include "ateband/resampling.hpp"
#include "ateband/rng.hpp"

namespace ateband {

namespace {

bool constant_hazards(const Scenario& sc) {
  return (sc.shape.array() == 1.0).all();
}

// Smallest t with sum_k c_k t^(a_k) = e; monotone, solved by bisection.
double invert_total_cumhaz(const Eigen::VectorXd& c, const Eigen::VectorXd& shape,
                           double e, bool constant) {
  const double total = c.sum();
  if (constant) return e / total;
  auto cumhaz = [&](double t) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) s += c[k] * std::pow(t, shape[k]);
    return s;
  };
  double hi = 1.0;
  while (cumhaz(hi) < e) hi *= 2.0;
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (cumhaz(mid) < e ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// F1(t | arm) for fixed relative risks c_k = lambda0_k exp(beta_k'(a, z)).
double cif1_truth(const Eigen::VectorXd& c, const Eigen::VectorXd& shape, double t,
                  bool constant) {
  if (t <= 0.0) return 0.0;
  const double total = c.sum();
  if (constant) return c[0] / total * (1.0 - std::exp(-total * t));

  auto f = [&](double u) {
    double cum = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) cum += c[k] * std::pow(u, shape[k]);
    return std::exp(-cum) * c[0] * shape[0] * std::pow(u, shape[0] - 1.0);
  };
  // Adaptive Simpson to 1e-6; the integrand is smooth for shapes >= 1.
  struct Simpson {
    const decltype(f)& fn;
    double run(double a, double b, double fa, double fm, double fb, double whole,
               double tol, int depth) const {
      const double m = 0.5 * (a + b);
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = fn(lm), frm = fn(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return run(a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
             run(m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
    }
  } simpson{f};
  const double a = 0.0, b = t;
  const double fa = f(std::max(a, 1e-12 * t)), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson.run(a, b, fa, fm, fb, whole, 1e-6, 30);
}

// Relative risks per cause at fixed (arm, z).
Eigen::VectorXd cause_rates(const Scenario& sc, int a, const Eigen::VectorXd& z) {
  Eigen::VectorXd c(sc.K);
  for (int k = 0; k < sc.K; ++k)
    c[k] = sc.lambda0[k] *
           std::exp(sc.beta[k][0] * a + sc.beta[k].tail(sc.p).dot(z));
  return c;
}

constexpr std::uint64_t kCalibrationSalt = 0x43414c4942ULL;
constexpr std::uint64_t kBootstrapSalt = 0x424f4f54ULL;

}  // namespace

void Scenario::check() const {
  if (K < 1) throw ValidationError("scenario: K must be >= 1");
  if (p < 0) throw ValidationError("scenario: p must be >= 0");
  if (static_cast<int>(beta.size()) != K)
    throw ValidationError("scenario: need one beta vector per cause");
  for (const auto& b : beta)
    if (b.size() != p + 1)
      throw ValidationError("scenario: beta vectors must have length p+1");
  if (lambda0.size() != K || !(lambda0.array() > 0.0).all())
    throw ValidationError("scenario: baseline rates must be positive, one per cause");
  if (shape.size() != K || !(shape.array() >= 1.0).all())
    throw ValidationError("scenario: shapes must be >= 1, one per cause");
  if (treatment_coef.size() != p + 1)
    throw ValidationError("scenario: treatment model needs p+1 coefficients");
  if (!(lambda_c >= 0.0)) throw ValidationError("scenario: lambda_c must be >= 0");
}

Scenario default_scenario() {
  Scenario sc;
  sc.name = "default";
  sc.K = 2;
  sc.p = 2;
  sc.beta = {(Eigen::VectorXd(3) << -0.6, 0.5, -0.25).finished(),
             (Eigen::VectorXd(3) << 0.3, -0.4, 0.5).finished()};
  sc.lambda0 = (Eigen::VectorXd(2) << 0.8, 0.45).finished();
  sc.shape = Eigen::VectorXd::Ones(2);
  sc.treatment_coef = (Eigen::VectorXd(3) << 0.0, 1.0, 0.0).finished();
  sc.lambda_c = 0.25;
  return sc;
}

Dataset generate_dataset(const Scenario& sc, int n, std::uint64_t seed, double tau) {
  sc.check();
  if (n < 2) throw ValidationError("generate_dataset: n must be >= 2");
  const bool constant = constant_hazards(sc);

  RngStream stream(seed, 0);
  std::vector<Subject> subjects(n);
  for (int i = 0; i < n; ++i) {
    Subject& s = subjects[i];
    s.id = "s" + std::to_string(i + 1);
    s.covariates.resize(sc.p);
    for (int j = 0; j < sc.p; ++j) s.covariates[j] = 2.0 * stream.uniform() - 1.0;

    const double logit = sc.treatment_coef[0] +
                         sc.treatment_coef.tail(sc.p).dot(s.covariates);
    s.treatment = stream.uniform() < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0;

    const Eigen::VectorXd c = cause_rates(sc, s.treatment, s.covariates);
    const double e = -std::log(stream.uniform());
    const double t = invert_total_cumhaz(c, sc.shape, e, constant);

    // Cause proportional to the cause-specific hazards at the event time.
    Eigen::VectorXd haz(sc.K);
    for (int k = 0; k < sc.K; ++k)
      haz[k] = c[k] * sc.shape[k] * std::pow(t, sc.shape[k] - 1.0);
    double u = stream.uniform() * haz.sum();
    int cause = sc.K;
    for (int k = 0; k < sc.K; ++k) {
      u -= haz[k];
      if (u < 0.0) {
        cause = k + 1;
        break;
      }
    }

    double cens = std::numeric_limits<double>::infinity();
    if (sc.lambda_c > 0.0) cens = -std::log(stream.uniform()) / sc.lambda_c;

    s.time = std::min(t, cens);
    s.status = t <= cens ? cause : 0;
  }
  DatasetOptions opts;
  opts.tau = tau;
  return Dataset(std::move(subjects), sc.K, opts);
}

AteCurve true_ate(const Scenario& sc, const Eigen::VectorXd& grid, int qmc_nodes) {
  sc.check();
  if (qmc_nodes < 1) throw ValidationError("true_ate: qmc_nodes must be >= 1");
  const bool constant = constant_hazards(sc);

  // Kronecker sequence over [-1, 1]^p; exact single point when p = 0.
  static const double kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29,
                                   31, 37, 41, 43, 47, 53, 59, 61, 67, 71};
  if (sc.p > 20) throw ValidationError("true_ate: at most 20 covariates supported");
  Eigen::VectorXd alpha(sc.p);
  for (int j = 0; j < sc.p; ++j) {
    const double r = std::sqrt(kPrimes[j]);
    alpha[j] = r - std::floor(r);
  }
  const int nodes = sc.p == 0 ? 1 : qmc_nodes;

  AteCurve out;
  out.grid = grid;
  out.estimate = Eigen::VectorXd::Zero(grid.size());
  out.n = 0;

  Eigen::VectorXd z(sc.p);
  for (int i = 0; i < nodes; ++i) {
    for (int j = 0; j < sc.p; ++j) {
      const double frac = (i + 1) * alpha[j] - std::floor((i + 1) * alpha[j]);
      z[j] = 2.0 * frac - 1.0;
    }
    const Eigen::VectorXd c1 = cause_rates(sc, 1, z);
    const Eigen::VectorXd c0 = cause_rates(sc, 0, z);
    for (Eigen::Index g = 0; g < grid.size(); ++g)
      out.estimate[g] += cif1_truth(c1, sc.shape, grid[g], constant) -
                         cif1_truth(c0, sc.shape, grid[g], constant);
  }
  out.estimate /= nodes;
  return out;
}

CoverageReport coverage_experiment(const Scenario& sc, int n, int reps, int B,
                                   const std::string& method, double level,
                                   std::uint64_t seed, int n_threads,
                                   Eigen::VectorXd grid) {
  sc.check();
  if (reps < 1) throw ValidationError("coverage_experiment: reps must be >= 1");
  if (!(level > 0.0 && level < 1.0))
    throw ValidationError("coverage_experiment: level must lie in (0, 1)");
  if (method != "efron" && method != "wild" && method != "influence")
    throw ValidationError("coverage_experiment: unknown method " + method);

  if (grid.size() == 0) {
    const Dataset cal =
        generate_dataset(sc, 2000, detail::mix64(seed ^ kCalibrationSalt));
    std::vector<double> times;
    times.reserve(cal.n());
    for (int i = 0; i < cal.n(); ++i) times.push_back(cal.time(i));
    std::sort(times.begin(), times.end());
    const double qs[] = {0.15, 0.3, 0.45, 0.6, 0.75};
    grid.resize(5);
    for (int q = 0; q < 5; ++q)
      grid[q] = times[static_cast<std::size_t>(qs[q] * (times.size() - 1))];
  }

  CoverageReport rep;
  rep.scenario = sc.name;
  rep.method = method;
  rep.level = level;
  rep.n = n;
  rep.reps = reps;
  rep.B = B;
  rep.seed = seed;
  rep.grid = grid;
  rep.truth = true_ate(sc, grid).estimate;

  const Eigen::Index G = grid.size();
  Eigen::MatrixXd point_hits = Eigen::MatrixXd::Zero(reps, G);
  Eigen::VectorXd sim_hits = Eigen::VectorXd::Zero(reps);
  Eigen::VectorXd widths = Eigen::VectorXd::Zero(reps);
  std::vector<char> ok(reps, 0);

  parallel_for(reps, n_threads, [&](int r) {
    const std::uint64_t rep_seed =
        detail::mix64(detail::mix64(seed) ^ (static_cast<std::uint64_t>(r) + 1));
    const std::uint64_t boot_seed = detail::mix64(rep_seed ^ kBootstrapSalt);
    try {
      const Dataset ds = generate_dataset(sc, n, rep_seed, grid[G - 1]);
      std::vector<CoxFit> fits;
      for (int k = 1; k <= sc.K; ++k)
        fits.push_back(fit_cause_specific_cox(ds, k));
      const AteCurve ate = ate_estimate(fits, ds, grid);

      ResampleEnsemble ens;
      if (method == "efron") {
        ens = efron_bootstrap(ds, grid, B, boot_seed);
      } else if (method == "wild") {
        ens = wild_bootstrap(fits, ds, grid, B, "normal", boot_seed);
      } else {
        ens = if_resample(influence_curves(fits, ds, grid), B, boot_seed);
      }

      const ConfidenceBand pw = pointwise_ci(ate, ens, level);
      const ConfidenceBand sim = simultaneous_band(ate, ens, level);
      bool all_in = true;
      for (Eigen::Index g = 0; g < G; ++g) {
        point_hits(r, g) =
            pw.lower[g] <= rep.truth[g] && rep.truth[g] <= pw.upper[g] ? 1.0 : 0.0;
        if (!(sim.lower[g] <= rep.truth[g] && rep.truth[g] <= sim.upper[g]))
          all_in = false;
      }
      sim_hits[r] = all_in ? 1.0 : 0.0;
      widths[r] = (sim.upper - sim.lower).mean();
      ok[r] = 1;
    } catch (const std::exception&) {
      ok[r] = 0;
    }
  });

  int kept = 0;
  rep.pointwise = Eigen::VectorXd::Zero(G);
  for (int r = 0; r < reps; ++r) {
    if (!ok[r]) continue;
    ++kept;
    rep.pointwise += point_hits.row(r).transpose();
    rep.simultaneous += sim_hits[r];
    rep.mean_width += widths[r];
  }
  rep.failures = reps - kept;
  if (kept == 0) throw FitError("coverage_experiment: every replicate failed");
  rep.pointwise /= kept;
  rep.simultaneous /= kept;
  rep.mean_width /= kept;
  return rep;
}

}  // namespace ateband
