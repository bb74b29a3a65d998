#pragma once

#include <Eigen/Dense>
#include <vector>

#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"
#include "ateband/gformula.hpp"
#include "ateband/simulate.hpp"

namespace testutil {

inline ateband::Subject row(const std::string& id, double time, int status,
                            int treatment, std::vector<double> z = {}) {
  ateband::Subject s;
  s.id = id;
  s.time = time;
  s.status = status;
  s.treatment = treatment;
  s.covariates = Eigen::Map<Eigen::VectorXd>(z.data(),
                                             static_cast<Eigen::Index>(z.size()));
  return s;
}

// Times 1, 2, 3 with statuses 1, 1, 0; no covariates beyond treatment.
inline ateband::Dataset d3() {
  return ateband::Dataset(
      {row("a", 1.0, 1, 0), row("b", 2.0, 1, 1), row("c", 3.0, 0, 0)}, 1);
}

// A converged CoxFit pinned at a chosen beta (default 0), with the matching
// Breslow baseline; used to evaluate hand formulas at known coefficients.
inline ateband::CoxFit fit_at(const ateband::Dataset& ds, int cause,
                              Eigen::VectorXd beta = Eigen::VectorXd()) {
  if (beta.size() == 0) beta = Eigen::VectorXd::Zero(ds.n_covariates() + 1);
  ateband::CoxFit fit;
  fit.cause = cause;
  fit.beta = beta;
  fit.baseline = ateband::breslow_baseline(ds, cause, beta);
  fit.information = ateband::score_and_information(ds, cause, beta).second;
  fit.iterations = 0;
  fit.converged = true;
  return fit;
}

inline ateband::Dataset simulated(int n, std::uint64_t seed,
                                  ateband::Scenario sc = ateband::default_scenario()) {
  return ateband::generate_dataset(sc, n, seed);
}

inline std::vector<ateband::CoxFit> fit_all(const ateband::Dataset& ds) {
  std::vector<ateband::CoxFit> fits;
  for (int k = 1; k <= ds.n_causes(); ++k)
    fits.push_back(ateband::fit_cause_specific_cox(ds, k));
  return fits;
}

// ---- brute-force evaluation of the asymptotic ingredient curves, straight
// ---- from per-subject counterfactual curves; independent of the aggregate
// ---- sweep used by the library.

inline double rel_risk(const ateband::CoxFit& fit, int a, const Eigen::VectorXd& z) {
  return std::exp(fit.beta[0] * a + fit.beta.tail(z.size()).dot(z));
}

inline double direct_h1(const std::vector<ateband::CoxFit>& fits,
                        const ateband::Dataset& ds, int k, double u, double t) {
  double sum = 0.0;
  for (int i = 0; i < ds.n(); ++i) {
    const Eigen::VectorXd z = ds.subject(i).covariates;
    double term = 0.0;
    if (k == 1) {
      for (int a : {1, 0}) {
        const auto surv = ateband::survival_curve(fits, a, z);
        const auto cif = ateband::cif1(fits, a, z);
        const double v = (surv.left_limit(u) - cif(t) + cif(u)) *
                         rel_risk(fits[0], a, z);
        term += a == 1 ? v : -v;
      }
    } else {
      for (int a : {0, 1}) {
        const auto cif = ateband::cif1(fits, a, z);
        const double v = (cif(t) - cif(u)) * rel_risk(fits[k - 1], a, z);
        term += a == 0 ? v : -v;
      }
    }
    sum += term;
  }
  return sum / ds.n();
}

inline Eigen::VectorXd direct_h2(const std::vector<ateband::CoxFit>& fits,
                                 const ateband::Dataset& ds, int k, double t) {
  const int d = ds.n_covariates() + 1;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(d);

  auto psi = [&](int cause, int a, const Eigen::VectorXd& z) {
    const auto& bl = fits[cause - 1].baseline;
    const auto cif = ateband::cif1(fits, a, z);
    Eigen::VectorXd xa(d);
    xa[0] = a;
    xa.tail(d - 1) = z;
    const double w = rel_risk(fits[cause - 1], a, z);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < bl.n_jumps(); ++j) {
      const double uj = bl.times[j];
      if (uj > t) break;
      const auto ws = ateband::weighted_sums(ds, cause, fits[cause - 1].beta, uj);
      acc += (cif(t) - cif(uj)) * (xa - ws.e) * w * bl.jump_at(j);
    }
    return acc;
  };
  auto phi = [&](int a, const Eigen::VectorXd& z) {
    const auto& bl = fits[0].baseline;
    const auto surv = ateband::survival_curve(fits, a, z);
    Eigen::VectorXd xa(d);
    xa[0] = a;
    xa.tail(d - 1) = z;
    const double w = rel_risk(fits[0], a, z);
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(d);
    for (Eigen::Index j = 0; j < bl.n_jumps(); ++j) {
      const double uj = bl.times[j];
      if (uj > t) break;
      const auto ws = ateband::weighted_sums(ds, 1, fits[0].beta, uj);
      acc += surv.left_limit(uj) * (xa - ws.e) * w * bl.jump_at(j);
    }
    return acc;
  };

  for (int i = 0; i < ds.n(); ++i) {
    const Eigen::VectorXd z = ds.subject(i).covariates;
    if (k == 1)
      sum += (phi(1, z) - psi(1, 1, z)) - (phi(0, z) - psi(1, 0, z));
    else
      sum += psi(k, 0, z) - psi(k, 1, z);
  }
  return sum / ds.n();
}

}  // namespace testutil
