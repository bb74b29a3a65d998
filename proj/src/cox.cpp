#include "ateband/cox.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ateband/cox_scan.hpp"
#include "ateband/errors.hpp"

namespace ateband {

CoxScan cox_scan(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                 const Eigen::VectorXd* weights, bool need_information) {
  const int n = ds.n();
  const int d = ds.n_covariates() + 1;
  if (beta.size() != d)
    throw ValidationError("beta must have length p+1");
  if (weights && weights->size() != n)
    throw ValidationError("weights must have length n");

  const Eigen::MatrixXd& x = ds.design();
  const Eigen::VectorXd lp_raw = x * beta;
  const double center = lp_raw.mean();  // cancels everywhere except S^(0)
  const Eigen::VectorXd lp = lp_raw.array() - center;

  CoxScan out;
  out.loglik = 0.0;
  out.score = Eigen::VectorXd::Zero(d);
  out.information = Eigen::MatrixXd::Zero(d, d);

  double r0 = 0.0;
  Eigen::VectorXd r1 = Eigen::VectorXd::Zero(d);
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(d, d);

  struct EventRec {
    int subject;
    double time;
    double weight;
    double s0;
    Eigen::VectorXd e;
  };
  std::vector<EventRec> events;

  const auto& order = ds.sorted_order();
  for (int j = n - 1; j >= 0; --j) {
    const int i = order[j];
    const double w = weights ? (*weights)[i] : 1.0;
    if (w > 0.0) {
      const double ew = w * std::exp(lp[i]);
      r0 += ew;
      r1.noalias() += ew * x.row(i).transpose();
      if (need_information)
        r2.noalias() += ew * x.row(i).transpose() * x.row(i);
    }
    if (ds.status(i) == cause && w > 0.0 && ds.time(i) > 0.0 && ds.time(i) <= ds.tau()) {
      EventRec rec;
      rec.subject = i;
      rec.time = ds.time(i);
      rec.weight = w;
      rec.s0 = r0 / n * std::exp(center);
      rec.e = r1 / r0;
      out.loglik += w * (lp[i] - std::log(r0));
      out.score.noalias() += w * (x.row(i).transpose() - rec.e);
      if (need_information)
        out.information.noalias() += w * (r2 / r0 - rec.e * rec.e.transpose());
      events.push_back(std::move(rec));
    }
  }
  std::reverse(events.begin(), events.end());  // ascending event time

  const int m = static_cast<int>(events.size());
  out.event_subjects.resize(m);
  out.event_times.resize(m);
  out.event_weights.resize(m);
  out.s0.resize(m);
  out.e.resize(d, m);
  for (int j = 0; j < m; ++j) {
    out.event_subjects[j] = events[j].subject;
    out.event_times[j] = events[j].time;
    out.event_weights[j] = events[j].weight;
    out.s0[j] = events[j].s0;
    out.e.col(j) = events[j].e;
  }
  return out;
}

WeightedSums weighted_sums(const Dataset& ds, int /*cause*/, const Eigen::VectorXd& beta,
                           double t) {
  const int n = ds.n();
  const int d = ds.n_covariates() + 1;
  if (beta.size() != d)
    throw ValidationError("beta must have length p+1");

  WeightedSums ws;
  ws.s1 = Eigen::VectorXd::Zero(d);
  ws.s2 = Eigen::MatrixXd::Zero(d, d);
  for (int i = 0; i < n; ++i) {
    if (ds.time(i) < t) continue;
    const Eigen::VectorXd xi = ds.design_row(i);
    const double w = std::exp(xi.dot(beta));
    ws.s0 += w;
    ws.s1.noalias() += w * xi;
    ws.s2.noalias() += w * xi * xi.transpose();
  }
  ws.s0 /= n;
  ws.s1 /= n;
  ws.s2 /= n;
  ws.e = ws.s0 > 0.0 ? Eigen::VectorXd(ws.s1 / ws.s0) : Eigen::VectorXd::Zero(d);
  return ws;
}

double log_partial_likelihood(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd* weights) {
  if (ds.event_count(cause) == 0)
    throw FitError("no cause-" + std::to_string(cause) + " events");
  return cox_scan(ds, cause, beta, weights, false).loglik;
}

std::pair<Eigen::VectorXd, Eigen::MatrixXd> score_and_information(
    const Dataset& ds, int cause, const Eigen::VectorXd& beta,
    const Eigen::VectorXd* weights) {
  if (ds.event_count(cause) == 0)
    throw FitError("no cause-" + std::to_string(cause) + " events");
  auto scan = cox_scan(ds, cause, beta, weights, true);
  return {std::move(scan.score), std::move(scan.information)};
}

StepFunction breslow_baseline(const Dataset& ds, int cause, const Eigen::VectorXd& beta,
                              const Eigen::VectorXd* weights) {
  const auto scan = cox_scan(ds, cause, beta, weights, false);
  const int m = static_cast<int>(scan.event_times.size());
  Eigen::VectorXd jumps(m);
  for (int j = 0; j < m; ++j)
    jumps[j] = scan.event_weights[j] / (ds.n() * scan.s0[j]);
  return StepFunction::from_jumps(scan.event_times, jumps, 0.0);
}

namespace {

// Smallest/largest eigenvalue check; throws with a condition estimate.
void require_nonsingular(const Eigen::MatrixXd& mat, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mat);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  const double trace = mat.trace();
  if (!(lo > 1e-12 * std::max(trace, 0.0))) {
    const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    throw SingularMatrixError(what + " numerically singular (condition ~ " +
                              std::to_string(cond) + ")");
  }
}

}  // namespace

CoxFit fit_cause_specific_cox(const Dataset& ds, int cause, CoxOptions opts,
                              const Eigen::VectorXd* weights,
                              const Eigen::VectorXd* warm_start) {
  const int d = ds.n_covariates() + 1;
  if (ds.event_count(cause) == 0)
    throw FitError("no cause-" + std::to_string(cause) + " events");

  Eigen::VectorXd beta =
      warm_start ? *warm_start : Eigen::VectorXd::Zero(d);
  auto scan = cox_scan(ds, cause, beta, weights, true);
  // A weighted sample can lose all cause-k events even if the original had some.
  if (scan.event_times.size() == 0)
    throw FitError("no cause-" + std::to_string(cause) + " events with positive weight");

  CoxFit fit;
  fit.cause = cause;
  fit.converged = scan.score.lpNorm<Eigen::Infinity>() < opts.score_tol;

  int iter = 0;
  while (!fit.converged && iter < opts.max_iterations) {
    ++iter;
    try {
      require_nonsingular(scan.information, "information matrix");
    } catch (const SingularMatrixError&) {
      // A monotone likelihood flattens the information as beta runs away;
      // report that as separation instead of generic singularity.
      if (beta.lpNorm<Eigen::Infinity>() > 10.0)
        throw FitError("cause " + std::to_string(cause) +
                       ": monotone likelihood (separation), information degenerated");
      throw;
    }
    const Eigen::VectorXd step = scan.information.ldlt().solve(scan.score);

    double step_scale = 1.0;
    Eigen::VectorXd beta_next;
    CoxScan scan_next;
    bool accepted = false;
    // Allow rounding-level decreases: near the optimum the true gain of a
    // Newton step can be far below the float resolution of the loglik.
    const double slack = 1e-10 * (std::abs(scan.loglik) + 1.0);
    for (int h = 0; h <= opts.max_halvings; ++h) {
      beta_next = beta + step_scale * step;
      scan_next = cox_scan(ds, cause, beta_next, weights, true);
      if (std::isfinite(scan_next.loglik) && scan_next.loglik >= scan.loglik - slack) {
        accepted = true;
        break;
      }
      step_scale *= 0.5;
    }
    if (!accepted)
      throw FitError("cause " + std::to_string(cause) +
                     ": step-halving failed to improve the partial likelihood");

    const double step_norm = (beta_next - beta).lpNorm<Eigen::Infinity>();
    beta = std::move(beta_next);
    scan = std::move(scan_next);

    if (beta.lpNorm<Eigen::Infinity>() > opts.separation_cap)
      throw FitError("cause " + std::to_string(cause) +
                     ": monotone likelihood (separation), ||beta|| exceeds cap");

    if (scan.score.lpNorm<Eigen::Infinity>() < opts.score_tol ||
        step_norm < opts.step_tol)
      fit.converged = true;
  }
  if (!fit.converged)
    throw FitError("cause " + std::to_string(cause) + ": no convergence after " +
                   std::to_string(opts.max_iterations) + " iterations");

  fit.beta = beta;
  fit.iterations = iter;
  fit.information = scan.information;

  const int m = static_cast<int>(scan.event_times.size());
  Eigen::VectorXd jumps(m);
  for (int j = 0; j < m; ++j)
    jumps[j] = scan.event_weights[j] / (ds.n() * scan.s0[j]);
  fit.baseline = StepFunction::from_jumps(scan.event_times, jumps, 0.0);
  return fit;
}

Eigen::MatrixXd sigma_hat(const Dataset& ds, const CoxFit& fit) {
  if (!fit.converged) throw FitError("sigma_hat requires a converged fit");
  Eigen::MatrixXd sigma = fit.information / ds.n();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
  if (!(es.eigenvalues().minCoeff() > 1e-12 * std::max(sigma.trace(), 0.0)))
    throw SingularMatrixError("sigma_hat for cause " + std::to_string(fit.cause) +
                              " numerically singular");
  return sigma;
}

}  // namespace ateband
