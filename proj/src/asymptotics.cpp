#include "ateband/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "ateband/cox_scan.hpp"
#include "ateband/errors.hpp"

namespace ateband {

namespace {

void check_inputs(const std::vector<CoxFit>& fits, const Dataset& ds,
                  const Eigen::VectorXd& grid) {
  if (fits.empty()) throw ValidationError("at least one cause-specific fit required");
  for (std::size_t k = 0; k < fits.size(); ++k) {
    if (fits[k].cause != static_cast<int>(k) + 1)
      throw ValidationError("fits must be ordered by cause (fits[k] for cause k+1)");
    if (!fits[k].converged) throw FitError("asymptotics require converged fits");
  }
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    if (grid[g] < 0.0 || grid[g] > ds.tau())
      throw ValidationError("grid point outside [0, tau]");
    if (g > 0 && !(grid[g] > grid[g - 1]))
      throw ValidationError("grid must be strictly increasing");
  }
}

double prefix(const Eigen::VectorXd& v, Eigen::Index idx) {
  return idx < 0 ? 0.0 : v[idx];
}

Eigen::VectorXd prefix_col(const Eigen::MatrixXd& m, Eigen::Index idx) {
  return idx < 0 ? Eigen::VectorXd::Zero(m.rows()) : Eigen::VectorXd(m.col(idx));
}

Eigen::Index last_leq(const Eigen::VectorXd& times, double t) {
  const double* begin = times.data();
  const double* end = begin + times.size();
  return std::upper_bound(begin, end, t) - begin - 1;
}

}  // namespace

Eigen::Index TildeH::locate(double t) const { return last_leq(merged_times, t); }

Eigen::Index TildeH::locate_event(int cause, double t) const {
  return last_leq(causes[cause - 1].event_times, t);
}

double TildeH::h1_tpart(int cause, double t) const {
  const Eigen::Index m = locate(t);
  if (m < 0) return 0.0;
  return fbar[1][cause - 1][m] - fbar[0][cause - 1][m];
}

Eigen::VectorXd TildeH::h2_at(int cause, double t) const {
  const CauseIngredients& ci = causes[cause - 1];
  const int d = static_cast<int>(ci.sigma.rows());
  const Eigen::Index idx = locate_event(cause, t);
  if (idx < 0) return Eigen::VectorXd::Zero(d);
  const Eigen::Index m = locate(t);

  std::array<Eigen::VectorXd, 2> psi;
  for (int a = 0; a < 2; ++a) {
    const Eigen::VectorXd p_t =
        m < 0 ? Eigen::VectorXd::Zero(d) : Eigen::VectorXd(pbar[a][cause - 1].col(m));
    const double f_t = m < 0 ? 0.0 : fbar[a][cause - 1][m];
    psi[a] = p_t * ci.lambda0_prefix[idx] - ci.c_prefix[a].col(idx) -
             f_t * ci.e_dlam_prefix.col(idx) + ci.d_prefix[a].col(idx);
  }
  if (cause >= 2) return psi[0] - psi[1];
  const Eigen::VectorXd phi1 = ci.phi_prefix[1].col(idx);
  const Eigen::VectorXd phi0 = ci.phi_prefix[0].col(idx);
  return (phi1 - psi[1]) - (phi0 - psi[0]);
}

TildeH tilde_h_curves(const std::vector<CoxFit>& fits, const Dataset& ds,
                      const Eigen::VectorXd& grid) {
  check_inputs(fits, ds, grid);
  const int n = ds.n();
  const int p = ds.n_covariates();
  const int d = p + 1;
  const int K = static_cast<int>(fits.size());
  const Eigen::MatrixXd z = ds.design().rightCols(p);

  // Hypothetical relative risks exp(beta_kA a + beta_kZ' Z_i) per arm and cause.
  std::array<std::vector<Eigen::ArrayXd>, 2> rr;
  for (int a = 0; a < 2; ++a)
    for (int k = 0; k < K; ++k)
      rr[a].push_back((z * fits[k].beta.tail(p) +
                       Eigen::VectorXd::Constant(n, fits[k].beta[0] * a))
                          .array()
                          .exp());

  std::vector<CoxScan> scans;
  for (int k = 0; k < K; ++k)
    scans.push_back(cox_scan(ds, k + 1, fits[k].beta, nullptr, false));

  struct MergedEvent {
    double time;
    int cause;  // 1-based
    int index;  // within-cause event index
  };
  std::vector<MergedEvent> merged;
  for (int k = 0; k < K; ++k)
    for (Eigen::Index j = 0; j < scans[k].event_times.size(); ++j)
      merged.push_back({scans[k].event_times[j], k + 1, static_cast<int>(j)});
  std::sort(merged.begin(), merged.end(),
            [](const MergedEvent& a, const MergedEvent& b) { return a.time < b.time; });
  const int M = static_cast<int>(merged.size());

  TildeH th;
  th.n = n;
  th.tau = ds.tau();
  th.grid = grid;
  th.merged_times.resize(M);
  for (int a = 0; a < 2; ++a) {
    th.sbar[a].resize(M);
    th.sbar0[a] = rr[a][0].mean();
    th.fbar[a].assign(K, Eigen::VectorXd(M));
    th.pbar[a].assign(K, Eigen::MatrixXd(d, M));
  }
  th.causes.resize(K);
  for (int k = 0; k < K; ++k) {
    CauseIngredients& ci = th.causes[k];
    const int m = static_cast<int>(scans[k].event_times.size());
    ci.cause = k + 1;
    ci.event_times = scans[k].event_times;
    ci.event_subjects = scans[k].event_subjects;
    ci.merged_index.resize(m);
    ci.s0 = scans[k].s0;
    ci.d_lambda0.resize(m);
    for (int j = 0; j < m; ++j)
      ci.d_lambda0[j] = scans[k].event_weights[j] / (n * scans[k].s0[j]);
    ci.e = scans[k].e;
    ci.sigma = sigma_hat(ds, fits[k]);
    ci.sigma_inv = ci.sigma.inverse();
    ci.obs_weight = (ds.design() * fits[k].beta).array().exp();
  }

  // mean S(u_j- | a) w_a1 and its design-weighted version, at cause-1 events.
  const int m1 = static_cast<int>(th.causes[0].event_times.size());
  std::array<Eigen::VectorXd, 2> c_store{Eigen::VectorXd(m1), Eigen::VectorXd(m1)};
  std::array<Eigen::MatrixXd, 2> r_store{Eigen::MatrixXd(d, m1), Eigen::MatrixXd(d, m1)};

  std::array<Eigen::ArrayXd, 2> log_s{Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n)};
  std::array<Eigen::ArrayXd, 2> f1{Eigen::ArrayXd::Zero(n), Eigen::ArrayXd::Zero(n)};

  auto design_mean = [&](int a, const Eigen::ArrayXd& v) {
    Eigen::VectorXd out(d);
    out[0] = a == 1 ? v.sum() / n : 0.0;
    out.tail(p).noalias() = z.transpose() * v.matrix() / n;
    return out;
  };

  for (int r = 0; r < M; ++r) {
    const MergedEvent& me = merged[r];
    th.merged_times[r] = me.time;
    th.causes[me.cause - 1].merged_index[me.index] = r;
    const double dlam = th.causes[me.cause - 1].d_lambda0[me.index];
    for (int a = 0; a < 2; ++a) {
      const Eigen::ArrayXd s_left = log_s[a].exp();
      if (me.cause == 1) {
        const Eigen::ArrayXd v = s_left * rr[a][0];
        c_store[a][me.index] = v.mean();
        r_store[a].col(me.index) = design_mean(a, v);
        f1[a] += s_left * (dlam * rr[a][0]);
      }
      log_s[a] -= dlam * rr[a][me.cause - 1];
      th.sbar[a][r] = (log_s[a].exp() * rr[a][0]).mean();
      for (int k = 0; k < K; ++k) {
        const Eigen::ArrayXd w = f1[a] * rr[a][k];
        th.fbar[a][k][r] = w.mean();
        th.pbar[a][k].col(r) = design_mean(a, w);
      }
    }
  }

  for (int k = 0; k < K; ++k) {
    CauseIngredients& ci = th.causes[k];
    const int m = static_cast<int>(ci.event_times.size());
    ci.h1_u.resize(m);
    ci.lambda0_prefix.resize(m);
    ci.g0_prefix.resize(m);
    ci.g1_prefix.resize(m);
    ci.g2_prefix.resize(m);
    ci.e_dlam_prefix.resize(d, m);
    for (int a = 0; a < 2; ++a) {
      ci.c_prefix[a].resize(d, m);
      ci.d_prefix[a].resize(d, m);
      if (k == 0) ci.phi_prefix[a].resize(d, m);
    }

    double lam = 0.0, g0 = 0.0, g1 = 0.0, g2 = 0.0;
    Eigen::VectorXd edl = Eigen::VectorXd::Zero(d);
    std::array<Eigen::VectorXd, 2> cpre{Eigen::VectorXd::Zero(d),
                                        Eigen::VectorXd::Zero(d)};
    std::array<Eigen::VectorXd, 2> dpre{Eigen::VectorXd::Zero(d),
                                        Eigen::VectorXd::Zero(d)};
    std::array<Eigen::VectorXd, 2> ppre{Eigen::VectorXd::Zero(d),
                                        Eigen::VectorXd::Zero(d)};
    for (int j = 0; j < m; ++j) {
      const int mi = ci.merged_index[j];
      double h1 = th.fbar[1][k][mi] - th.fbar[0][k][mi];
      if (k == 0) h1 += c_store[1][j] - c_store[0][j];
      ci.h1_u[j] = h1;

      const double dlam = ci.d_lambda0[j];
      lam += dlam;
      g0 += dlam / ci.s0[j];
      g1 += h1 * dlam / ci.s0[j];
      g2 += h1 * h1 * dlam / ci.s0[j];
      edl.noalias() += ci.e.col(j) * dlam;
      ci.lambda0_prefix[j] = lam;
      ci.g0_prefix[j] = g0;
      ci.g1_prefix[j] = g1;
      ci.g2_prefix[j] = g2;
      ci.e_dlam_prefix.col(j) = edl;
      for (int a = 0; a < 2; ++a) {
        cpre[a].noalias() += th.pbar[a][k].col(mi) * dlam;
        dpre[a].noalias() += ci.e.col(j) * (th.fbar[a][k][mi] * dlam);
        ci.c_prefix[a].col(j) = cpre[a];
        ci.d_prefix[a].col(j) = dpre[a];
        if (k == 0) {
          ppre[a].noalias() += (r_store[a].col(j) - ci.e.col(j) * c_store[a][j]) * dlam;
          ci.phi_prefix[a].col(j) = ppre[a];
        }
      }
    }
  }

  const Eigen::Index G = grid.size();
  for (int k = 0; k < K; ++k) {
    th.causes[k].h2.resize(d, G);
    for (Eigen::Index g = 0; g < G; ++g)
      th.causes[k].h2.col(g) = th.h2_at(k + 1, grid[g]);
  }
  return th;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> subject_h(
    const std::vector<CoxFit>& fits, const Dataset& ds, int subject, int cause,
    const Eigen::VectorXd& grid) {
  if (subject < 0 || subject >= ds.n())
    throw ValidationError("subject index out of range");
  const TildeH th = tilde_h_curves(fits, ds, grid);
  const CauseIngredients& ci = th.causes[cause - 1];
  const double u = ds.time(subject);
  const int n = ds.n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  const WeightedSums ws = weighted_sums(ds, cause, fits[cause - 1].beta, u);
  if (!(ws.s0 > 0.0))
    throw FitError("empty risk set at the subject's observed time");

  const Eigen::Index m = th.locate(u);
  double h1u = m < 0 ? 0.0 : th.fbar[1][cause - 1][m] - th.fbar[0][cause - 1][m];
  if (cause == 1) {
    // S(u- | a): last merged time strictly before u.
    const Eigen::Index ml =
        last_leq(th.merged_times, std::nextafter(u, -1.0)) ;
    const double c1 = ml < 0 ? th.sbar0[1] : th.sbar[1][ml];
    const double c0 = ml < 0 ? th.sbar0[0] : th.sbar[0][ml];
    h1u += c1 - c0;
  }

  const Eigen::VectorXd xi = ds.design_row(subject);
  const Eigen::VectorXd v2 = ci.sigma_inv * (xi - ws.e);

  const Eigen::Index G = grid.size();
  Eigen::VectorXd h1(G), h2(G);
  for (Eigen::Index g = 0; g < G; ++g) {
    h1[g] = (h1u - th.h1_tpart(cause, grid[g])) / (sqrt_n * ws.s0);
    h2[g] = ci.h2.col(g).dot(v2) / sqrt_n;
  }
  return {std::move(h1), std::move(h2)};
}

double variance_xi(const TildeH& th, double t1, double t2) {
  if (t1 < 0.0 || t2 < 0.0 || t1 > th.tau || t2 > th.tau)
    throw ValidationError("variance_xi: time outside [0, tau]");
  const double tmin = std::min(t1, t2);
  double total = 0.0;
  for (const CauseIngredients& ci : th.causes) {
    const Eigen::Index idx = last_leq(ci.event_times, tmin);
    const double a1 = th.h1_tpart(ci.cause, t1);
    const double a2 = th.h1_tpart(ci.cause, t2);
    const double mart = idx < 0 ? 0.0
                                : ci.g2_prefix[idx] - (a1 + a2) * ci.g1_prefix[idx] +
                                      a1 * a2 * ci.g0_prefix[idx];
    total += mart + th.h2_at(ci.cause, t1).dot(ci.sigma_inv * th.h2_at(ci.cause, t2));
  }
  return total;
}

double variance_xi(const std::vector<CoxFit>& fits, const Dataset& ds, double t1,
                   double t2) {
  std::vector<double> pts{std::min(t1, t2)};
  if (std::max(t1, t2) > pts[0]) pts.push_back(std::max(t1, t2));
  const Eigen::VectorXd grid =
      Eigen::Map<Eigen::VectorXd>(pts.data(), static_cast<Eigen::Index>(pts.size()));
  return variance_xi(tilde_h_curves(fits, ds, grid), t1, t2);
}

Eigen::MatrixXd xi_matrix(const TildeH& th) {
  const Eigen::Index G = th.grid.size();
  Eigen::MatrixXd out(G, G);
  for (Eigen::Index i = 0; i < G; ++i)
    for (Eigen::Index j = i; j < G; ++j)
      out(i, j) = out(j, i) = variance_xi(th, th.grid[i], th.grid[j]);
  return out;
}

Eigen::VectorXd xi_diagonal(const TildeH& th) {
  const Eigen::Index G = th.grid.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(G);
  for (const CauseIngredients& ci : th.causes) {
    for (Eigen::Index g = 0; g < G; ++g) {
      const Eigen::Index idx = last_leq(ci.event_times, th.grid[g]);
      const double a = th.h1_tpart(ci.cause, th.grid[g]);
      const double mart =
          idx < 0 ? 0.0
                  : ci.g2_prefix[idx] - 2.0 * a * ci.g1_prefix[idx] +
                        a * a * ci.g0_prefix[idx];
      out[g] += mart + ci.h2.col(g).dot(ci.sigma_inv * ci.h2.col(g));
    }
  }
  return out;
}

InfluenceCurves influence_curves(const TildeH& th, const Dataset& ds) {
  const int n = ds.n();
  const Eigen::Index G = th.grid.size();
  InfluenceCurves out;
  out.grid = th.grid;
  out.values = Eigen::MatrixXd::Zero(n, G);

  for (const CauseIngredients& ci : th.causes) {
    const int k = ci.cause;
    std::vector<int> event_index(n, -1);
    for (std::size_t j = 0; j < ci.event_subjects.size(); ++j)
      event_index[ci.event_subjects[j]] = static_cast<int>(j);

    Eigen::VectorXd h1t(G);
    std::vector<Eigen::Index> idx_t(G);
    for (Eigen::Index g = 0; g < G; ++g) {
      h1t[g] = th.h1_tpart(k, th.grid[g]);
      idx_t[g] = last_leq(ci.event_times, th.grid[g]);
    }

    for (int i = 0; i < n; ++i) {
      const double w = ci.obs_weight[i];
      const Eigen::VectorXd xi = ds.design_row(i);
      const double ti = ds.time(i);
      const Eigen::Index idx_i = last_leq(ci.event_times, std::min(ti, th.tau));
      const int j_i = ds.status(i) == k && ti <= th.tau ? event_index[i] : -1;

      // Cox-score part: event jump minus compensator, mapped through tilde-H_k2.
      Eigen::VectorXd vec =
          -w * (xi * prefix(ci.lambda0_prefix, idx_i) -
                prefix_col(ci.e_dlam_prefix, idx_i));
      if (j_i >= 0) vec += xi - ci.e.col(j_i);
      out.values.row(i) += (ci.sigma_inv * vec).transpose() * ci.h2;

      for (Eigen::Index g = 0; g < G; ++g) {
        const Eigen::Index mindx = std::min(idx_i, idx_t[g]);
        if (mindx >= 0)
          out.values(i, g) -=
              w * (ci.g1_prefix[mindx] - h1t[g] * ci.g0_prefix[mindx]);
        if (j_i >= 0 && ti <= th.grid[g])
          out.values(i, g) += (ci.h1_u[j_i] - h1t[g]) / ci.s0[j_i];
      }
    }
  }
  return out;
}

InfluenceCurves influence_curves(const std::vector<CoxFit>& fits, const Dataset& ds,
                                 const Eigen::VectorXd& grid) {
  return influence_curves(tilde_h_curves(fits, ds, grid), ds);
}

EventPaths event_paths(const TildeH& th, const Dataset& ds) {
  const Eigen::Index G = th.grid.size();
  const double sqrt_n = std::sqrt(static_cast<double>(th.n));
  Eigen::Index total = 0;
  for (const CauseIngredients& ci : th.causes)
    total += static_cast<Eigen::Index>(ci.event_subjects.size());

  EventPaths ep;
  ep.subjects.reserve(total);
  ep.x.resize(total, G);
  Eigen::Index row = 0;
  for (const CauseIngredients& ci : th.causes) {
    Eigen::VectorXd h1t(G);
    for (Eigen::Index g = 0; g < G; ++g) h1t[g] = th.h1_tpart(ci.cause, th.grid[g]);
    for (std::size_t j = 0; j < ci.event_subjects.size(); ++j) {
      const int i = ci.event_subjects[j];
      const double uj = ci.event_times[j];
      const Eigen::VectorXd u2 =
          ci.sigma_inv * (ds.design_row(i) - Eigen::VectorXd(ci.e.col(j)));
      ep.x.row(row) = (u2.transpose() * ci.h2) / sqrt_n;
      for (Eigen::Index g = 0; g < G; ++g)
        if (uj <= th.grid[g])
          ep.x(row, g) += (ci.h1_u[j] - h1t[g]) / (sqrt_n * ci.s0[j]);
      ep.subjects.push_back(i);
      ++row;
    }
  }
  return ep;
}

Eigen::MatrixXd path_second_moment(const std::vector<CoxFit>& fits, const Dataset& ds,
                              const Eigen::VectorXd& grid) {
  const TildeH th = tilde_h_curves(fits, ds, grid);
  const EventPaths ep = event_paths(th, ds);
  return ep.x.transpose() * ep.x;
}

}  // namespace ateband
