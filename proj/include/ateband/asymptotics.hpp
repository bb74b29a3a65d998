#pragma once

#include <Eigen/Core>
#include <array>
#include <vector>

#include "ateband/cox.hpp"
#include "ateband/dataset.hpp"
#include "ateband/gformula.hpp"

namespace ateband {

// Per-cause plug-in ingredients of the martingale representation, evaluated
// at beta-hat on the merged event timeline. tilde-H_k1 separates as
// tilde_h1(u, t) = h1_u[j(u)] - h1_tpart(t), which keeps everything
// O(#events x grid) instead of bivariate tables per subject.
struct CauseIngredients {
  int cause = 1;
  Eigen::VectorXd event_times;       // cause-k event times in (0, tau], ascending
  std::vector<int> event_subjects;
  std::vector<int> merged_index;     // position of each event on the merged timeline
  Eigen::VectorXd d_lambda0;         // Breslow increments
  Eigen::VectorXd s0;                // S^(0)(beta_hat, u_j)
  Eigen::MatrixXd e;                 // E(beta_hat, u_j), (p+1) x m
  Eigen::MatrixXd sigma;             // Sigma_hat_k
  Eigen::MatrixXd sigma_inv;

  Eigen::VectorXd h1_u;              // u-part of tilde-H_k1 at event times
  Eigen::MatrixXd h2;                // tilde-H_k2 on the grid, (p+1) x |grid|
  Eigen::VectorXd obs_weight;        // exp(beta_k' x_i) at the observed design, n

  // Prefix sums over cause-k event times (index j = sum over u_1..u_j).
  Eigen::VectorXd lambda0_prefix;    // Lambda_0k(u_j)
  Eigen::VectorXd g0_prefix;         // sum dLambda0/s0
  Eigen::VectorXd g1_prefix;         // sum h1_u dLambda0/s0
  Eigen::VectorXd g2_prefix;         // sum h1_u^2 dLambda0/s0
  Eigen::MatrixXd e_dlam_prefix;     // sum E dLambda0, (p+1) x m
  // Arm-specific pieces of the mean psi/phi sums, indexed [a].
  std::array<Eigen::MatrixXd, 2> c_prefix;    // sum pbar(u_j) dLambda0
  std::array<Eigen::MatrixXd, 2> d_prefix;    // sum fbar(u_j) E dLambda0, (p+1) x m
  std::array<Eigen::MatrixXd, 2> phi_prefix;  // cause 1 only: sum (R_a - E c_a) dLambda0
};

// Aggregate curves and per-cause ingredients; the shared backbone of the
// variance function, the influence curves, and the wild bootstrap.
struct TildeH {
  int n = 0;
  double tau = 0.0;
  Eigen::VectorXd grid;
  Eigen::VectorXd merged_times;              // all event times, ascending
  std::array<Eigen::VectorXd, 2> sbar;       // mean_i S(t|a,Z_i) w_a1,i
  std::array<double, 2> sbar0{};             // the same at t = 0 (S = 1)
  std::array<std::vector<Eigen::VectorXd>, 2> fbar;   // [a][k]: mean F1(t|a) w_ak
  std::array<std::vector<Eigen::MatrixXd>, 2> pbar;   // [a][k]: mean F1 w_ak x_a, (p+1) x M
  std::vector<CauseIngredients> causes;

  // Index of the last merged time <= t (-1 if none).
  Eigen::Index locate(double t) const;
  // Index of the last cause-k event time <= t (-1 if none).
  Eigen::Index locate_event(int cause, double t) const;
  // t-part of tilde-H_k1; tilde_h1(u_j, t) = h1_u[j] - h1_tpart(k, t).
  double h1_tpart(int cause, double t) const;
  // tilde-H_k2(t) at an arbitrary time.
  Eigen::VectorXd h2_at(int cause, double t) const;
};

TildeH tilde_h_curves(const std::vector<CoxFit>& fits, const Dataset& ds,
                      const Eigen::VectorXd& grid);

// (H_k1i(T_i, t), H_k2i(T_i, t)) over the grid, for subject i and cause k.
std::pair<Eigen::VectorXd, Eigen::VectorXd> subject_h(
    const std::vector<CoxFit>& fits, const Dataset& ds, int subject, int cause,
    const Eigen::VectorXd& grid);

// Plug-in covariance function of the limit process.
double variance_xi(const std::vector<CoxFit>& fits, const Dataset& ds, double t1,
                   double t2);
double variance_xi(const TildeH& th, double t1, double t2);
Eigen::MatrixXd xi_matrix(const TildeH& th);      // on th.grid
Eigen::VectorXd xi_diagonal(const TildeH& th);    // xi(t, t) on th.grid

struct InfluenceCurves {
  Eigen::VectorXd grid;
  Eigen::MatrixXd values;  // n x |grid|
  std::string method = "martingale-plugin";
};

InfluenceCurves influence_curves(const std::vector<CoxFit>& fits, const Dataset& ds,
                                 const Eigen::VectorXd& grid);
InfluenceCurves influence_curves(const TildeH& th, const Dataset& ds);

// Per-event-subject paths X_{n,i}(t): row r is the contribution of the r-th
// event subject; the wild bootstrap multiplies rows by multipliers, and
// X^T X is the triangular-array second-moment matrix.
struct EventPaths {
  std::vector<int> subjects;  // one per row
  Eigen::MatrixXd x;          // #events x |grid|
};

EventPaths event_paths(const TildeH& th, const Dataset& ds);

Eigen::MatrixXd path_second_moment(const std::vector<CoxFit>& fits, const Dataset& ds,
                              const Eigen::VectorXd& grid);

}  // namespace ateband
