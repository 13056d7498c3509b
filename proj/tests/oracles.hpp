#pragma once

// Independent oracles used by the test suites. Everything here solves the
// same problems as the library through a different route (finite
// differences, stacked KKT systems, exhaustive grids, active-set
// enumeration) and must stay free of the implementation code paths it
// checks.

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <vector>

#include "mixcaladin/core.hpp"
#include "mixcaladin/objectives.hpp"

namespace mixcaladin::oracles {

inline Eigen::VectorXd fd_gradient(const Objective& obj,
                                   const Eigen::VectorXd& x,
                                   double h = 1e-6) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    probe[j] = x[j] + step;
    const double fp = obj.value(probe);
    probe[j] = x[j] - step;
    const double fm = obj.value(probe);
    probe[j] = x[j];
    g[j] = (fp - fm) / (2.0 * step);
  }
  return g;
}

inline Eigen::MatrixXd fd_hessian(const Objective& obj,
                                  const Eigen::VectorXd& x,
                                  double h = 1e-6) {
  Eigen::MatrixXd H(x.size(), x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double step = h * std::max(1.0, std::abs(x[j]));
    probe[j] = x[j] + step;
    const Eigen::VectorXd gp = obj.gradient(probe);
    probe[j] = x[j] - step;
    const Eigen::VectorXd gm = obj.gradient(probe);
    probe[j] = x[j];
    H.col(j) = (gp - gm) / (2.0 * step);
  }
  return 0.5 * (H + H.transpose());
}

struct KktSolution {
  Eigen::VectorXd z;
  std::vector<Eigen::VectorXd> lambdas;
};

// Solves the consensus coordination QP
//   min sum_i 1/2 dx_i' H_i dx_i + g_i' dx_i   s.t. x_i + dx_i = z
// through its full stacked KKT system with a dense LU factorization.
// Unknowns: [dx_1..dx_N, z, mu_1..mu_N]; the constraint multipliers mu_i
// are the consensus duals.
inline KktSolution solve_consensus_kkt(const std::vector<AgentState>& agents) {
  const int N = static_cast<int>(agents.size());
  const Eigen::Index n = agents.front().x.size();
  const Eigen::Index total = (2 * N + 1) * n;

  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(total, total);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(total);
  const Eigen::Index z_off = N * n;
  const Eigen::Index mu_off = (N + 1) * n;

  for (int i = 0; i < N; ++i) {
    const Eigen::Index dx_i = i * n;
    const Eigen::Index mu_i = mu_off + i * n;
    // Stationarity in dx_i: H_i dx_i + mu_i = -g_i.
    K.block(dx_i, dx_i, n, n) = agents[i].hess;
    K.block(dx_i, mu_i, n, n) = Eigen::MatrixXd::Identity(n, n);
    rhs.segment(dx_i, n) = -agents[i].grad;
    // Stationarity in z collects -sum mu_i = 0.
    K.block(z_off, mu_i, n, n) -= Eigen::MatrixXd::Identity(n, n);
    // Feasibility: dx_i - z = -x_i.
    K.block(mu_i, dx_i, n, n) = Eigen::MatrixXd::Identity(n, n);
    K.block(mu_i, z_off, n, n) = -Eigen::MatrixXd::Identity(n, n);
    rhs.segment(mu_i, n) = -agents[i].x.stacked();
  }

  const Eigen::VectorXd sol = K.fullPivLu().solve(rhs);
  KktSolution out;
  out.z = sol.segment(z_off, n);
  for (int i = 0; i < N; ++i) {
    out.lambdas.push_back(sol.segment(mu_off + i * n, n));
  }
  return out;
}

// Scans one Boolean coordinate of the separable coordinator objective
//   scale/2 (v - zk)^2 + g v + alpha (1 - 2 zk) v
// over a uniform grid on [0,1] and returns the best grid point.
inline double grid_min_disc_coordinate(double zk, double g, double alpha,
                                       double scale, double resolution) {
  const int steps = static_cast<int>(std::round(1.0 / resolution));
  double best_v = 0.0;
  double best_val = std::numeric_limits<double>::infinity();
  for (int s = 0; s <= steps; ++s) {
    const double v = static_cast<double>(s) / steps;
    const double val =
        0.5 * scale * (v - zk) * (v - zk) + g * v + alpha * (1.0 - 2.0 * zk) * v;
    if (val < best_val) {
      best_val = val;
      best_v = v;
    }
  }
  return best_v;
}

// Exhaustive active-set enumeration for the box QP
//   min 1/2 (z - zk)' A (z - zk) + b' z   s.t. 0 <= z_d <= 1,
// practical for n_d <= 4: each Boolean coordinate is pinned low, pinned
// high, or free (3^n_d patterns); the best feasible stationary candidate
// is the global minimizer because A is SPD.
inline Eigen::VectorXd boxqp_enumerate(const Eigen::MatrixXd& A,
                                       const Eigen::VectorXd& b,
                                       const Eigen::VectorXd& zk,
                                       Eigen::Index n_cont) {
  const Eigen::Index n = zk.size();
  const Eigen::Index nd = n - n_cont;
  auto objective = [&](const Eigen::VectorXd& z) {
    return 0.5 * (z - zk).dot(A * (z - zk)) + b.dot(z);
  };

  Eigen::VectorXd best;
  double best_val = std::numeric_limits<double>::infinity();
  int patterns = 1;
  for (Eigen::Index j = 0; j < nd; ++j) patterns *= 3;

  for (int code = 0; code < patterns; ++code) {
    std::vector<Eigen::Index> free;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = 0; j < n_cont; ++j) free.push_back(j);
    int rem = code;
    for (Eigen::Index j = 0; j < nd; ++j) {
      const int state = rem % 3;
      rem /= 3;
      if (state == 0) {
        z[n_cont + j] = 0.0;
      } else if (state == 1) {
        z[n_cont + j] = 1.0;
      } else {
        free.push_back(n_cont + j);
      }
    }

    if (!free.empty()) {
      const Eigen::Index nf = static_cast<Eigen::Index>(free.size());
      Eigen::MatrixXd Aff(nf, nf);
      Eigen::VectorXd rhs(nf);
      for (Eigen::Index r = 0; r < nf; ++r) {
        for (Eigen::Index c = 0; c < nf; ++c) {
          Aff(r, c) = A(free[r], free[c]);
        }
      }
      // Stationarity on the free block: [A (z - zk) + b]_F = 0.
      for (Eigen::Index r = 0; r < nf; ++r) {
        double acc = b[free[r]];
        for (Eigen::Index c = 0; c < n; ++c) {
          acc += A(free[r], c) * (z[c] - zk[c]);
        }
        // Remove the contribution of the free coordinates themselves;
        // they are the unknowns.
        for (Eigen::Index c = 0; c < nf; ++c) {
          acc -= A(free[r], free[c]) * (z[free[c]] - zk[free[c]]);
        }
        rhs[r] = -acc;
      }
      const Eigen::VectorXd df = Aff.ldlt().solve(rhs);
      for (Eigen::Index r = 0; r < nf; ++r) {
        z[free[r]] = zk[free[r]] + df[r];
      }
    }

    bool feasible = true;
    for (Eigen::Index j = n_cont; j < n; ++j) {
      if (z[j] < -1e-12 || z[j] > 1.0 + 1e-12) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;

    const double val = objective(z);
    if (val < best_val) {
      best_val = val;
      best = z;
    }
  }
  return best;
}

}  // namespace mixcaladin::oracles
