#pragma once

// Stage II: Boolean enforcement. A bi-level loop around the coordinator's
// box-constrained proximal QP: the inner level takes gradient-aggregation
// steps until the iterate settles, the outer level escalates the Boolean
// penalty weight until the complementarity residual drops below
// tolerance. Includes the energy-function and descent-inequality
// diagnostics that certify the inner loop at runtime.

#include <Eigen/Core>

#include <vector>

#include "mixcaladin/core.hpp"
#include "mixcaladin/objectives.hpp"

namespace mixcaladin {

// Tolerances for the runtime certificates, pinned project-wide.
inline constexpr double kLemma1Tol = 1e-9;
inline constexpr double kEnergyDescentTol = 1e-10;

/// Coordinator step: exact minimizer of
///   N rho2/2 ||z - z_k||^2 + z' g_sum + alpha (1 - 2 z_k_d)' z_d
/// over 0 <= z_d <= 1. Separable, so the box constraint reduces to a
/// per-coordinate clamp of the unconstrained step.
MixedVectorXd stage2_qp(const MixedVectorXd& z_k, const Eigen::VectorXd& g_sum,
                        double alpha, double rho2, int num_agents);

/// Variant keeping the raw complementarity penalty alpha (1 - z_d)' z_d
/// inside the QP instead of its linearization. Numerically fragile once
/// alpha grows past N rho2 / 2 (the per-coordinate subproblem turns
/// concave and snaps to box corners); kept for demonstration only and
/// excluded from the default pipeline.
MixedVectorXd stage2_qp_exact_penalty(const MixedVectorXd& z_k,
                                      const Eigen::VectorXd& g_sum,
                                      double alpha, double rho2,
                                      int num_agents);

/// Curvature-aware coordinator step: minimizes
///   sum_i 1/2 (z - z_k)' (H_i + rho2 I) (z - z_k) + z' g_sum
///     + alpha (1 - 2 z_k_d)' z_d   s.t. 0 <= z_d <= 1
/// by projected Newton with exact clamping. Each (H_i + rho2 I) must be
/// SPD. Returns with KKT residual norm <= 1e-9 or throws
/// NonConvergenceError carrying the best iterate.
MixedVectorXd stage2_qp_accelerated(const MixedVectorXd& z_k,
                                    const Eigen::VectorXd& g_sum,
                                    const std::vector<Eigen::MatrixXd>& hessians,
                                    double alpha, double rho2);

/// Merit function sum_i f_i(z) + alpha * gamma(z).
double energy(const ProblemInstance& problem, const MixedVectorXd& z,
              double alpha);

/// Descent inequality tying one QP step to the complementarity drop:
///   g_sum'(z_{k+1} - z_k) <= alpha (gamma_k - gamma_{k+1})
///                            - N rho2/2 ||z_{k+1} - z_k||^2 + tol.
/// Holds whenever z_k1 is the QP minimizer from (z_k, g_sum, alpha).
bool check_lemma1(const Eigen::VectorXd& g_sum, const MixedVectorXd& z_k,
                  const MixedVectorXd& z_k1, double alpha, double rho2,
                  int num_agents, double tol);

/// Snaps the disc block to {0,1}; a tie at exactly 0.5 goes to 0 so runs
/// stay reproducible.
MixedVectorXd round_boolean(const MixedVectorXd& z);

struct Stage2Options {
  bool use_exact_penalty = false;  // demonstration-only unstable variant
};

struct Stage2Result {
  MixedVectorXd z_star;
  MixedVectorXd z_rounded;
  double final_objective = 0.0;  // at z_rounded
  int inner_iterations_total = 0;
  int outer_bumps = 0;
  int capped_inner_loops = 0;  // inner loops ended by max_iter_inner
  double final_alpha = 0.0;
  std::vector<TraceRecord> trace;
  int lemma1_violations = 0;
  int energy_violations = 0;
};

/// Runs the bi-level loop from z_init (disc block clamped into [0,1]
/// first; the relaxation may end outside the box). Terminates when the
/// complementarity residual at an inner-loop limit drops below eps_outer;
/// throws MaxOuterExceededError past max_outer escalations.
Stage2Result run_stage2(const ProblemInstance& problem,
                        const AlgoParams& params, const MixedVectorXd& z_init,
                        const Stage2Options& options = {});

}  // namespace mixcaladin
