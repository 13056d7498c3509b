#pragma once

// Stage I: consensus iteration on the continuous relaxation. Each round
// runs the per-agent proximal solves, refreshes gradients and Hessian
// models, and closes with a coordination step that updates the shared
// point z and every dual in closed form.

#include <Eigen/Core>

#include <vector>

#include "mixcaladin/core.hpp"
#include "mixcaladin/local_solver.hpp"
#include "mixcaladin/objectives.hpp"

namespace mixcaladin {

/// Output of one coordination step.
struct CoordinationStep {
  Eigen::VectorXd z;                    // stacked consensus update
  std::vector<Eigen::VectorXd> lambdas; // one dual per agent
};

/// Curvature-weighted coordination
///   z = (sum H_i)^{-1} sum (H_i x_i - g_i),  lambda_i = H_i (x_i - z) - g_i.
/// Every hess must be SPD; the summed system is then SPD by construction.
CoordinationStep coordinate_general(const std::vector<AgentState>& agents);

/// Averaging coordination for convex problems, the H_i = rho1 I special
/// case: z = (1/N) sum (x_i - g_i / rho1), lambda_i = rho1 (x_i - z) - g_i.
CoordinationStep coordinate_convex(const std::vector<AgentState>& agents,
                                   double rho1);

struct Stage1Result {
  MixedVectorXd z_star;
  double relaxed_objective = 0.0;  // sum of local costs at z_star
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRecord> trace;
  std::vector<AgentState> agent_states;  // final duals kept as diagnostics
  double max_dual_sum_norm = 0.0;  // worst ||sum lambda_i|| over the run
};

/// Runs the relaxation loop until ||z_{k+1} - z_k|| <= eps_stage1 or
/// max_iter_stage1. Locals solve in a fixed agent order, so results are
/// reproducible; agent failures are rethrown with agent and iteration
/// context attached.
Stage1Result run_stage1(const ProblemInstance& problem,
                        const AlgoParams& params, const MixedVectorXd& z0,
                        const std::vector<Eigen::VectorXd>& lambda0,
                        const NewtonSettings& newton = {});

}  // namespace mixcaladin
