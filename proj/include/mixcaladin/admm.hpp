#pragma once

// Projection-based consensus ADMM baseline (scaled-dual form) for convex
// instances: standard splitting on the continuous relaxation with the
// Boolean block projected onto [0,1] each round and hard-rounded only on
// the final iterate. Heuristic by construction; no convergence claims.

#include <Eigen/Core>

#include <vector>

#include "mixcaladin/core.hpp"
#include "mixcaladin/local_solver.hpp"
#include "mixcaladin/objectives.hpp"

namespace mixcaladin {

struct AdmmState {
  std::vector<MixedVectorXd> x_list;
  MixedVectorXd z;
  std::vector<Eigen::VectorXd> u_list;  // scaled duals
  double rho = 0.0;
};

struct AdmmResult {
  MixedVectorXd z_rounded;
  double objective = 0.0;  // at z_rounded
  std::vector<TraceRecord> trace;
  std::vector<double> primal_residuals;  // sum_i ||x_i - z|| per iteration
  int iterations = 0;
  bool converged = false;
};

/// Runs scaled-dual consensus ADMM until the primal residual drops below
/// tol or max_iter rounds pass. Only defined for convex objectives.
AdmmResult run_admm_projected(const ProblemInstance& problem, double rho,
                              int max_iter, double tol,
                              const NewtonSettings& newton = {});

}  // namespace mixcaladin
