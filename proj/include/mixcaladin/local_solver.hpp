#pragma once

// Per-agent proximal subproblem solver: damped Newton with Armijo
// backtracking on f(x) + lambda'x + rho/2 ||x - z||^2, plus the
// eigenvalue-shift regularization that keeps Hessian models positive
// definite on nonconvex problems.

#include <Eigen/Core>

#include "mixcaladin/core.hpp"
#include "mixcaladin/objectives.hpp"

namespace mixcaladin {

struct NewtonSettings {
  double grad_tol = 1e-10;  // two orders tighter than the outer tolerance
  int max_steps = 100;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;

  void validate() const {
    if (!(grad_tol > 0.0)) throw std::invalid_argument("NewtonSettings: grad_tol must be > 0");
    if (max_steps < 1) throw std::invalid_argument("NewtonSettings: max_steps must be >= 1");
    if (!(armijo_c > 0.0 && armijo_c < 1.0)) throw std::invalid_argument("NewtonSettings: armijo_c must be in (0,1)");
    if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) throw std::invalid_argument("NewtonSettings: backtrack_factor must be in (0,1)");
  }
};

/// Eigenvalue-shift regularization: returns H unchanged when its minimum
/// eigenvalue sigma is positive, otherwise H + 1.1(|sigma| + 0.1) I, whose
/// minimum eigenvalue is at least 0.11. H must be symmetric (to 1e-12).
Eigen::MatrixXd regularize(const Eigen::MatrixXd& H);

/// Minimizes f(x) + lambda'x + rho1/2 ||x - z||^2 by damped Newton,
/// using regularize(hessian) + rho1 I as the step matrix. Starts from
/// `warm_start` when given (the previous local iterate), else from z.
/// Throws NonConvergenceError (with the best iterate and its gradient
/// norm) if max_steps runs out above grad_tol.
MixedVectorXd solve_local(const Objective& obj, const Eigen::VectorXd& lambda,
                          const MixedVectorXd& z, double rho1,
                          const NewtonSettings& settings = {},
                          const std::optional<MixedVectorXd>& warm_start = {});

}  // namespace mixcaladin
