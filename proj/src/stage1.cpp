#include "mixcaladin/stage1.hpp"

#include <Eigen/Cholesky>

#include <cassert>
#include <stdexcept>
#include <string>
#include <utility>

namespace mixcaladin {

namespace {

void check_agents(const std::vector<AgentState>& agents) {
  if (agents.empty()) {
    throw std::invalid_argument("coordinate: empty agent list");
  }
  const Eigen::Index n = agents.front().x.size();
  for (const auto& a : agents) {
    if (a.x.size() != n || a.grad.size() != n) {
      throw std::invalid_argument("coordinate: inconsistent agent dimensions");
    }
  }
}

}  // namespace

CoordinationStep coordinate_general(const std::vector<AgentState>& agents) {
  check_agents(agents);
  const Eigen::Index n = agents.front().x.size();

  Eigen::MatrixXd h_sum = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& a : agents) {
    if (a.hess.rows() != n || a.hess.cols() != n) {
      throw std::invalid_argument("coordinate_general: Hessian size mismatch");
    }
    h_sum += a.hess;
    rhs += a.hess * a.x.stacked() - a.grad;
  }

  Eigen::LLT<Eigen::MatrixXd> llt(h_sum);
  // SPD summands make the system SPD; a failure here is a caller bug.
  assert(llt.info() == Eigen::Success);

  CoordinationStep step;
  step.z = llt.solve(rhs);
  step.lambdas.reserve(agents.size());
  for (const auto& a : agents) {
    step.lambdas.push_back(a.hess * (a.x.stacked() - step.z) - a.grad);
  }
  return step;
}

CoordinationStep coordinate_convex(const std::vector<AgentState>& agents,
                                   double rho1) {
  check_agents(agents);
  if (!(rho1 > 0.0)) {
    throw std::invalid_argument("coordinate_convex: rho1 must be > 0");
  }
  const Eigen::Index n = agents.front().x.size();

  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  for (const auto& a : agents) {
    z += a.x.stacked() - a.grad / rho1;
  }
  z /= static_cast<double>(agents.size());

  CoordinationStep step;
  step.z = std::move(z);
  step.lambdas.reserve(agents.size());
  for (const auto& a : agents) {
    step.lambdas.push_back(rho1 * (a.x.stacked() - step.z) - a.grad);
  }
  return step;
}

Stage1Result run_stage1(const ProblemInstance& problem,
                        const AlgoParams& params, const MixedVectorXd& z0,
                        const std::vector<Eigen::VectorXd>& lambda0,
                        const NewtonSettings& newton) {
  problem.validate();
  params.validate();
  const int N = problem.num_agents;
  if (z0.size() != problem.dim() || z0.n_cont() != problem.n_c) {
    throw std::invalid_argument("run_stage1: z0 layout mismatch");
  }
  if (!z0.all_finite()) {
    throw std::invalid_argument("run_stage1: non-finite z0");
  }
  if (static_cast<int>(lambda0.size()) != N) {
    throw std::invalid_argument("run_stage1: lambda0 list length mismatch");
  }
  for (const auto& l : lambda0) {
    if (l.size() != problem.dim() || !l.allFinite()) {
      throw std::invalid_argument("run_stage1: bad initial dual");
    }
  }

  std::vector<AgentState> agents(N);
  for (int i = 0; i < N; ++i) {
    agents[i].x = z0;
    agents[i].lambda = lambda0[i];
  }
  const Eigen::MatrixXd prox_hess =
      params.rho1 * Eigen::MatrixXd::Identity(problem.dim(), problem.dim());

  Stage1Result result;
  result.trace.reserve(params.max_iter_stage1);
  MixedVectorXd z = z0;

  for (int k = 1; k <= params.max_iter_stage1; ++k) {
    // Per-agent work; each solve is pure in its inputs, so the fixed loop
    // order only pins reproducibility, not correctness.
    for (int i = 0; i < N; ++i) {
      const Objective& obj = *problem.objectives[i];
      try {
        agents[i].x = solve_local(obj, agents[i].lambda, z, params.rho1,
                                  newton, agents[i].x);
      } catch (const NonConvergenceError& e) {
        throw NonConvergenceError("stage 1, agent " + std::to_string(i) +
                                      ", iteration " + std::to_string(k) +
                                      ": " + e.what(),
                                  e.best_iterate(), e.gradient_norm());
      }
      agents[i].grad = obj.gradient(agents[i].x.stacked());
      agents[i].hess = params.convex_coordinator
                           ? prox_hess
                           : regularize(obj.hessian(agents[i].x.stacked()));
    }

    CoordinationStep step = params.convex_coordinator
                                ? coordinate_convex(agents, params.rho1)
                                : coordinate_general(agents);

    Eigen::VectorXd dual_sum = Eigen::VectorXd::Zero(problem.dim());
    for (int i = 0; i < N; ++i) {
      agents[i].lambda = std::move(step.lambdas[i]);
      dual_sum += agents[i].lambda;
    }
    result.max_dual_sum_norm =
        std::max(result.max_dual_sum_norm, dual_sum.norm());

    const double step_norm = (step.z - z.stacked()).norm();
    z = z.with_stacked(std::move(step.z));

    TraceRecord rec;
    rec.stage = Stage::Stage1;
    rec.iter = k;
    rec.z = z;
    rec.step_norm = step_norm;
    rec.objective = problem.total_value(z);
    rec.gamma = gamma(z);
    result.trace.push_back(std::move(rec));
    result.iterations = k;

    if (step_norm <= params.eps_stage1) {
      result.converged = true;
      break;
    }
  }

  result.z_star = z;
  result.relaxed_objective = problem.total_value(z);
  result.agent_states = std::move(agents);
  return result;
}

}  // namespace mixcaladin
