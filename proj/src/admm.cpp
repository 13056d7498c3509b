#include "mixcaladin/admm.hpp"

#include <stdexcept>
#include <utility>

#include "mixcaladin/stage2.hpp"

namespace mixcaladin {

AdmmResult run_admm_projected(const ProblemInstance& problem, double rho,
                              int max_iter, double tol,
                              const NewtonSettings& newton) {
  problem.validate();
  if (!(rho > 0.0)) {
    throw std::invalid_argument("run_admm_projected: rho must be > 0");
  }
  if (max_iter < 1 || !(tol > 0.0)) {
    throw std::invalid_argument("run_admm_projected: bad termination settings");
  }
  for (const auto& obj : problem.objectives) {
    if (!obj->is_convex()) {
      throw std::invalid_argument(
          "run_admm_projected: baseline only handles convex objectives");
    }
  }

  const int N = problem.num_agents;
  AdmmState st;
  st.rho = rho;
  st.z = MixedVectorXd(problem.n_c, problem.n_d);
  st.x_list.assign(N, st.z);
  st.u_list.assign(N, Eigen::VectorXd::Zero(problem.dim()));

  AdmmResult result;
  for (int k = 1; k <= max_iter; ++k) {
    // x-update: prox of f_i at z - u_i, written as the augmented local
    // solve with dual rho * u_i.
    for (int i = 0; i < N; ++i) {
      st.x_list[i] = solve_local(*problem.objectives[i], rho * st.u_list[i],
                                 st.z, rho, newton, st.x_list[i]);
    }

    // z-update: average, then project the Boolean block onto [0,1].
    Eigen::VectorXd zv = Eigen::VectorXd::Zero(problem.dim());
    for (int i = 0; i < N; ++i) {
      zv += st.x_list[i].stacked() + st.u_list[i];
    }
    zv /= static_cast<double>(N);
    const double step_norm = [&] {
      MixedVectorXd znew = st.z.with_stacked(zv).clamped_disc(0.0, 1.0);
      const double s = (znew.stacked() - st.z.stacked()).norm();
      st.z = std::move(znew);
      return s;
    }();

    double primal = 0.0;
    for (int i = 0; i < N; ++i) {
      st.u_list[i] += st.x_list[i].stacked() - st.z.stacked();
      primal += (st.x_list[i].stacked() - st.z.stacked()).norm();
    }
    result.primal_residuals.push_back(primal);

    TraceRecord rec;
    rec.stage = Stage::Admm;
    rec.iter = k;
    rec.z = st.z;
    rec.step_norm = step_norm;
    rec.objective = problem.total_value(st.z);
    rec.gamma = gamma(st.z);
    result.trace.push_back(std::move(rec));
    result.iterations = k;

    // Primal residual alone is blind to a still-moving consensus point
    // (it is identically zero for a single agent), so the z-step stands
    // in for the dual residual.
    const double dual = rho * std::sqrt(static_cast<double>(N)) * step_norm;
    if (primal <= tol && dual <= tol) {
      result.converged = true;
      break;
    }
  }

  result.z_rounded = round_boolean(st.z);
  result.objective = problem.total_value(result.z_rounded);
  return result;
}

}  // namespace mixcaladin
