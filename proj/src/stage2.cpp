#include "mixcaladin/stage2.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace mixcaladin {

namespace {

constexpr double kBoxSlack = 1e-9;

void check_qp_inputs(const MixedVectorXd& z_k, const Eigen::VectorXd& g_sum,
                     double rho2, int num_agents, const char* who) {
  if (!(rho2 > 0.0)) {
    throw std::invalid_argument(std::string(who) + ": rho2 must be > 0");
  }
  if (num_agents < 1) {
    throw std::invalid_argument(std::string(who) + ": num_agents must be >= 1");
  }
  if (g_sum.size() != z_k.size()) {
    throw std::invalid_argument(std::string(who) + ": gradient size mismatch");
  }
  if (!z_k.all_finite() || !g_sum.allFinite()) {
    throw std::invalid_argument(std::string(who) + ": non-finite input");
  }
  if (z_k.n_disc() > 0) {
    const auto d = z_k.disc().array();
    if ((d < -kBoxSlack).any() || (d > 1.0 + kBoxSlack).any()) {
      throw std::invalid_argument(std::string(who) +
                                  ": z_k disc block outside [0,1]");
    }
  }
}

}  // namespace

MixedVectorXd stage2_qp(const MixedVectorXd& z_k, const Eigen::VectorXd& g_sum,
                        double alpha, double rho2, int num_agents) {
  check_qp_inputs(z_k, g_sum, rho2, num_agents, "stage2_qp");
  const double scale = num_agents * rho2;
  const Eigen::Index nc = z_k.n_cont();
  const Eigen::Index nd = z_k.n_disc();

  MixedVectorXd z = z_k;
  z.cont() = z_k.cont() - g_sum.head(nc) / scale;
  if (nd > 0) {
    const auto zd = z_k.disc().array();
    z.disc() = ((zd - (g_sum.tail(nd).array() + alpha * (1.0 - 2.0 * zd)) / scale)
                    .max(0.0)
                    .min(1.0))
                   .matrix();
  }
  return z;
}

MixedVectorXd stage2_qp_exact_penalty(const MixedVectorXd& z_k,
                                      const Eigen::VectorXd& g_sum,
                                      double alpha, double rho2,
                                      int num_agents) {
  check_qp_inputs(z_k, g_sum, rho2, num_agents, "stage2_qp_exact_penalty");
  const double scale = num_agents * rho2;
  const Eigen::Index nc = z_k.n_cont();
  const Eigen::Index nd = z_k.n_disc();

  MixedVectorXd z = z_k;
  z.cont() = z_k.cont() - g_sum.head(nc) / scale;
  for (Eigen::Index j = 0; j < nd; ++j) {
    const double zk = z_k.disc()[j];
    const double g = g_sum[nc + j];
    const double curvature = scale - 2.0 * alpha;
    auto cost = [&](double v) {
      return 0.5 * scale * (v - zk) * (v - zk) + g * v + alpha * (1.0 - v) * v;
    };
    double v;
    if (curvature > 0.0) {
      v = std::clamp((scale * zk - g - alpha) / curvature, 0.0, 1.0);
    } else {
      // Concave (or flat) coordinate subproblem: a box endpoint wins.
      v = cost(1.0) < cost(0.0) ? 1.0 : 0.0;
    }
    z.disc()[j] = v;
  }
  return z;
}

MixedVectorXd stage2_qp_accelerated(const MixedVectorXd& z_k,
                                    const Eigen::VectorXd& g_sum,
                                    const std::vector<Eigen::MatrixXd>& hessians,
                                    double alpha, double rho2) {
  const int N = static_cast<int>(hessians.size());
  check_qp_inputs(z_k, g_sum, rho2, N, "stage2_qp_accelerated");
  const Eigen::Index n = z_k.size();
  const Eigen::Index nc = z_k.n_cont();
  const Eigen::Index nd = z_k.n_disc();

  Eigen::MatrixXd A =
      N * rho2 * Eigen::MatrixXd::Identity(n, n);
  for (const auto& H : hessians) {
    if (H.rows() != n || H.cols() != n) {
      throw std::invalid_argument(
          "stage2_qp_accelerated: Hessian size mismatch");
    }
    A += H;
  }

  // Linear term of the shifted quadratic: q(z) = 1/2 (z-z_k)'A(z-z_k) + b'z.
  Eigen::VectorXd b = g_sum;
  if (nd > 0) {
    b.tail(nd) += alpha * (1.0 - 2.0 * z_k.disc().array()).matrix();
  }

  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument(
        "stage2_qp_accelerated: summed step matrix is not positive definite");
  }

  const Eigen::VectorXd& zk = z_k.stacked();
  Eigen::VectorXd z = zk - llt.solve(b);
  bool interior = true;
  for (Eigen::Index j = nc; j < n; ++j) {
    if (z[j] < 0.0 || z[j] > 1.0) {
      interior = false;
      break;
    }
  }
  if (interior) {
    return z_k.with_stacked(std::move(z));
  }

  auto clamp_disc = [&](Eigen::VectorXd& v) {
    for (Eigen::Index j = nc; j < n; ++j) {
      v[j] = std::clamp(v[j], 0.0, 1.0);
    }
  };
  auto quad = [&](const Eigen::VectorXd& v) {
    return 0.5 * (v - zk).dot(A * (v - zk)) + b.dot(v);
  };
  auto kkt_residual = [&](const Eigen::VectorXd& v,
                          const Eigen::VectorXd& grad) {
    double sq = grad.head(nc).squaredNorm();
    for (Eigen::Index j = nc; j < n; ++j) {
      const double proj = std::clamp(v[j] - grad[j], 0.0, 1.0);
      sq += (v[j] - proj) * (v[j] - proj);
    }
    return std::sqrt(sq);
  };

  clamp_disc(z);
  constexpr int kMaxSteps = 200;
  constexpr double kKktTol = 1e-9;
  Eigen::VectorXd best = z;
  double best_res = std::numeric_limits<double>::infinity();

  for (int step = 0; step < kMaxSteps; ++step) {
    const Eigen::VectorXd grad = A * (z - zk) + b;
    const double res = kkt_residual(z, grad);
    if (res < best_res) {
      best_res = res;
      best = z;
    }
    if (res <= kKktTol) {
      return z_k.with_stacked(std::move(z));
    }

    // Free set: continuous coordinates always, disc coordinates unless
    // pinned at a bound with the gradient pointing outward.
    std::vector<Eigen::Index> free;
    free.reserve(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      const bool active_low = j >= nc && z[j] <= 0.0 && grad[j] > 0.0;
      const bool active_high = j >= nc && z[j] >= 1.0 && grad[j] < 0.0;
      if (!active_low && !active_high) {
        free.push_back(j);
      }
    }
    if (free.empty()) {
      continue;  // all pinned; residual test above decides
    }

    Eigen::MatrixXd Aff(free.size(), free.size());
    Eigen::VectorXd gf(free.size());
    for (std::size_t r = 0; r < free.size(); ++r) {
      gf[static_cast<Eigen::Index>(r)] = grad[free[r]];
      for (std::size_t c = 0; c < free.size(); ++c) {
        Aff(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            A(free[r], free[c]);
      }
    }
    Eigen::LLT<Eigen::MatrixXd> llt_ff(Aff);
    if (llt_ff.info() != Eigen::Success) {
      break;
    }
    const Eigen::VectorXd df = llt_ff.solve(-gf);

    Eigen::VectorXd direction = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < free.size(); ++r) {
      direction[free[r]] = df[static_cast<Eigen::Index>(r)];
    }

    // Full projected step, halved along the clamped arc if it overshoots.
    const double q0 = quad(z);
    double t = 1.0;
    Eigen::VectorXd candidate = z + direction;
    clamp_disc(candidate);
    while (quad(candidate) > q0 && t > 1e-14) {
      t *= 0.5;
      candidate = z + t * direction;
      clamp_disc(candidate);
    }
    z = std::move(candidate);
  }

  throw NonConvergenceError(
      "stage2_qp_accelerated: KKT residual " + std::to_string(best_res) +
          " above tolerance",
      best, best_res);
}

double energy(const ProblemInstance& problem, const MixedVectorXd& z,
              double alpha) {
  return problem.total_value(z) + alpha * gamma(z);
}

bool check_lemma1(const Eigen::VectorXd& g_sum, const MixedVectorXd& z_k,
                  const MixedVectorXd& z_k1, double alpha, double rho2,
                  int num_agents, double tol) {
  const Eigen::VectorXd diff = z_k1.stacked() - z_k.stacked();
  const double lhs = g_sum.dot(diff);
  const double rhs = alpha * (gamma(z_k) - gamma(z_k1)) -
                     0.5 * num_agents * rho2 * diff.squaredNorm();
  return lhs <= rhs + tol;
}

MixedVectorXd round_boolean(const MixedVectorXd& z) {
  MixedVectorXd r = z;
  for (Eigen::Index j = 0; j < r.n_disc(); ++j) {
    r.disc()[j] = r.disc()[j] > 0.5 ? 1.0 : 0.0;
  }
  return r;
}

Stage2Result run_stage2(const ProblemInstance& problem,
                        const AlgoParams& params, const MixedVectorXd& z_init,
                        const Stage2Options& options) {
  problem.validate();
  params.validate();
  if (z_init.size() != problem.dim() || z_init.n_cont() != problem.n_c) {
    throw std::invalid_argument("run_stage2: z_init layout mismatch");
  }
  if (!z_init.all_finite()) {
    throw std::invalid_argument("run_stage2: non-finite z_init");
  }
  if (params.accelerated && options.use_exact_penalty) {
    throw std::invalid_argument(
        "run_stage2: exact penalty is only wired to the separable coordinator");
  }

  const int N = problem.num_agents;
  // The relaxation may end outside the unit box; the penalty
  // linearization needs the current iterate inside it.
  MixedVectorXd z = z_init.clamped_disc(0.0, 1.0);

  Stage2Result result;
  double alpha = params.alpha0;
  double prev_energy = energy(problem, z, alpha);

  MixedVectorXd best = z;
  double best_gamma = gamma(z);

  for (;;) {
    bool inner_converged = false;
    for (int t = 0; t < params.max_iter_inner; ++t) {
      const Eigen::VectorXd g_sum = problem.total_gradient(z);
      MixedVectorXd z_new =
          params.accelerated
              ? stage2_qp_accelerated(z, g_sum, problem.hessians_at(z), alpha,
                                      params.rho2)
              : (options.use_exact_penalty
                     ? stage2_qp_exact_penalty(z, g_sum, alpha, params.rho2, N)
                     : stage2_qp(z, g_sum, alpha, params.rho2, N));
      ++result.inner_iterations_total;

      if (!check_lemma1(g_sum, z, z_new, alpha, params.rho2, N, kLemma1Tol)) {
        ++result.lemma1_violations;
      }
      const double step_norm = (z_new.stacked() - z.stacked()).norm();
      const double e_new = energy(problem, z_new, alpha);
      if (step_norm > 0.0 && e_new - prev_energy > kEnergyDescentTol) {
        ++result.energy_violations;
      }
      z = std::move(z_new);
      prev_energy = e_new;
      const double gamma_now = gamma(z);

      TraceRecord rec;
      rec.stage = Stage::Stage2Inner;
      rec.iter = result.inner_iterations_total;
      rec.z = z;
      rec.step_norm = step_norm;
      rec.objective = problem.total_value(z);
      rec.gamma = gamma_now;
      rec.alpha = alpha;
      rec.energy = e_new;
      result.trace.push_back(std::move(rec));

      if (gamma_now < best_gamma) {
        best_gamma = gamma_now;
        best = z;
      }
      if (step_norm <= params.eps_inner) {
        inner_converged = true;
        break;
      }
    }
    if (!inner_converged) {
      ++result.capped_inner_loops;
    }

    if (gamma(z) < params.eps_outer) {
      break;  // Boolean residual resolved at this inner limit
    }
    if (result.outer_bumps >= params.max_outer) {
      throw MaxOuterExceededError(
          "run_stage2: Boolean residual " + std::to_string(gamma(z)) +
              " still above eps_outer after " +
              std::to_string(result.outer_bumps) + " penalty escalations",
          best, best_gamma);
    }

    alpha *= params.beta;
    ++result.outer_bumps;
    prev_energy = energy(problem, z, alpha);

    TraceRecord rec;
    rec.stage = Stage::Stage2OuterBump;
    rec.iter = result.inner_iterations_total;
    rec.z = z;
    rec.step_norm = 0.0;
    rec.objective = problem.total_value(z);
    rec.gamma = gamma(z);
    rec.alpha = alpha;
    rec.energy = prev_energy;
    result.trace.push_back(std::move(rec));
  }

  result.z_star = z;
  result.z_rounded = round_boolean(z);
  result.final_objective = problem.total_value(result.z_rounded);
  result.final_alpha = alpha;
  return result;
}

}  // namespace mixcaladin
