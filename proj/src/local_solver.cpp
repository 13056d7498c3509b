#include "mixcaladin/local_solver.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace mixcaladin {

namespace {

std::string format_compact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

}  // namespace

Eigen::MatrixXd regularize(const Eigen::MatrixXd& H) {
  if (H.rows() != H.cols()) {
    throw std::invalid_argument("regularize: matrix must be square");
  }
  if (H.rows() == 0) {
    return H;
  }
  const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("regularize: matrix must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  const double sigma = es.eigenvalues().minCoeff();
  if (sigma > 0.0) {
    return H;
  }
  const double shift = 1.1 * (std::abs(sigma) + 0.1);
  return H + shift * Eigen::MatrixXd::Identity(H.rows(), H.cols());
}

MixedVectorXd solve_local(const Objective& obj, const Eigen::VectorXd& lambda,
                          const MixedVectorXd& z, double rho1,
                          const NewtonSettings& settings,
                          const std::optional<MixedVectorXd>& warm_start) {
  settings.validate();
  if (!(rho1 > 0.0)) {
    throw std::invalid_argument("solve_local: rho1 must be > 0");
  }
  if (z.size() != obj.dim() || lambda.size() != obj.dim()) {
    throw std::invalid_argument("solve_local: dimension mismatch");
  }
  if (!z.all_finite() || !lambda.allFinite()) {
    throw std::invalid_argument("solve_local: non-finite input");
  }

  const Eigen::VectorXd& zv = z.stacked();
  auto phi = [&](const Eigen::VectorXd& x) {
    return obj.value(x) + lambda.dot(x) + 0.5 * rho1 * (x - zv).squaredNorm();
  };
  auto phi_grad = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return obj.gradient(x) + lambda + rho1 * (x - zv);
  };

  Eigen::VectorXd x = warm_start ? warm_start->stacked() : zv;
  if (!x.allFinite()) {
    throw std::invalid_argument("solve_local: non-finite warm start");
  }

  Eigen::VectorXd grad = phi_grad(x);
  double grad_norm = grad.norm();
  const Eigen::MatrixXd prox =
      rho1 * Eigen::MatrixXd::Identity(obj.dim(), obj.dim());

  for (int step = 0; step < settings.max_steps; ++step) {
    if (grad_norm <= settings.grad_tol) {
      return z.with_stacked(std::move(x));
    }

    const Eigen::MatrixXd Hsub = regularize(obj.hessian(x)) + prox;
    Eigen::LLT<Eigen::MatrixXd> llt(Hsub);
    if (llt.info() != Eigen::Success) {
      throw NonConvergenceError("solve_local: step matrix factorization failed",
                                x, grad_norm);
    }
    const Eigen::VectorXd direction = llt.solve(-grad);
    const double slope = grad.dot(direction);  // < 0 for a descent direction

    const double fx = phi(x);
    // Near stationarity the true decrease drops below the rounding noise
    // of phi itself; the allowance keeps the line search from stalling.
    const double noise = 1e-14 * (1.0 + std::abs(fx));
    double t = 1.0;
    Eigen::VectorXd candidate = x + direction;
    bool accepted = true;
    while (phi(candidate) > fx + settings.armijo_c * t * slope + noise) {
      t *= settings.backtrack_factor;
      if (t < 1e-16) {
        accepted = false;  // numerically stalled
        break;
      }
      candidate = x + t * direction;
    }
    if (!accepted) {
      break;
    }
    x = std::move(candidate);
    grad = phi_grad(x);
    grad_norm = grad.norm();
  }

  if (grad_norm <= settings.grad_tol) {
    return z.with_stacked(std::move(x));
  }
  throw NonConvergenceError(
      "solve_local: stopped with gradient norm " + format_compact(grad_norm) +
          " above tolerance " + format_compact(settings.grad_tol),
      x, grad_norm);
}

}  // namespace mixcaladin
