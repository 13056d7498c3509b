#pragma once

// Core value types for the two-stage consensus mixed-Boolean optimizer:
// mixed continuous/relaxed-Boolean vectors, per-agent state, algorithm
// parameters, per-iteration trace records, and the error types thrown by
// the solvers. Everything here is a plain value type and safe to copy
// between threads.

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mixcaladin {

/// A point split into a continuous block (length n_cont) and a
/// relaxed-Boolean block (length n_disc). The blocks live in one
/// contiguous vector so stacked matrix algebra can treat the point as a
/// single vector; the split index is carried alongside and is fixed for
/// the life of the object.
template <typename Scalar>
class MixedVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  MixedVector() = default;

  MixedVector(Eigen::Index n_cont, Eigen::Index n_disc)
      : data_(Vector::Zero(n_cont + n_disc)), n_cont_(n_cont) {
    if (n_cont < 0 || n_disc < 0) {
      throw std::invalid_argument("MixedVector: negative block size");
    }
  }

  static MixedVector from_stacked(Vector stacked, Eigen::Index n_cont) {
    if (n_cont < 0 || n_cont > stacked.size()) {
      throw std::invalid_argument("MixedVector: split index out of range");
    }
    MixedVector v;
    v.data_ = std::move(stacked);
    v.n_cont_ = n_cont;
    return v;
  }

  static MixedVector from_blocks(const Vector& cont, const Vector& disc) {
    MixedVector v(cont.size(), disc.size());
    v.cont() = cont;
    v.disc() = disc;
    return v;
  }

  Eigen::Index size() const { return data_.size(); }
  Eigen::Index n_cont() const { return n_cont_; }
  Eigen::Index n_disc() const { return data_.size() - n_cont_; }

  auto cont() { return data_.head(n_cont_); }
  auto cont() const { return data_.head(n_cont_); }
  auto disc() { return data_.tail(n_disc()); }
  auto disc() const { return data_.tail(n_disc()); }

  const Vector& stacked() const { return data_; }
  Vector& stacked() { return data_; }

  /// Copy with the same split but new coefficients.
  MixedVector with_stacked(Vector stacked) const {
    if (stacked.size() != data_.size()) {
      throw std::invalid_argument("MixedVector: stacked size mismatch");
    }
    return from_stacked(std::move(stacked), n_cont_);
  }

  MixedVector clamped_disc(Scalar lo, Scalar hi) const {
    MixedVector v = *this;
    v.disc() = disc().cwiseMax(lo).cwiseMin(hi);
    return v;
  }

  bool all_finite() const { return data_.allFinite(); }

  friend bool operator==(const MixedVector& a, const MixedVector& b) {
    if (a.n_cont_ != b.n_cont_ || a.data_.size() != b.data_.size()) {
      return false;
    }
    return a.data_.size() == 0 || (a.data_.array() == b.data_.array()).all();
  }

 private:
  Vector data_;
  Eigen::Index n_cont_ = 0;
};

using MixedVectorXd = MixedVector<double>;

/// Complementarity measure (1 - z_d)' z_d. Zero exactly on Boolean points
/// inside the unit box, positive in its interior, evaluated without
/// clamping so it stays a faithful diagnostic outside the box too.
template <typename Derived>
typename Derived::Scalar gamma(const Eigen::MatrixBase<Derived>& disc) {
  using Scalar = typename Derived::Scalar;
  if (disc.size() == 0) {
    return Scalar(0);
  }
  return ((Scalar(1) - disc.array()) * disc.array()).sum();
}

template <typename Scalar>
Scalar gamma(const MixedVector<Scalar>& z) {
  return gamma(z.disc());
}

/// True when the complementarity measure is below eps_outer. The disc
/// block must already sit in the unit box (up to 1e-9 slack); anything
/// further out is a caller bug, not a feasibility answer.
template <typename Scalar>
bool is_boolean_feasible(const MixedVector<Scalar>& z, Scalar eps_outer) {
  constexpr Scalar kBoxSlack = Scalar(1e-9);
  if (z.n_disc() > 0) {
    const auto d = z.disc().array();
    if ((d < -kBoxSlack).any() || (d > Scalar(1) + kBoxSlack).any()) {
      throw std::domain_error(
          "is_boolean_feasible: disc component outside [0,1]");
    }
  }
  return gamma(z) < eps_outer;
}

enum class Stage { Stage1, Stage2Inner, Stage2OuterBump, Admm };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::Stage1:
      return "stage1";
    case Stage::Stage2Inner:
      return "stage2_inner";
    case Stage::Stage2OuterBump:
      return "stage2_bump";
    case Stage::Admm:
      return "admm";
  }
  return "unknown";
}

/// One per-iteration log record. `energy` is only populated by stage 2;
/// `alpha` is zero elsewhere.
struct TraceRecord {
  Stage stage = Stage::Stage1;
  int iter = 0;
  MixedVectorXd z;
  double step_norm = 0.0;
  double objective = 0.0;
  double gamma = 0.0;
  double alpha = 0.0;
  std::optional<double> energy;
};

/// Tunables for the full two-stage run. Defaults follow the convex
/// benchmark; `defaults_for` in the harness swaps in the nonconvex set.
struct AlgoParams {
  double rho1 = 10.0;     // stage 1 augmented-Lagrangian weight
  double rho2 = 10.0;     // stage 2 coordinator proximal weight
  double alpha0 = 0.125;  // initial Boolean penalty weight
  double beta = 2.0;      // penalty growth factor, must be > 1
  double eps_stage1 = 1e-6;
  double eps_inner = 1e-6;
  double eps_outer = 1e-6;
  int max_iter_stage1 = 1000;
  int max_iter_inner = 10000;  // cap per inner loop
  int max_outer = 60;          // cap on penalty escalations
  bool accelerated = false;        // curvature-aware stage 2 coordinator
  bool convex_coordinator = false; // averaging coordination (convex problems)

  void validate() const {
    if (!(rho1 > 0.0)) throw std::invalid_argument("AlgoParams: rho1 must be > 0");
    if (!(rho2 > 0.0)) throw std::invalid_argument("AlgoParams: rho2 must be > 0");
    if (!(alpha0 > 0.0)) throw std::invalid_argument("AlgoParams: alpha0 must be > 0");
    if (!(beta > 1.0)) throw std::invalid_argument("AlgoParams: beta must be > 1");
    if (!(eps_stage1 > 0.0)) throw std::invalid_argument("AlgoParams: eps_stage1 must be > 0");
    if (!(eps_inner > 0.0)) throw std::invalid_argument("AlgoParams: eps_inner must be > 0");
    if (!(eps_outer > 0.0)) throw std::invalid_argument("AlgoParams: eps_outer must be > 0");
    if (max_iter_stage1 < 1) throw std::invalid_argument("AlgoParams: max_iter_stage1 must be >= 1");
    if (max_iter_inner < 1) throw std::invalid_argument("AlgoParams: max_iter_inner must be >= 1");
    if (max_outer < 0) throw std::invalid_argument("AlgoParams: max_outer must be >= 0");
  }
};

/// One agent's view of the consensus iteration: local primal iterate,
/// dual estimate, and the latest gradient / positive-definite Hessian
/// model shipped to the coordinator.
struct AgentState {
  MixedVectorXd x;
  Eigen::VectorXd lambda;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

/// An iterative solve ran out of steps above tolerance. Carries the best
/// iterate found and its final gradient (or KKT residual) norm.
class NonConvergenceError : public std::runtime_error {
 public:
  NonConvergenceError(const std::string& what, Eigen::VectorXd best_iterate,
                      double gradient_norm)
      : std::runtime_error(what),
        best_(std::move(best_iterate)),
        grad_norm_(gradient_norm) {}

  const Eigen::VectorXd& best_iterate() const noexcept { return best_; }
  double gradient_norm() const noexcept { return grad_norm_; }

 private:
  Eigen::VectorXd best_;
  double grad_norm_;
};

/// The penalty escalation hit its cap before the Boolean residual dropped
/// below tolerance. Carries the lowest-residual iterate seen.
class MaxOuterExceededError : public std::runtime_error {
 public:
  MaxOuterExceededError(const std::string& what, MixedVectorXd best_iterate,
                        double best_gamma)
      : std::runtime_error(what),
        best_(std::move(best_iterate)),
        best_gamma_(best_gamma) {}

  const MixedVectorXd& best_iterate() const noexcept { return best_; }
  double best_gamma() const noexcept { return best_gamma_; }

 private:
  MixedVectorXd best_;
  double best_gamma_;
};

}  // namespace mixcaladin
