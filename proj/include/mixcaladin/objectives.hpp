#pragma once

// Objective-function abstraction (value / gradient / Hessian on stacked
// mixed vectors) plus the two sensor-localization benchmark objectives
// and a generic quadratic used as a closed-form oracle in tests.

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "mixcaladin/core.hpp"

namespace mixcaladin {

/// A smooth local cost. Evaluations are pure and reentrant; agents may
/// call them concurrently. Derivatives are analytic, with finite
/// differences serving as the independent oracle in the test suite.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual Eigen::Index dim() const = 0;
  virtual double value(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::VectorXd gradient(const Eigen::VectorXd& x) const = 0;
  virtual Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const = 0;

  virtual bool is_convex() const { return false; }
  /// Gradient-Lipschitz bound, when one is known analytically.
  virtual std::optional<double> lipschitz_bound() const { return std::nullopt; }
  /// Strong-convexity bound; informational only, never consumed.
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }
};

using ObjectivePtr = std::shared_ptr<const Objective>;

/// Per-agent anchor vectors for the sensor benchmarks, drawn from a
/// seeded standard normal so instances are reproducible.
struct SensorParams {
  Eigen::VectorXd zeta_alpha;  // continuous anchor, length n_c
  Eigen::VectorXd zeta_beta;   // Boolean-block anchor, length n_d
  Eigen::VectorXd zeta_gamma;  // squared-range offsets, length n_d
};

/// 1/2 ||x_c - zeta_alpha||^2 + 1/2 ||x_d - zeta_beta||^2. Identity
/// Hessian everywhere, so L = mu = 1.
ObjectivePtr convex_sensor_objective(SensorParams params);

/// Convex part plus the squared-range residual
/// 1/2 sum_j ((x_c[j] - x_d[j])^2 - zeta_gamma[j])^2. The element-wise
/// pairing requires n_c == n_d.
ObjectivePtr nonconvex_sensor_objective(SensorParams params);

/// 1/2 x'Qx + c'x with Q symmetric positive definite.
ObjectivePtr quadratic_objective(Eigen::MatrixXd Q, Eigen::VectorXd c);

/// Axis-aligned sampling region for Lipschitz estimation.
struct Box {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  static Box cube(Eigen::Index n, double lo, double hi);
};

/// Local gradient-Lipschitz estimate: the largest Hessian eigenvalue over
/// `samples` points drawn uniformly from the box, plus a 10% margin.
double estimate_lipschitz(const Objective& obj, const Box& box, int samples,
                          std::uint64_t seed = 0x2545F4914F6CDD1DULL);

/// The consensus problem: N agents, each with a local cost over the same
/// mixed vector layout.
struct ProblemInstance {
  int num_agents = 0;
  Eigen::Index n_c = 0;
  Eigen::Index n_d = 0;
  std::vector<ObjectivePtr> objectives;
  std::optional<double> lipschitz_bound;  // max over agents, when known

  Eigen::Index dim() const { return n_c + n_d; }
  void validate() const;

  double total_value(const MixedVectorXd& z) const;
  Eigen::VectorXd total_gradient(const MixedVectorXd& z) const;
  std::vector<Eigen::MatrixXd> hessians_at(const MixedVectorXd& z) const;
};

}  // namespace mixcaladin
