#include "mixcaladin/objectives.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <stdexcept>
#include <utility>

#include "mixcaladin/rng.hpp"

namespace mixcaladin {

namespace {

void check_dim(const Eigen::VectorXd& x, Eigen::Index expected,
               const char* who) {
  if (x.size() != expected) {
    throw std::invalid_argument(std::string(who) + ": dimension mismatch");
  }
}

class ConvexSensorObjective final : public Objective {
 public:
  explicit ConvexSensorObjective(SensorParams p) : p_(std::move(p)) {}

  Eigen::Index dim() const override {
    return p_.zeta_alpha.size() + p_.zeta_beta.size();
  }

  double value(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "ConvexSensorObjective::value");
    const Eigen::Index nc = p_.zeta_alpha.size();
    return 0.5 * (x.head(nc) - p_.zeta_alpha).squaredNorm() +
           0.5 * (x.tail(x.size() - nc) - p_.zeta_beta).squaredNorm();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "ConvexSensorObjective::gradient");
    const Eigen::Index nc = p_.zeta_alpha.size();
    Eigen::VectorXd g(x.size());
    g.head(nc) = x.head(nc) - p_.zeta_alpha;
    g.tail(x.size() - nc) = x.tail(x.size() - nc) - p_.zeta_beta;
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "ConvexSensorObjective::hessian");
    return Eigen::MatrixXd::Identity(dim(), dim());
  }

  bool is_convex() const override { return true; }
  std::optional<double> lipschitz_bound() const override { return 1.0; }
  std::optional<double> strong_convexity() const override { return 1.0; }

 private:
  SensorParams p_;
};

class NonconvexSensorObjective final : public Objective {
 public:
  explicit NonconvexSensorObjective(SensorParams p) : p_(std::move(p)) {
    if (p_.zeta_alpha.size() != p_.zeta_beta.size()) {
      throw std::invalid_argument(
          "nonconvex_sensor_objective: element-wise range residuals require "
          "n_c == n_d");
    }
    if (p_.zeta_gamma.size() != p_.zeta_beta.size()) {
      throw std::invalid_argument(
          "nonconvex_sensor_objective: zeta_gamma length mismatch");
    }
  }

  Eigen::Index dim() const override { return 2 * p_.zeta_alpha.size(); }

  double value(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "NonconvexSensorObjective::value");
    const Eigen::Index n = p_.zeta_alpha.size();
    const auto y = x.head(n);
    const auto b = x.tail(n);
    const Eigen::ArrayXd r =
        (y - b).array().square() - p_.zeta_gamma.array();
    return 0.5 * (y - p_.zeta_alpha).squaredNorm() +
           0.5 * (b - p_.zeta_beta).squaredNorm() + 0.5 * r.square().sum();
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "NonconvexSensorObjective::gradient");
    const Eigen::Index n = p_.zeta_alpha.size();
    const auto y = x.head(n);
    const auto b = x.tail(n);
    const Eigen::ArrayXd u = (y - b).array();
    const Eigen::ArrayXd r = u.square() - p_.zeta_gamma.array();
    // d/dy 1/2 r^2 = 2 r u, and the b-derivative is its negative.
    const Eigen::ArrayXd pull = 2.0 * r * u;
    Eigen::VectorXd g(dim());
    g.head(n) = (y - p_.zeta_alpha).array() + pull;
    g.tail(n) = (b - p_.zeta_beta).array() - pull;
    return g;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "NonconvexSensorObjective::hessian");
    const Eigen::Index n = p_.zeta_alpha.size();
    const auto y = x.head(n);
    const auto b = x.tail(n);
    const Eigen::ArrayXd u = (y - b).array();
    const Eigen::ArrayXd r = u.square() - p_.zeta_gamma.array();
    // Each residual couples only the pair (y_j, b_j) with curvature
    // h_j = 6 u_j^2 - 2 zeta_gamma_j on the (e_y - e_b) direction.
    const Eigen::ArrayXd h = 4.0 * u.square() + 2.0 * r;
    Eigen::MatrixXd H = Eigen::MatrixXd::Identity(dim(), dim());
    for (Eigen::Index j = 0; j < n; ++j) {
      H(j, j) += h[j];
      H(n + j, n + j) += h[j];
      H(j, n + j) -= h[j];
      H(n + j, j) -= h[j];
    }
    return H;
  }

  bool is_convex() const override { return false; }

 private:
  SensorParams p_;
};

class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Eigen::MatrixXd Q, Eigen::VectorXd c)
      : Q_(std::move(Q)), c_(std::move(c)) {
    if (Q_.rows() != Q_.cols() || Q_.rows() != c_.size()) {
      throw std::invalid_argument("quadratic_objective: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        Q_, Eigen::EigenvaluesOnly);
    const double asym = (Q_ - Q_.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 || es.eigenvalues().minCoeff() <= 0.0) {
      throw std::invalid_argument(
          "quadratic_objective: Q must be symmetric positive definite");
    }
    l_max_ = es.eigenvalues().maxCoeff();
    mu_ = es.eigenvalues().minCoeff();
  }

  Eigen::Index dim() const override { return Q_.rows(); }

  double value(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "QuadraticObjective::value");
    return 0.5 * x.dot(Q_ * x) + c_.dot(x);
  }

  Eigen::VectorXd gradient(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "QuadraticObjective::gradient");
    return Q_ * x + c_;
  }

  Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const override {
    check_dim(x, dim(), "QuadraticObjective::hessian");
    return Q_;
  }

  bool is_convex() const override { return true; }
  std::optional<double> lipschitz_bound() const override { return l_max_; }
  std::optional<double> strong_convexity() const override { return mu_; }

 private:
  Eigen::MatrixXd Q_;
  Eigen::VectorXd c_;
  double l_max_ = 0.0;
  double mu_ = 0.0;
};

}  // namespace

ObjectivePtr convex_sensor_objective(SensorParams params) {
  return std::make_shared<ConvexSensorObjective>(std::move(params));
}

ObjectivePtr nonconvex_sensor_objective(SensorParams params) {
  return std::make_shared<NonconvexSensorObjective>(std::move(params));
}

ObjectivePtr quadratic_objective(Eigen::MatrixXd Q, Eigen::VectorXd c) {
  return std::make_shared<QuadraticObjective>(std::move(Q), std::move(c));
}

Box Box::cube(Eigen::Index n, double lo, double hi) {
  Box b;
  b.lo = Eigen::VectorXd::Constant(n, lo);
  b.hi = Eigen::VectorXd::Constant(n, hi);
  return b;
}

double estimate_lipschitz(const Objective& obj, const Box& box, int samples,
                          std::uint64_t seed) {
  if (samples < 2) {
    throw std::invalid_argument("estimate_lipschitz: samples must be >= 2");
  }
  if (box.lo.size() != obj.dim() || box.hi.size() != obj.dim()) {
    throw std::invalid_argument("estimate_lipschitz: box dimension mismatch");
  }
  SeededRng rng(seed);
  double worst = 0.0;
  Eigen::VectorXd x(obj.dim());
  for (int s = 0; s < samples; ++s) {
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      x[i] = rng.uniform(box.lo[i], box.hi[i]);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(obj.hessian(x),
                                                      Eigen::EigenvaluesOnly);
    worst = std::max(worst, es.eigenvalues().maxCoeff());
  }
  return 1.1 * worst;
}

void ProblemInstance::validate() const {
  if (num_agents < 1) {
    throw std::invalid_argument("ProblemInstance: num_agents must be >= 1");
  }
  if (n_c < 0 || n_d < 0) {
    throw std::invalid_argument("ProblemInstance: negative block size");
  }
  if (static_cast<int>(objectives.size()) != num_agents) {
    throw std::invalid_argument(
        "ProblemInstance: objectives list length must equal num_agents");
  }
  for (const auto& obj : objectives) {
    if (!obj || obj->dim() != dim()) {
      throw std::invalid_argument(
          "ProblemInstance: objective dimension mismatch");
    }
  }
  if (lipschitz_bound && !(*lipschitz_bound > 0.0)) {
    throw std::invalid_argument(
        "ProblemInstance: lipschitz_bound must be positive");
  }
}

double ProblemInstance::total_value(const MixedVectorXd& z) const {
  double v = 0.0;
  for (const auto& obj : objectives) {
    v += obj->value(z.stacked());
  }
  return v;
}

Eigen::VectorXd ProblemInstance::total_gradient(const MixedVectorXd& z) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim());
  for (const auto& obj : objectives) {
    g += obj->gradient(z.stacked());
  }
  return g;
}

std::vector<Eigen::MatrixXd> ProblemInstance::hessians_at(
    const MixedVectorXd& z) const {
  std::vector<Eigen::MatrixXd> hs;
  hs.reserve(objectives.size());
  for (const auto& obj : objectives) {
    hs.push_back(obj->hessian(z.stacked()));
  }
  return hs;
}

}  // namespace mixcaladin
