#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "mixcaladin/objectives.hpp"
#include "mixcaladin/rng.hpp"
#include "oracles.hpp"

using namespace mixcaladin;

namespace {

SensorParams random_sensor_params(SeededRng& rng, Eigen::Index nc,
                                  Eigen::Index nd) {
  SensorParams p;
  p.zeta_alpha = rng.normal_vector(nc);
  p.zeta_beta = rng.normal_vector(nd);
  p.zeta_gamma = rng.normal_vector(nd);
  return p;
}

// Flat objective used to pin the Lipschitz estimator's zero case.
class ZeroObjective final : public Objective {
 public:
  explicit ZeroObjective(Eigen::Index n) : n_(n) {}
  Eigen::Index dim() const override { return n_; }
  double value(const Eigen::VectorXd&) const override { return 0.0; }
  Eigen::VectorXd gradient(const Eigen::VectorXd&) const override {
    return Eigen::VectorXd::Zero(n_);
  }
  Eigen::MatrixXd hessian(const Eigen::VectorXd&) const override {
    return Eigen::MatrixXd::Zero(n_, n_);
  }
  bool is_convex() const override { return true; }

 private:
  Eigen::Index n_;
};

}  // namespace

TEST_CASE("convex sensor objective matches its closed form") {
  SeededRng rng(11);
  SensorParams p = random_sensor_params(rng, 4, 3);
  auto obj = convex_sensor_objective(p);

  Eigen::VectorXd minimizer(7);
  minimizer << p.zeta_alpha, p.zeta_beta;
  CHECK(obj->value(minimizer) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(obj->gradient(minimizer).norm() == doctest::Approx(0.0).epsilon(1e-15));

  SensorParams zero;
  zero.zeta_alpha = Eigen::VectorXd::Zero(2);
  zero.zeta_beta = Eigen::VectorXd::Zero(2);
  zero.zeta_gamma = Eigen::VectorXd::Zero(2);
  auto at_origin = convex_sensor_objective(zero);
  CHECK(at_origin->value(Eigen::VectorXd::Zero(4)) == 0.0);

  // One-dimensional blocks evaluated by hand.
  SensorParams one;
  one.zeta_alpha = Eigen::VectorXd::Constant(1, 1.0);
  one.zeta_beta = Eigen::VectorXd::Zero(1);
  one.zeta_gamma = Eigen::VectorXd::Zero(1);
  auto small = convex_sensor_objective(one);
  Eigen::Vector2d x(0.0, 1.0);
  CHECK(small->value(x) == doctest::Approx(1.0));
  CHECK(small->gradient(x)[0] == doctest::Approx(-1.0));
  CHECK(small->gradient(x)[1] == doctest::Approx(1.0));

  CHECK(obj->is_convex());
  CHECK(obj->lipschitz_bound().value() == 1.0);
}

TEST_CASE("convex sensor Hessian is the identity everywhere") {
  SeededRng rng(12);
  SensorParams p = random_sensor_params(rng, 5, 5);
  auto obj = convex_sensor_objective(p);
  for (int t = 0; t < 10; ++t) {
    const Eigen::VectorXd x = rng.normal_vector(10);
    CHECK((obj->hessian(x) - Eigen::MatrixXd::Identity(10, 10))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("nonconvex sensor objective: hand-checked values") {
  // Residual vanishes when the paired blocks coincide and the offsets are
  // zero, leaving just the convex part.
  SeededRng rng(13);
  SensorParams p = random_sensor_params(rng, 3, 3);
  p.zeta_gamma.setZero();
  auto obj = nonconvex_sensor_objective(p);
  Eigen::VectorXd x(6);
  x << 0.3, -0.2, 0.9, 0.3, -0.2, 0.9;
  const double convex_part = 0.5 * (x.head(3) - p.zeta_alpha).squaredNorm() +
                             0.5 * (x.tail(3) - p.zeta_beta).squaredNorm();
  CHECK(obj->value(x) == doctest::Approx(convex_part).epsilon(1e-14));

  SensorParams one;
  one.zeta_alpha = Eigen::VectorXd::Zero(1);
  one.zeta_beta = Eigen::VectorXd::Zero(1);
  one.zeta_gamma = Eigen::VectorXd::Constant(1, 1.0);
  auto small = nonconvex_sensor_objective(one);
  const Eigen::Vector2d origin(0.0, 0.0);
  CHECK(small->value(origin) == doctest::Approx(0.5));
  // The quartic pull carries a factor (y - b) = 0 at the origin.
  CHECK(small->gradient(origin).norm() == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("sensor derivatives agree with finite differences") {
  SeededRng rng(14);
  SensorParams p = random_sensor_params(rng, 4, 4);
  const auto objs = {convex_sensor_objective(p), nonconvex_sensor_objective(p)};
  for (const auto& obj : objs) {
    for (int t = 0; t < 20; ++t) {
      const Eigen::VectorXd x = rng.normal_vector(obj->dim());
      const Eigen::VectorXd g = obj->gradient(x);
      const Eigen::VectorXd g_fd = oracles::fd_gradient(*obj, x);
      CHECK((g - g_fd).norm() <= 1e-5 * std::max(1.0, g.norm()));

      const Eigen::MatrixXd H = obj->hessian(x);
      const Eigen::MatrixXd H_fd = oracles::fd_hessian(*obj, x);
      CHECK((H - H_fd).norm() <= 1e-4 * std::max(1.0, H.norm()));
    }
  }
}

TEST_CASE("nonconvex value is invariant under swapping the paired blocks") {
  // (y - b)^2 = (b - y)^2, so with matching anchors the blocks commute.
  SeededRng rng(15);
  SensorParams p = random_sensor_params(rng, 4, 4);
  p.zeta_beta = p.zeta_alpha;
  auto obj = nonconvex_sensor_objective(p);
  for (int t = 0; t < 50; ++t) {
    const Eigen::VectorXd y = rng.normal_vector(4);
    const Eigen::VectorXd b = rng.normal_vector(4);
    Eigen::VectorXd x(8), x_swapped(8);
    x << y, b;
    x_swapped << b, y;
    CHECK(obj->value(x) == doctest::Approx(obj->value(x_swapped)).epsilon(1e-13));
  }
}

TEST_CASE("nonconvex sensor objective rejects mismatched blocks") {
  SensorParams p;
  p.zeta_alpha = Eigen::VectorXd::Zero(3);
  p.zeta_beta = Eigen::VectorXd::Zero(2);
  p.zeta_gamma = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS(nonconvex_sensor_objective(p), std::invalid_argument);
}

TEST_CASE("quadratic objective closed forms") {
  auto identity = quadratic_objective(Eigen::MatrixXd::Identity(3, 3),
                                      Eigen::VectorXd::Zero(3));
  CHECK(identity->value(Eigen::VectorXd::Zero(3)) == 0.0);

  auto shifted = quadratic_objective(Eigen::MatrixXd::Identity(3, 3),
                                     -Eigen::VectorXd::Ones(3));
  CHECK(shifted->gradient(Eigen::VectorXd::Ones(3)).norm() == 0.0);

  Eigen::MatrixXd Q = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  auto diag = quadratic_objective(Q, Eigen::Vector2d(-2.0, -4.0));
  const Eigen::Vector2d minimizer(1.0, 1.0);
  CHECK(diag->gradient(minimizer).norm() == doctest::Approx(0.0));
  CHECK(diag->value(minimizer) == doctest::Approx(-3.0));
  CHECK(diag->lipschitz_bound().value() == doctest::Approx(4.0));
  CHECK(diag->strong_convexity().value() == doctest::Approx(2.0));
}

TEST_CASE("quadratic objective rejects non-SPD matrices") {
  Eigen::MatrixXd indefinite = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  CHECK_THROWS_AS(quadratic_objective(indefinite, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
  Eigen::MatrixXd asym(2, 2);
  asym << 1.0, 0.5, -0.5, 1.0;
  CHECK_THROWS_AS(quadratic_objective(asym, Eigen::VectorXd::Zero(2)),
                  std::invalid_argument);
}

TEST_CASE("Lipschitz estimation over a box") {
  SeededRng rng(16);
  SensorParams p = random_sensor_params(rng, 3, 3);
  auto convex = convex_sensor_objective(p);
  CHECK(estimate_lipschitz(*convex, Box::cube(6, -3.0, 3.0), 16) ==
        doctest::Approx(1.1).epsilon(1e-12));

  Eigen::MatrixXd Q = Eigen::Vector2d(2.0, 4.0).asDiagonal();
  auto quad = quadratic_objective(Q, Eigen::VectorXd::Zero(2));
  CHECK(estimate_lipschitz(*quad, Box::cube(2, -1.0, 1.0), 8) ==
        doctest::Approx(4.4).epsilon(1e-12));

  ZeroObjective flat(4);
  CHECK(estimate_lipschitz(flat, Box::cube(4, -2.0, 2.0), 8) == 0.0);

  CHECK_THROWS_AS(estimate_lipschitz(flat, Box::cube(4, -2.0, 2.0), 1),
                  std::invalid_argument);
}

TEST_CASE("ProblemInstance validation and aggregation") {
  SeededRng rng(18);
  ProblemInstance problem;
  problem.num_agents = 3;
  problem.n_c = 2;
  problem.n_d = 2;
  for (int i = 0; i < 3; ++i) {
    problem.objectives.push_back(
        convex_sensor_objective(random_sensor_params(rng, 2, 2)));
  }
  CHECK_NOTHROW(problem.validate());

  MixedVectorXd z(2, 2);
  z.stacked() = rng.normal_vector(4);
  double expected = 0.0;
  Eigen::VectorXd expected_grad = Eigen::VectorXd::Zero(4);
  for (const auto& obj : problem.objectives) {
    expected += obj->value(z.stacked());
    expected_grad += obj->gradient(z.stacked());
  }
  CHECK(problem.total_value(z) == doctest::Approx(expected));
  CHECK((problem.total_gradient(z) - expected_grad).norm() == 0.0);
  CHECK(problem.hessians_at(z).size() == 3);

  ProblemInstance bad = problem;
  bad.objectives.pop_back();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
