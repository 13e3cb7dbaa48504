#include <cmath>

#include "doctest.h"
#include "icnet/optim.hpp"

using namespace icnet;

namespace {

// classic narrow-valley test function, minimum at (1, 1)
double rosenbrock(const Eigen::VectorXd& x, Eigen::VectorXd& g) {
  const double a = x[0], b = x[1];
  g[0] = -2 * (1 - a) - 400 * a * (b - a * a);
  g[1] = 200 * (b - a * a);
  return (1 - a) * (1 - a) + 100 * (b - a * a) * (b - a * a);
}

}  // namespace

TEST_CASE("adam drives a quadratic to its minimum") {
  Eigen::VectorXd x(3);
  x << 4.0, -2.0, 1.5;
  const Eigen::VectorXd target = Eigen::VectorXd::Constant(3, 0.5);
  AdamConfig cfg;
  cfg.lr = 0.05;
  AdamState adam(cfg);
  for (int i = 0; i < 2000; ++i) {
    const Eigen::VectorXd g = 2.0 * (x - target);
    adam.step(x, g);
  }
  CHECK((x - target).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("adam moments reset when the parameter size changes") {
  AdamState adam;
  Eigen::VectorXd x = Eigen::VectorXd::Ones(4);
  adam.step(x, Eigen::VectorXd::Ones(4));
  Eigen::VectorXd y = Eigen::VectorXd::Ones(2);
  adam.step(y, Eigen::VectorXd::Ones(2));  // must not crash or mix moments
  CHECK(adam.m.size() == 2);
}

TEST_CASE("lbfgs solves rosenbrock from the standard start") {
  Eigen::VectorXd x(2);
  x << -1.2, 1.0;
  LbfgsConfig cfg;
  cfg.max_iters = 200;
  const LbfgsResult r = lbfgs_minimize(rosenbrock, x, cfg);
  CHECK(r.status == LbfgsStatus::Converged);
  CHECK(std::abs(x[0] - 1.0) < 1e-5);
  CHECK(std::abs(x[1] - 1.0) < 1e-5);
  CHECK(r.f < 1e-10);
  CHECK(r.evals >= r.iters);
}

TEST_CASE("lbfgs on a quadratic converges in a handful of iterations") {
  Eigen::MatrixXd A(3, 3);
  A << 4, 1, 0, 1, 3, 0, 0, 0, 10;
  const Eigen::VectorXd b = Eigen::Vector3d(1, -2, 3);
  const auto fg = [&](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g = A * x - b;
    return 0.5 * x.dot(A * x) - b.dot(x);
  };
  Eigen::VectorXd x = Eigen::VectorXd::Zero(3);
  const LbfgsResult r = lbfgs_minimize(fg, x, {});
  CHECK(r.status == LbfgsStatus::Converged);
  CHECK((A * x - b).norm() < 1e-7);
  CHECK(r.iters < 30);
}

TEST_CASE("lbfgs respects the iteration budget") {
  LbfgsConfig cfg;
  cfg.max_iters = 3;
  cfg.tol_g = 0.0;
  cfg.tol_f = 0.0;
  Eigen::VectorXd x(2);
  x << -1.2, 1.0;
  const LbfgsResult r = lbfgs_minimize(rosenbrock, x, cfg);
  CHECK(r.status == LbfgsStatus::MaxIters);
  CHECK(r.iters == 3);
}

TEST_CASE("lbfgs line-search failure keeps the best point seen") {
  // |x| has no descent step from the kink under exact gradients
  const auto fg = [](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g[0] = x[0] >= 0 ? 1.0 : -1.0;
    return std::abs(x[0]);
  };
  Eigen::VectorXd x(1);
  x << 1.0;
  const LbfgsResult r = lbfgs_minimize(fg, x, {});
  CHECK(std::abs(x[0]) <= 1.0);  // never worse than the start
  CHECK((r.status == LbfgsStatus::LineSearchFailed || r.status == LbfgsStatus::Converged));
}
