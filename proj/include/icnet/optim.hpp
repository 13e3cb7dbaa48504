#pragma once

#include <Eigen/Dense>
#include <functional>

namespace icnet {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction. Moments persist across calls so the
/// schedule can interleave pruning without losing optimizer state.
struct AdamState {
  AdamConfig cfg;
  Eigen::VectorXd m, v;
  long t = 0;

  explicit AdamState(const AdamConfig& c = {}) : cfg(c) {}
  void step(Eigen::VectorXd& x, const Eigen::VectorXd& g);
};

struct LbfgsConfig {
  int memory = 10;
  int max_iters = 500;
  double tol_g = 1e-9;       // infinity norm of the gradient
  double tol_f = 1e-12;      // relative decrease over a short window
  double armijo_c = 1e-4;
  double wolfe_c = 0.9;  // curvature condition of the line search
  int max_linesearch = 40;
};

enum class LbfgsStatus { Converged, MaxIters, LineSearchFailed };

struct LbfgsResult {
  LbfgsStatus status = LbfgsStatus::MaxIters;
  double f = 0.0;
  int iters = 0;
  int evals = 0;
};

using ValueGrad = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Limited-memory BFGS with two-loop recursion and a weak-Wolfe
/// bracketing line search. On line-search failure x holds the best point
/// seen.
LbfgsResult lbfgs_minimize(const ValueGrad& fg, Eigen::VectorXd& x, const LbfgsConfig& cfg = {});

}  // namespace icnet
