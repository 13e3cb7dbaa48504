#include "icnet/optim.hpp"

#include <cmath>
#include <deque>

namespace icnet {

void AdamState::step(Eigen::VectorXd& x, const Eigen::VectorXd& g) {
  if (m.size() != x.size()) {
    m = Eigen::VectorXd::Zero(x.size());
    v = Eigen::VectorXd::Zero(x.size());
    t = 0;
  }
  ++t;
  m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
  v = cfg.beta2 * v + (1.0 - cfg.beta2) * g.cwiseProduct(g);
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  x.array() -= cfg.lr * (m.array() / bc1) / ((v.array() / bc2).sqrt() + cfg.eps);
}

LbfgsResult lbfgs_minimize(const ValueGrad& fg, Eigen::VectorXd& x, const LbfgsConfig& cfg) {
  LbfgsResult res;
  const long n = x.size();
  Eigen::VectorXd g(n), g_new(n), x_new(n);
  double f = fg(x, g);
  ++res.evals;

  Eigen::VectorXd x_best = x;
  double f_best = f;

  std::deque<Eigen::VectorXd> s_hist, y_hist;
  std::deque<double> rho_hist;
  std::deque<double> f_window{f};
  int skipped = 0;

  for (int it = 0; it < cfg.max_iters; ++it) {
    res.iters = it;
    if (g.lpNorm<Eigen::Infinity>() < cfg.tol_g) {
      res.status = LbfgsStatus::Converged;
      break;
    }

    // two-loop recursion
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int i = static_cast<int>(s_hist.size()) - 1; i >= 0; --i) {
      alpha[i] = rho_hist[i] * s_hist[i].dot(q);
      q -= alpha[i] * y_hist[i];
    }
    if (!s_hist.empty()) {
      const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
      q *= gamma;
    }
    for (std::size_t i = 0; i < s_hist.size(); ++i) {
      const double beta = rho_hist[i] * y_hist[i].dot(q);
      q += (alpha[i] - beta) * s_hist[i];
    }
    Eigen::VectorXd d = -q;
    double dg = d.dot(g);
    if (dg >= 0) {  // not a descent direction; fall back to steepest descent
      d = -g;
      dg = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    // weak-Wolfe bracketing: bisect on an Armijo violation, expand or
    // bisect on a curvature violation; an accepted step has s.y > 0
    double step = 1.0, lo = 0.0, hi = 0.0;
    bool accepted = false;
    double f_new = f;
    double f_armijo = 0.0, step_armijo = 0.0;  // best Armijo-only fallback
    bool have_armijo = false;
    for (int ls = 0; ls < cfg.max_linesearch; ++ls) {
      x_new = x + step * d;
      f_new = fg(x_new, g_new);
      ++res.evals;
      if (!std::isfinite(f_new) || f_new > f + cfg.armijo_c * step * dg) {
        hi = step;
        step = 0.5 * (lo + hi);
        continue;
      }
      if (!have_armijo || f_new < f_armijo) {
        have_armijo = true;
        f_armijo = f_new;
        step_armijo = step;
      }
      if (g_new.dot(d) < cfg.wolfe_c * dg) {
        lo = step;
        step = hi > 0.0 ? 0.5 * (lo + hi) : 2.0 * step;
        continue;
      }
      accepted = true;
      break;
    }
    if (!accepted && have_armijo) {  // sufficient decrease without curvature
      x_new = x + step_armijo * d;
      f_new = fg(x_new, g_new);
      ++res.evals;
      accepted = true;
    }
    if (!accepted) {
      res.status = LbfgsStatus::LineSearchFailed;
      break;
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd yv = g_new - g;
    const double sy = s.dot(yv);
    if (sy > 1e-12 * s.norm() * yv.norm()) {
      skipped = 0;
      s_hist.push_back(s);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > cfg.memory) {
        s_hist.pop_front();
        y_hist.pop_front();
        rho_hist.pop_front();
      }
    } else if (++skipped >= 3) {  // stale pairs poison the direction
      skipped = 0;
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }

    x = x_new;
    g = g_new;
    f = f_new;
    if (f < f_best) {
      f_best = f;
      x_best = x;
    }

    f_window.push_back(f);
    if (f_window.size() > 6) f_window.pop_front();
    if (f_window.size() == 6) {
      const double drop = f_window.front() - f_window.back();
      const double scale = std::max({std::abs(f_window.front()), std::abs(f), 1e-30});
      if (drop >= 0 && drop < cfg.tol_f * scale) {
        res.status = LbfgsStatus::Converged;
        res.iters = it + 1;
        break;
      }
    }
  }

  if (f_best < f) {
    x = x_best;
    f = f_best;
  }
  res.f = f;
  if (res.status == LbfgsStatus::MaxIters && res.iters >= cfg.max_iters - 1) res.iters = cfg.max_iters;
  return res;
}

}  // namespace icnet
