#include "icnet/stridge.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace icnet {

namespace {

Eigen::VectorXd column_norms(const Eigen::MatrixXd& a) {
  Eigen::VectorXd n = a.colwise().norm();
  for (long j = 0; j < n.size(); ++j)
    if (n[j] == 0.0) n[j] = 1.0;
  return n;
}

/// Ridge solve on normalized columns; returns the normalized-basis
/// coefficients (divide by norms to get raw ones).
Eigen::VectorXd ridge_normalized(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                                 double lambda, const Eigen::VectorXd& norms) {
  const Eigen::MatrixXd an = theta * norms.cwiseInverse().asDiagonal();
  if (lambda <= 0.0) return an.completeOrthogonalDecomposition().solve(y);
  Eigen::MatrixXd gram = an.transpose() * an;
  gram.diagonal().array() += lambda;
  return Eigen::LLT<Eigen::MatrixXd>(gram).solve(an.transpose() * y);
}

Eigen::VectorXd lsq_refit(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                          bool* rank_deficient) {
  auto cod = theta.completeOrthogonalDecomposition();
  // structurally degenerate libraries are collinear up to roundoff (~1e-13);
  // the default threshold misses that and blows up along null directions
  cod.setThreshold(1e-10);
  if (rank_deficient) *rank_deficient = cod.rank() < theta.cols();
  return cod.solve(y);
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& a, const std::vector<int>& cols) {
  Eigen::MatrixXd out(a.rows(), static_cast<long>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<long>(j)) = a.col(cols[j]);
  return out;
}

}  // namespace

Eigen::VectorXd ridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda) {
  if (theta.rows() != y.size()) throw std::invalid_argument("ridge: row count mismatch");
  const Eigen::VectorXd norms = column_norms(theta);
  return ridge_normalized(theta, y, lambda, norms).cwiseQuotient(norms);
}

SparseSolution stridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                       double tol, int max_iter, const std::vector<char>* protected_cols) {
  if (theta.rows() != y.size()) throw std::invalid_argument("stridge: row count mismatch");
  const long m = theta.cols();
  if (protected_cols && static_cast<long>(protected_cols->size()) != m)
    throw std::invalid_argument("stridge: protected mask size mismatch");

  std::vector<int> active(m);
  for (long j = 0; j < m; ++j) active[j] = static_cast<int>(j);

  // thresholds act on unit-RMS scaled coefficients so the same tolerance
  // means the same thing regardless of the row count
  const double rms = 1.0 / std::sqrt(static_cast<double>(theta.rows()));
  for (int it = 0; it < max_iter && !active.empty(); ++it) {
    const Eigen::MatrixXd sub = take_columns(theta, active);
    const Eigen::VectorXd norms = column_norms(sub);
    const Eigen::VectorXd wn = ridge_normalized(sub, y, lambda, norms);
    std::vector<int> keep;
    for (std::size_t j = 0; j < active.size(); ++j) {
      const bool prot = protected_cols && (*protected_cols)[active[j]];
      if (prot || std::abs(wn[static_cast<long>(j)]) * rms >= tol) keep.push_back(active[j]);
    }
    if (keep.size() == active.size()) {
      // ridge fixed point: the reported model is the unregularized refit,
      // so its coefficients must clear the threshold too. Collinear
      // columns can carry a large ridge share yet a negligible refit one.
      const Eigen::VectorXd w = lsq_refit(sub, y, nullptr);
      keep.clear();
      for (std::size_t j = 0; j < active.size(); ++j) {
        const bool prot = protected_cols && (*protected_cols)[active[j]];
        if (prot || std::abs(w[static_cast<long>(j)]) * norms[static_cast<long>(j)] * rms >= tol)
          keep.push_back(active[j]);
      }
      if (keep.size() == active.size()) break;
    }
    active = std::move(keep);
  }

  SparseSolution sol;
  sol.coefficients = Eigen::VectorXd::Zero(m);
  sol.support = active;
  sol.tol_used = tol;
  if (!active.empty()) {
    const Eigen::MatrixXd sub = take_columns(theta, active);
    const Eigen::VectorXd w = lsq_refit(sub, y, &sol.rank_deficient);
    for (std::size_t j = 0; j < active.size(); ++j) sol.coefficients[active[j]] = w[static_cast<long>(j)];
  }
  return sol;
}

SparseSolution train_stridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                             const TrainStridgeConfig& cfg) {
  const long n = theta.rows();
  const long m = theta.cols();
  if (n != y.size()) throw std::invalid_argument("train_stridge: row count mismatch");
  if (n < 5) throw std::invalid_argument("train_stridge: need at least 5 rows");
  const double lambda = cfg.lambda < 0 ? 1e-5 * static_cast<double>(n) : cfg.lambda;
  const std::vector<char>* prot = cfg.protected_cols.empty() ? nullptr : &cfg.protected_cols;

  // deterministic 80/20 split: every fifth row validates
  std::vector<int> tr, va;
  for (long i = 0; i < n; ++i) (i % 5 == 4 ? va : tr).push_back(static_cast<int>(i));
  Eigen::MatrixXd theta_tr(tr.size(), m), theta_va(va.size(), m);
  Eigen::VectorXd y_tr(tr.size()), y_va(va.size());
  for (std::size_t i = 0; i < tr.size(); ++i) {
    theta_tr.row(static_cast<long>(i)) = theta.row(tr[i]);
    y_tr[static_cast<long>(i)] = y[tr[i]];
  }
  for (std::size_t i = 0; i < va.size(); ++i) {
    theta_va.row(static_cast<long>(i)) = theta.row(va[i]);
    y_va[static_cast<long>(i)] = y[va[i]];
  }

  const Eigen::VectorXd norms_tr = column_norms(theta_tr);
  const double cmax = ridge_normalized(theta_tr, y_tr, lambda, norms_tr).cwiseAbs().maxCoeff() /
                      std::sqrt(static_cast<double>(theta_tr.rows()));
  if (!(cmax > 0) || !std::isfinite(cmax)) {
    SparseSolution empty;
    empty.coefficients = Eigen::VectorXd::Zero(m);
    return empty;
  }

  std::ofstream trace;
  if (!cfg.trace_csv.empty()) {
    trace.open(cfg.trace_csv);
    trace << "tol,nnz,val_sse,score\n";
  }

  // sparsity weight on the scale of the validation energy, so eta is a
  // relative complexity cost independent of the problem's units
  const double energy = std::max(y_va.squaredNorm(), 1e-300);

  const auto evaluate = [&](double tol, SparseSolution& out) {
    out = stridge(theta_tr, y_tr, lambda, tol, cfg.max_iter, prot);
    const double sse = (theta_va * out.coefficients - y_va).squaredNorm() / energy;
    out.score = sse + cfg.eta * static_cast<double>(out.support.size());
    out.tol_used = tol;
    if (trace.is_open())
      trace << tol << ',' << out.support.size() << ',' << sse << ',' << out.score << "\n";
  };

  double best_tol = 0.0;
  double best_score = std::numeric_limits<double>::infinity();
  std::vector<int> best_support;
  const int ng = std::max(2, cfg.n_grid);
  const double lo = 1e-4 * cmax;
  const auto grid_point = [&](double a, double b, int k, int kn) {
    return a * std::pow(b / a, static_cast<double>(k) / (kn - 1));
  };
  SparseSolution cand;
  for (int k = 0; k < ng; ++k) {
    const double tol = grid_point(lo, cmax, k, ng);
    evaluate(tol, cand);
    if (cand.score < best_score || (cand.score == best_score && tol < best_tol)) {
      best_score = cand.score;
      best_tol = tol;
      best_support = cand.support;
    }
  }
  // refine one level around the incumbent
  const double ratio = std::pow(cmax / lo, 1.0 / (ng - 1));
  for (int k = 0; k < ng; ++k) {
    const double tol = grid_point(best_tol / ratio, best_tol * ratio, k, ng);
    if (tol <= 0) continue;
    evaluate(tol, cand);
    if (cand.score < best_score || (cand.score == best_score && tol < best_tol)) {
      best_score = cand.score;
      best_tol = tol;
      best_support = cand.support;
    }
  }

  // the winner is the selected support refit on all rows, so the model
  // reported is exactly the one that was scored
  SparseSolution sol;
  sol.coefficients = Eigen::VectorXd::Zero(m);
  sol.support = best_support;
  sol.score = best_score;
  sol.tol_used = best_tol;
  if (!best_support.empty()) {
    const Eigen::MatrixXd sub = take_columns(theta, best_support);
    const Eigen::VectorXd w = lsq_refit(sub, y, &sol.rank_deficient);
    for (std::size_t j = 0; j < best_support.size(); ++j) sol.coefficients[best_support[j]] = w[static_cast<long>(j)];
  }
  return sol;
}

}  // namespace icnet
