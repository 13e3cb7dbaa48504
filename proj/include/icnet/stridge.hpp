#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace icnet {

struct SparseSolution {
  Eigen::VectorXd coefficients;  // full length, zeros off-support
  std::vector<int> support;      // ascending column indices
  double tol_used = 0.0;
  double score = 0.0;  // relative validation SSE + eta * nnz (train_stridge only)
  bool rank_deficient = false;   // least-squares refit hit a rank drop
};

/// Ridge regression with internal unit 2-norm column normalization.
/// lambda == 0 falls back to a min-norm least-squares solve.
Eigen::VectorXd ridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda);

/// Sequentially thresholded ridge: alternate a ridge solve on the active
/// columns with dropping the columns whose normalized coefficient
/// magnitude falls below tol; at the ridge fixed point the unregularized
/// refit coefficients must clear the threshold as well. Protected columns
/// are never dropped. Ends with a least-squares refit on the support.
SparseSolution stridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                       double tol, int max_iter = 50,
                       const std::vector<char>* protected_cols = nullptr);

struct TrainStridgeConfig {
  double lambda = -1.0;  // < 0 selects 1e-5 * n_rows
  double eta = 1e-4;     // sparsity weight in the model-selection score
  int n_grid = 20;       // geometric tolerance grid resolution
  int max_iter = 50;
  std::vector<char> protected_cols;  // empty = none
  std::string trace_csv;             // when set, write the tol/score trace here
};

/// Model selection over the threshold: deterministic 80/20 split, a
/// geometric tolerance grid spanning four decades below the largest
/// normalized ridge coefficient, score = validation SSE (normalized by
/// the validation energy) + eta * nnz, one refinement pass around the
/// incumbent, then a refit of the winning tolerance on all rows.
SparseSolution train_stridge(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y,
                             const TrainStridgeConfig& cfg = {});

}  // namespace icnet
