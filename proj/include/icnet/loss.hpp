#pragma once

#include <Eigen/Dense>
#include <vector>

#include "icnet/mlp.hpp"
#include "icnet/term.hpp"

namespace icnet {

/// Sparse-regression coefficients of one evolution equation: one pinned
/// coefficient per invariance-guaranteed term and one library coefficient
/// per candidate term, with an active mask over the latter.
struct CoefficientState {
  std::vector<std::vector<double>> lambda;  // per equation, pinned
  std::vector<std::vector<double>> Lambda;  // per equation, library
  std::vector<std::vector<char>> mask;      // per equation, 1 = active
};

/// Names of the variables that receive an evolution equation: velocity
/// components for Galilean libraries, every scalar for Lorentz ones.
std::vector<int> equation_var_indices(const Library& lib);

/// For each equation, the indices into lib.pinned of the pinned terms
/// that belong to it (the ones differentiating that equation's variable).
std::vector<std::vector<int>> pinned_for_equations(const Library& lib);

struct LossParts {
  double data = 0.0;
  double physics = 0.0;
  double l1 = 0.0;
  double total = 0.0;
};

/// Composite training objective: surrogate data misfit plus the
/// invariance-form physics residual plus an L1 penalty on the active
/// library coefficients. Owns the coefficient layout; the flat parameter
/// vector is [network weights; per-equation pinned; per-equation library].
class PdeLoss {
 public:
  PdeLoss(const Library& lib, const TrainingSet& ts, Surrogate* net, double alpha, double beta);

  int n_equations() const { return static_cast<int>(eq_vars_.size()); }
  int n_library() const { return static_cast<int>(lib_.terms.size()); }
  int n_net() const;
  int n_params() const;
  std::int64_t n_points() const { return coords_.rows(); }

  const Library& library() const { return lib_; }
  const std::vector<int>& equation_vars() const { return eq_vars_; }
  const std::vector<std::vector<int>>& equation_pinned() const { return eq_pinned_; }

  void set_alpha(double a) { alpha_ = a; }
  void set_beta(double b) { beta_ = b; }
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }

  void set_mask(const std::vector<std::vector<char>>& mask);
  const std::vector<std::vector<char>>& mask() const { return mask_; }

  /// Flat vector from the surrogate's current weights and the given
  /// coefficients; masked library entries are zeroed.
  Eigen::VectorXd pack(const CoefficientState& c) const;
  CoefficientState unpack(const Eigen::VectorXd& x) const;

  /// Objective and gradient at x, over the whole point set or a batch of
  /// point indices. Masked library coordinates get zero gradient and are
  /// treated as zero. Writes the surrogate's weights as a side effect.
  double value_and_grad(const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                        const std::vector<std::int64_t>* batch = nullptr,
                        LossParts* parts = nullptr);

  /// Candidate features and pinned-adjusted targets at the surrogate
  /// state in x, one regression problem per equation: theta[e] is
  /// n_points x n_library, y[e] = target + sum of lambda_p * pinned_p.
  /// When `pinned` is given it receives the pinned term columns
  /// (n_points x n_pinned per equation).
  void features(const Eigen::VectorXd& x, std::vector<Eigen::MatrixXd>& theta,
                std::vector<Eigen::VectorXd>& y,
                std::vector<Eigen::MatrixXd>* pinned = nullptr);

 private:
  struct CompiledFactor {
    int var = 0;
    int slot = 0;  // within the variable's jet block
    int power = 1;
  };
  using CompiledTerm = std::vector<CompiledFactor>;

  CompiledTerm compile(const Term& t) const;
  void run_chunks(const Eigen::VectorXd& x, const std::vector<std::int64_t>* batch, bool want_grad,
                  Eigen::VectorXd* grad, LossParts* parts,
                  std::vector<Eigen::MatrixXd>* theta_out, std::vector<Eigen::VectorXd>* y_out,
                  std::vector<Eigen::MatrixXd>* pinned_out, double& value);

  Library lib_;
  Surrogate* net_;
  double alpha_, beta_;

  Eigen::MatrixXd coords_;  // n x (dim+1)
  Eigen::MatrixXd values_;  // n x nvars
  int dim_ = 0;

  std::vector<int> eq_vars_;
  std::vector<std::vector<int>> eq_pinned_;
  std::vector<std::vector<char>> mask_;

  JetChannels channels_;
  std::vector<int> slot_to_channel_;  // per jet slot within a var block, -1 if absent
  std::vector<CompiledTerm> c_terms_;
  std::vector<CompiledTerm> c_pinned_;
  int target_slot_ = 0;
};

}  // namespace icnet
