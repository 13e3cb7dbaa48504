#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "icnet/dataset.hpp"
#include "icnet/jet.hpp"

namespace icnet {

struct MlpSpec {
  int n_inputs = 3;   // t plus spatial axes
  int n_outputs = 1;  // field variables
  std::vector<int> hidden = {40, 40, 40, 40};
  std::uint64_t seed = 0;
};

/// Which derivative channels to propagate through the network. Training
/// only needs the channels the physics loss touches; evaluation uses the
/// full set.
struct JetChannels {
  std::vector<int> firsts;                  // input axes (0 = t)
  std::vector<std::pair<int, int>> pairs;   // unordered, a <= b

  static JetChannels full(int n_inputs);
  int count() const { return 1 + static_cast<int>(firsts.size() + pairs.size()); }
};

/// Per-chunk forward state kept for the backward pass: post-activation
/// values plus the pre-activation derivative channels of every hidden
/// layer, and the network outputs per channel (normalized units).
struct ChunkWork {
  std::vector<Eigen::MatrixXd> input;                // one per channel
  std::vector<Eigen::MatrixXd> act;                  // hidden activations
  std::vector<std::vector<Eigen::MatrixXd>> dz;      // per layer, per first
  std::vector<std::vector<Eigen::MatrixXd>> d2z;     // per layer, per pair
  std::vector<Eigen::MatrixXd> out;                  // one per channel
};

/// Fully connected tanh network with exact forward propagation of first
/// and second input derivatives, and exact parameter gradients of
/// functionals of those derivatives. Inputs are affinely normalized to
/// [-1, 1] per axis; outputs carry an optional per-variable affine.
class Surrogate {
 public:
  explicit Surrogate(const MlpSpec& spec);

  const MlpSpec& spec() const { return spec_; }
  int n_params() const { return n_params_; }

  Eigen::VectorXd get_params() const { return params_; }
  void set_params(const Eigen::VectorXd& p);

  void set_input_box(const std::vector<double>& mins, const std::vector<double>& maxs);
  void set_output_affine(const std::vector<double>& means, const std::vector<double>& stds);

  /// Input box from the coordinate extents of a training set, output
  /// affine from the per-variable mean and standard deviation.
  void calibrate(const TrainingSet& ts);

  const std::vector<double>& input_scale() const { return in_scale_; }
  const std::vector<double>& input_shift() const { return in_shift_; }
  const std::vector<double>& output_means() const { return out_mean_; }
  const std::vector<double>& output_stds() const { return out_std_; }

  /// Map physical coordinates (n x n_inputs, t first) to the normalized
  /// cube, transposed to column-per-point layout.
  Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& coords) const;

  /// Forward pass on one chunk of normalized inputs (n_inputs x n).
  void forward(const Eigen::MatrixXd& xn, const JetChannels& ch, ChunkWork& w) const;

  /// Accumulate parameter gradients given adjoints of the outputs of
  /// `forward` (same channel order and shapes as w.out). `grad` must be
  /// sized n_params().
  void backward(const JetChannels& ch, const ChunkWork& w,
                const std::vector<Eigen::MatrixXd>& out_adj, Eigen::VectorXd& grad) const;

  /// Full jets in physical units at the given physical coordinates.
  std::vector<PointJet> jets(const Eigen::MatrixXd& coords) const;

  /// Values only (n x n_outputs), physical units.
  Eigen::MatrixXd values(const Eigen::MatrixXd& coords) const;

 private:
  void init_params();
  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;

  MlpSpec spec_;
  std::vector<int> widths_;     // layer widths incl. input and output
  std::vector<int> w_offset_, b_offset_;
  int n_params_ = 0;
  Eigen::VectorXd params_;

  std::vector<double> in_shift_, in_scale_;  // xn = (x - shift) * scale
  std::vector<double> out_mean_, out_std_;

  friend class SurrogateTestAccess;
};

}  // namespace icnet
