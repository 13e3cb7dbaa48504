#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace icnet {

/// Index of a second-derivative pair (a <= b) over inputs (t, x, y[, z]).
inline int pair_slot(int a, int b, int n_inputs) {
  if (a > b) std::swap(a, b);
  // pairs enumerated as (0,0),(0,1),...,(0,n-1),(1,1),...
  return a * n_inputs - a * (a - 1) / 2 + (b - a);
}

inline int n_pairs(int n_inputs) { return n_inputs * (n_inputs + 1) / 2; }

/// Value and partial derivatives up to second order of every field
/// variable at one spacetime point. Input ordering is t first, then the
/// spatial axes, so d1(v, 0) is the time derivative. Mixed derivatives
/// are stored once per unordered pair.
struct PointJet {
  int dim = 0;    // spatial dimension
  int nvars = 0;  // number of field variables
  std::vector<double> data;

  PointJet() = default;
  PointJet(int spatial_dim, int n_vars)
      : dim(spatial_dim), nvars(n_vars),
        data(static_cast<std::size_t>(n_vars) * slots_per_var(spatial_dim), 0.0) {}

  static int slots_per_var(int spatial_dim) {
    const int ni = spatial_dim + 1;
    return 1 + ni + n_pairs(ni);
  }

  int n_inputs() const { return dim + 1; }
  int base(int v) const { return v * slots_per_var(dim); }

  double& value(int v) { return data[base(v)]; }
  double value(int v) const { return data[base(v)]; }

  /// First derivative w.r.t. input axis (0 = t, 1..dim = spatial).
  double& d1(int v, int input) { return data[base(v) + 1 + input]; }
  double d1(int v, int input) const { return data[base(v) + 1 + input]; }

  /// Second derivative w.r.t. inputs a, b (symmetric storage).
  double& d2(int v, int a, int b) {
    return data[base(v) + 1 + n_inputs() + pair_slot(a, b, n_inputs())];
  }
  double d2(int v, int a, int b) const {
    return data[base(v) + 1 + n_inputs() + pair_slot(a, b, n_inputs())];
  }
};

}  // namespace icnet
