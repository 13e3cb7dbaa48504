#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icnet/dataset.hpp"
#include "icnet/pde.hpp"

namespace icnet {

struct EvalReport {
  std::vector<double> per_time;  // normalized squared error per snapshot
  double mean = 0.0;
  double max = 0.0;
};

/// Per-snapshot normalized error: the squared misfit over the variance of
/// the truth, numerators and denominators summed over variables.
EvalReport relative_error(const FieldDataset& truth, const FieldDataset& pred);

/// RMS of (time derivative - right-hand side) over the grid, with the
/// first and last `skip_edges` snapshots excluded so the time differences
/// stay high order.
double equation_residual_rms(const DiscoveredPde& pde, const FieldDataset& ds, int skip_edges = 2);

struct CoefficientMatch {
  std::string var;
  std::string term;
  double expected = 0.0;
  double found = 0.0;
};

struct CoefficientReport {
  std::vector<CoefficientMatch> matched;
  std::vector<CoefficientMatch> missing;   // in the reference only
  std::vector<CoefficientMatch> spurious;  // in the candidate only
  double precision = 0.0;
  double recall = 0.0;
  double max_rel_error = 0.0;  // over matched terms
  bool exact_support = false;
};

CoefficientReport coefficient_report(const DiscoveredPde& found, const DiscoveredPde& reference);

struct BoostSpec {
  LibraryMode mode = LibraryMode::Galilean;
  std::vector<double> velocity;  // boost velocity components (Lorentz: |v| < 1)
};

struct InvarianceReport {
  std::vector<double> term_errors;      // per kept library term
  std::vector<double> combined_errors;  // target plus pinned combination, per equation
  double max_error = 0.0;
};

/// Certify that every kept term and the pinned target combination take
/// the same value on randomly drawn jets before and after the analytic
/// frame change. Works symbolically on the jet, no fields involved.
InvarianceReport certify_invariance(const Library& lib, const BoostSpec& spec, int n_trials = 50,
                                    std::uint64_t seed = 0);

/// Worst-case |value change| of one term under the frame change, over
/// random jets. A genuinely non-invariant term scores well above zero.
double term_invariance_error(const Term& t, const std::vector<FieldVar>& vars, int spatial_dim,
                             const BoostSpec& spec, int n_trials = 50, std::uint64_t seed = 0);

}  // namespace icnet
