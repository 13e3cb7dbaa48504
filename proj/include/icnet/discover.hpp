#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "icnet/loss.hpp"
#include "icnet/pde.hpp"
#include "icnet/stridge.hpp"

namespace icnet {

enum class StageOpt { Adam, Lbfgs };

struct StageSpec {
  StageOpt opt = StageOpt::Lbfgs;
  int iters = 300;
  double beta = 1e-7;   // L1 weight while this stage runs
  int batch = 2048;     // Adam minibatch size; Lbfgs is always full batch
  double alpha = -1.0;  // physics weight for this stage; < 0 = the run's alpha
};

struct DiscoveryConfig {
  double alpha = 1.0;
  std::vector<StageSpec> stages;  // empty = default schedule
  bool prune = true;
  int stable_needed = 2;     // consecutive unchanged-support prunes to stop
  int max_extra_rounds = 6;  // repeats of the last stage while unstable
  double eta = 1e-4;
  double ridge_lambda = -1.0;
  std::uint64_t seed = 0;
  std::string trace_csv;
  bool verbose = false;
};

std::vector<StageSpec> default_schedule();

struct PruneRecord {
  int round = 0;
  LossParts loss;
  std::vector<int> support_sizes;  // per equation
  bool changed = false;
};

struct DiscoveryRun {
  DiscoveredPde pde;
  CoefficientState coefficients;
  std::vector<PruneRecord> history;
  LossParts final_loss;
  bool support_stable = false;
};

/// Alternating training and pruning: optimize the composite loss through
/// the staged schedule, and after each stage regress the candidate
/// features against the pinned-adjusted target and intersect the active
/// support with the regression's (shrink-only). The surrogate is trained
/// in place.
DiscoveryRun discover(const Library& lib, const TrainingSet& ts, Surrogate* net,
                      const DiscoveryConfig& cfg = {});

enum class BaselineDerivs { Spectral, Polynomial };

struct BaselineConfig {
  int n_snapshots = 0;      // 0 = all
  int snapshot_range = 0;   // restrict to the first `range` steps; 0 = all
  std::uint64_t seed = 0;
  double eta = 1e-4;
  double ridge_lambda = -1.0;
  BaselineDerivs derivs = BaselineDerivs::Spectral;
  int poly_halfwidth = 4;   // polynomial-fit stencil half width
  int poly_degree = 5;
};

/// Classical pipeline: numerical derivatives on the full grid, one
/// sparse regression per equation with the pinned columns protected from
/// thresholding. No surrogate involved.
DiscoveryRun discover_baseline(const Library& lib, const FieldDataset& ds,
                               const BaselineConfig& cfg = {});

/// Reported right-hand side from coefficients: pinned terms enter with
/// the negated pinned coefficient, library terms with theirs.
DiscoveredPde assemble_pde(const Library& lib, const std::vector<int>& eq_vars,
                           const std::vector<std::vector<int>>& eq_pinned,
                           const CoefficientState& cs, const std::string& provenance);

void save_checkpoint(const std::string& dir, const Surrogate& net, const CoefficientState& cs);
/// Restores coefficients; the surrogate must already have the right spec.
CoefficientState load_checkpoint(const std::string& dir, Surrogate* net);

}  // namespace icnet
