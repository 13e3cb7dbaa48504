#pragma once

#include <vector>

#include "icnet/dataset.hpp"
#include "icnet/jet.hpp"
#include "icnet/pde.hpp"

namespace icnet {

enum class PdeKind { Burgers2D, KleinGordon, CoupledKleinGordon, TaylorGreenNS };

struct SolverConfig {
  PdeKind pde = PdeKind::Burgers2D;
  int nx = 256, ny = 256;
  double xmin = -3.14159265358979323846, xmax = 3.14159265358979323846;
  double ymin = -3.14159265358979323846, ymax = 3.14159265358979323846;
  double dt_output = 0.01;
  double t_end = 4.0;
  int substeps = 0;  // 0 = choose so the internal RK4 step is <= 0.002

  // Burgers
  double nu = 0.1;
  double ic_a1 = 0.0, ic_b1 = 8.0, ic_c1 = 4.0, ic_d1 = 1.0;

  // single Klein-Gordon: phi_tt = a1 phi + b1 phi^3 + d1 lap phi
  double kg_a1 = 1.0, kg_b1 = -1.0, kg_d1 = 0.1;
  double ic_a2 = 4.0, ic_b2 = 10.0, ic_x0 = 0.0, ic_y0 = 0.0;

  // coupled Klein-Gordon
  double kg_a2 = 1.0, kg_b2 = -1.0, kg_c2 = 0.1;
  double ic_a3 = 4.0, ic_b3 = 3.0, ic_x0c = 0.4, ic_y0c = 0.4;

  // Taylor-Green Navier-Stokes
  double re = 5.0;
  double drift_u = 0.0, drift_v = 0.0;  // optional uniform background velocity
};

struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

FieldDataset solve_burgers2d(const SolverConfig& cfg);
FieldDataset solve_klein_gordon(const SolverConfig& cfg);
FieldDataset solve_coupled_kg(const SolverConfig& cfg);
FieldDataset taylor_green_ns(const SolverConfig& cfg);
FieldDataset generate(const SolverConfig& cfg);

struct SimulateConfig {
  double t_end = 1.0;
  double dt_output = 0.01;
  int substeps = 0;
};

/// Integrate a discovered PDE from the dataset slice at time index `it0`,
/// with spatial derivatives taken spectrally. Every dataset variable must
/// have an equation. For second-order targets the initial time derivative
/// is estimated by one-sided differences from neighbouring slices when
/// available, otherwise taken as zero.
FieldDataset simulate_discovered(const DiscoveredPde& pde, const FieldDataset& ic, int it0,
                                 const SimulateConfig& cfg);

/// Jets on the full spatial grid of snapshot `it`: values plus spectral
/// spatial derivatives up to second order. Time-derivative slots are
/// filled by central finite differences in t (4th order in the interior)
/// up to `time_order` (0, 1 or 2).
std::vector<PointJet> grid_jets(const FieldDataset& ds, int it, int time_order);

}  // namespace icnet
