#pragma once

#include <string>
#include <utility>
#include <vector>

#include "icnet/term.hpp"

namespace icnet {

/// One discovered evolution equation: target_t (or target_tt) = sum of
/// coefficient * term. Pinned terms appear here with their learned
/// coefficients like any other right-hand-side entry.
struct PdeEquation {
  std::string target_var;
  std::vector<std::pair<Term, double>> rhs;
};

struct DiscoveredPde {
  std::vector<FieldVar> vars;
  int spatial_dim = 2;
  TargetKind target = TargetKind::FirstTimeDerivative;
  std::vector<PdeEquation> equations;
  std::string provenance;  // JSON: config hash, seeds, schedule, final losses

  const PdeEquation* equation_for(const std::string& var) const;
};

std::string pde_to_json(const DiscoveredPde& pde);
DiscoveredPde pde_from_json(const std::string& json_text);

/// Human-readable rendering, e.g. "u_t = -1.00*u*u_x + 0.10*u_xx".
std::string pde_to_text(const DiscoveredPde& pde);

}  // namespace icnet
