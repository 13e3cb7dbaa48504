#pragma once

#include <string>
#include <vector>

#include "icnet/jet.hpp"

namespace icnet {

enum class VarKind { Velocity, Pressure, Scalar };

struct FieldVar {
  int id = 0;
  std::string name;
  VarKind kind = VarKind::Scalar;
};

/// Per-axis spatial derivative orders (time excluded).
struct DerivIndex {
  std::vector<int> orders;

  DerivIndex() = default;
  explicit DerivIndex(std::vector<int> o) : orders(std::move(o)) {}
  static DerivIndex none(int dim) { return DerivIndex(std::vector<int>(dim, 0)); }

  int total() const;
  bool operator==(const DerivIndex& o) const { return orders == o.orders; }
  bool operator<(const DerivIndex& o) const { return orders < o.orders; }
};

struct Factor {
  int var_id = 0;
  DerivIndex deriv;
  int power = 1;

  bool operator==(const Factor& o) const {
    return var_id == o.var_id && deriv == o.deriv && power == o.power;
  }
};

/// Canonical monomial of field variables and their spatial derivatives.
/// The empty factor list is the constant term 1.
struct Term {
  std::vector<Factor> factors;

  int degree() const;       // sum of powers
  int deriv_order() const;  // max total derivative order over factors
  bool operator==(const Term& o) const { return factors == o.factors; }
  bool operator<(const Term& o) const;
};

Term canonicalize(const Term& t);

enum class LibraryMode { Galilean, Lorentz, Overcomplete };
enum class TargetKind { FirstTimeDerivative, SecondTimeDerivative };

struct Library {
  std::vector<Term> terms;   // unpinned candidates (columns of Theta)
  std::vector<Term> pinned;  // invariance-guaranteed terms, exempt from L1/thresholding
  LibraryMode mode = LibraryMode::Overcomplete;
  TargetKind target = TargetKind::FirstTimeDerivative;
  std::vector<FieldVar> vars;
};

/// All products of an underived monomial of degree <= max_degree in the
/// field variables with at most one derivative factor of order <=
/// max_deriv_order and power 1 (PDE-FIND style construction). Includes
/// the pure monomials and the constant. Deterministic ordering.
std::vector<Term> enumerate_candidates(const std::vector<FieldVar>& vars, int spatial_dim,
                                       int max_degree, int max_deriv_order);

Library galilean_filter(const std::vector<Term>& candidates, const std::vector<FieldVar>& vars,
                        bool include_pressure_gradient = true);

Library lorentz_filter(const std::vector<Term>& candidates, const std::vector<FieldVar>& vars);

Library overcomplete_library(const std::vector<FieldVar>& vars, int spatial_dim, int max_degree,
                             int max_deriv_order);

double evaluate_term(const Term& term, const PointJet& jet);

std::string term_to_string(const Term& term, const std::vector<FieldVar>& vars);
Term string_to_term(const std::string& s, const std::vector<FieldVar>& vars, int spatial_dim);

std::string library_to_json(const Library& lib);
Library library_from_json(const std::string& json_text);

/// Convenience: make velocity/pressure/scalar variable sets.
std::vector<FieldVar> make_velocity_vars(int d, bool with_pressure = false);
std::vector<FieldVar> make_scalar_vars(const std::vector<std::string>& names);

}  // namespace icnet
