#include "icnet/term.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace icnet {

int DerivIndex::total() const {
  int s = 0;
  for (int o : orders) s += o;
  return s;
}

int Term::degree() const {
  int s = 0;
  for (const auto& f : factors) s += f.power;
  return s;
}

int Term::deriv_order() const {
  int m = 0;
  for (const auto& f : factors) m = std::max(m, f.deriv.total());
  return m;
}

bool Term::operator<(const Term& o) const {
  if (degree() != o.degree()) return degree() < o.degree();
  if (deriv_order() != o.deriv_order()) return deriv_order() < o.deriv_order();
  auto key = [](const Factor& f) { return std::make_tuple(f.var_id, f.deriv.orders, f.power); };
  return std::lexicographical_compare(
      factors.begin(), factors.end(), o.factors.begin(), o.factors.end(),
      [&](const Factor& a, const Factor& b) { return key(a) < key(b); });
}

Term canonicalize(const Term& t) {
  std::map<std::pair<int, std::vector<int>>, int> merged;
  for (const auto& f : t.factors) {
    if (f.power < 1) throw std::invalid_argument("factor power must be >= 1");
    merged[{f.var_id, f.deriv.orders}] += f.power;
  }
  Term out;
  for (const auto& [key, power] : merged)
    out.factors.push_back({key.first, DerivIndex(key.second), power});
  return out;
}

static const char kAxisNames[3] = {'x', 'y', 'z'};

std::vector<Term> enumerate_candidates(const std::vector<FieldVar>& vars, int spatial_dim,
                                       int max_degree, int max_deriv_order) {
  if (spatial_dim < 1 || spatial_dim > 3) throw std::invalid_argument("spatial_dim must be 1..3");
  if (vars.empty()) throw std::invalid_argument("need at least one field variable");
  if (max_degree < 1 || max_deriv_order < 1)
    throw std::invalid_argument("max_degree and max_deriv_order must be >= 1");

  const int nv = static_cast<int>(vars.size());

  // underived monomials as per-variable power vectors, degree 0..max_degree
  std::vector<std::vector<int>> monomials;
  std::vector<int> powers(nv, 0);
  const auto rec = [&](auto&& self, int var, int remaining) -> void {
    if (var == nv) {
      monomials.push_back(powers);
      return;
    }
    for (int p = 0; p <= remaining; ++p) {
      powers[var] = p;
      self(self, var + 1, remaining - p);
    }
    powers[var] = 0;
  };
  rec(rec, 0, max_degree);

  // derivative indices with 1 <= total order <= max_deriv_order
  std::vector<DerivIndex> derivs;
  std::vector<int> orders(spatial_dim, 0);
  const auto drec = [&](auto&& self, int axis, int remaining) -> void {
    if (axis == spatial_dim) {
      DerivIndex d{orders};
      if (d.total() >= 1) derivs.push_back(d);
      return;
    }
    for (int o = 0; o <= remaining; ++o) {
      orders[axis] = o;
      self(self, axis + 1, remaining - o);
    }
    orders[axis] = 0;
  };
  drec(drec, 0, max_deriv_order);

  const auto monomial_term = [&](const std::vector<int>& pw) {
    Term t;
    for (int v = 0; v < nv; ++v)
      if (pw[v] > 0) t.factors.push_back({vars[v].id, DerivIndex::none(spatial_dim), pw[v]});
    return t;
  };

  std::set<Term> out;
  for (const auto& pw : monomials) {
    out.insert(canonicalize(monomial_term(pw)));
    for (int v = 0; v < nv; ++v)
      for (const auto& d : derivs) {
        Term t = monomial_term(pw);
        t.factors.push_back({vars[v].id, d, 1});
        out.insert(canonicalize(t));
      }
  }
  return {out.begin(), out.end()};
}

static int spatial_dim_of(const std::vector<Term>& candidates) {
  for (const auto& t : candidates)
    for (const auto& f : t.factors)
      if (!f.deriv.orders.empty()) return static_cast<int>(f.deriv.orders.size());
  throw std::invalid_argument("cannot infer spatial dimension from candidates");
}

Library galilean_filter(const std::vector<Term>& candidates, const std::vector<FieldVar>& vars,
                        bool include_pressure_gradient) {
  const int d = spatial_dim_of(candidates);
  std::vector<FieldVar> velocities;
  for (const auto& v : vars)
    if (v.kind == VarKind::Velocity) velocities.push_back(v);
  if (static_cast<int>(velocities.size()) != d)
    throw std::invalid_argument("galilean_filter: need exactly d velocity components");

  Library lib;
  lib.mode = LibraryMode::Galilean;
  lib.target = TargetKind::FirstTimeDerivative;
  lib.vars = vars;

  std::set<Term> kept;
  for (const auto& t : candidates) {
    if (t.factors.empty()) {
      kept.insert(t);  // constant
      continue;
    }
    if (t.factors.size() != 1) continue;
    const Factor& f = t.factors[0];
    if (f.power != 1) continue;
    const FieldVar& var = vars.at(f.var_id);
    const int order = f.deriv.total();
    if (var.kind == VarKind::Velocity && order >= 1) kept.insert(t);
    if (var.kind == VarKind::Pressure && order == 1 && include_pressure_gradient) kept.insert(t);
  }
  lib.terms.assign(kept.begin(), kept.end());

  // convective products u_j * d(u_i)/dx_j, grouped per target equation i
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      std::vector<int> e(d, 0);
      e[j] = 1;
      Term t;
      t.factors = {{velocities[j].id, DerivIndex::none(d), 1}, {velocities[i].id, DerivIndex(e), 1}};
      lib.pinned.push_back(canonicalize(t));
    }
  return lib;
}

Library lorentz_filter(const std::vector<Term>& candidates, const std::vector<FieldVar>& vars) {
  for (const auto& v : vars)
    if (v.kind != VarKind::Scalar)
      throw std::invalid_argument("lorentz_filter: all variables must be scalar fields");
  const int d = spatial_dim_of(candidates);

  Library lib;
  lib.mode = LibraryMode::Lorentz;
  lib.target = TargetKind::SecondTimeDerivative;
  lib.vars = vars;

  std::set<Term> kept;
  for (const auto& t : candidates) {
    bool underived = true;
    int distinct_vars = 0;
    for (const auto& f : t.factors) {
      if (f.deriv.total() != 0) underived = false;
      ++distinct_vars;
    }
    if (!underived) continue;
    // Cross monomials of even total degree are excluded for multi-field
    // problems, matching the published coupled-field libraries.
    if (distinct_vars > 1 && t.degree() % 2 == 0) continue;
    kept.insert(t);
  }
  lib.terms.assign(kept.begin(), kept.end());

  for (const auto& v : vars)
    for (int axis = 0; axis < d; ++axis) {
      std::vector<int> e(d, 0);
      e[axis] = 2;
      Term t;
      t.factors = {{v.id, DerivIndex(e), 1}};
      lib.pinned.push_back(t);
    }
  return lib;
}

Library overcomplete_library(const std::vector<FieldVar>& vars, int spatial_dim, int max_degree,
                             int max_deriv_order) {
  Library lib;
  lib.mode = LibraryMode::Overcomplete;
  lib.target = TargetKind::FirstTimeDerivative;
  lib.vars = vars;
  lib.terms = enumerate_candidates(vars, spatial_dim, max_degree, max_deriv_order);
  return lib;
}

double evaluate_term(const Term& term, const PointJet& jet) {
  double prod = 1.0;
  for (const auto& f : term.factors) {
    if (f.var_id < 0 || f.var_id >= jet.nvars)
      throw std::runtime_error("evaluate_term: jet has no variable with id " +
                               std::to_string(f.var_id));
    const int order = f.deriv.total();
    double v = 0.0;
    if (order == 0) {
      v = jet.value(f.var_id);
    } else if (order == 1) {
      int axis = -1;
      for (int a = 0; a < static_cast<int>(f.deriv.orders.size()); ++a)
        if (f.deriv.orders[a] == 1) axis = a;
      v = jet.d1(f.var_id, 1 + axis);
    } else if (order == 2) {
      int a = -1, b = -1;
      for (int ax = 0; ax < static_cast<int>(f.deriv.orders.size()); ++ax) {
        for (int rep = 0; rep < f.deriv.orders[ax]; ++rep) {
          if (a < 0)
            a = ax;
          else
            b = ax;
        }
      }
      v = jet.d2(f.var_id, 1 + a, 1 + b);
    } else {
      std::ostringstream os;
      os << "evaluate_term: jet does not carry order-" << order << " derivative of variable "
         << f.var_id;
      throw std::runtime_error(os.str());
    }
    double p = v;
    for (int k = 1; k < f.power; ++k) p *= v;
    prod *= p;
  }
  return prod;
}

std::string term_to_string(const Term& term, const std::vector<FieldVar>& vars) {
  if (term.factors.empty()) return "1";
  const auto name_of = [&](int id) -> const std::string& {
    for (const auto& v : vars)
      if (v.id == id) return v.name;
    throw std::runtime_error("term_to_string: unknown variable id " + std::to_string(id));
  };
  std::ostringstream os;
  bool first = true;
  for (const auto& f : term.factors) {
    if (!first) os << '*';
    first = false;
    os << name_of(f.var_id);
    if (f.deriv.total() > 0) {
      os << '_';
      for (int axis = 0; axis < static_cast<int>(f.deriv.orders.size()); ++axis)
        for (int r = 0; r < f.deriv.orders[axis]; ++r) os << kAxisNames[axis];
    }
    if (f.power > 1) os << '^' << f.power;
  }
  return os.str();
}

Term string_to_term(const std::string& s, const std::vector<FieldVar>& vars, int spatial_dim) {
  if (s == "1") return Term{};
  Term t;
  std::istringstream is(s);
  std::string tok;
  while (std::getline(is, tok, '*')) {
    Factor f;
    f.deriv = DerivIndex::none(spatial_dim);
    std::string body = tok;
    if (auto caret = body.find('^'); caret != std::string::npos) {
      f.power = std::stoi(body.substr(caret + 1));
      body = body.substr(0, caret);
    }
    std::string name = body;
    if (auto us = body.find('_'); us != std::string::npos) {
      name = body.substr(0, us);
      for (char c : body.substr(us + 1)) {
        int axis = -1;
        for (int a = 0; a < 3; ++a)
          if (kAxisNames[a] == c) axis = a;
        if (axis < 0 || axis >= spatial_dim)
          throw std::invalid_argument("string_to_term: bad derivative subscript in '" + tok + "'");
        ++f.deriv.orders[axis];
      }
    }
    f.var_id = -1;
    for (const auto& v : vars)
      if (v.name == name) f.var_id = v.id;
    if (f.var_id < 0)
      throw std::invalid_argument("string_to_term: unknown variable '" + name + "'");
    t.factors.push_back(f);
  }
  return canonicalize(t);
}

std::string library_to_json(const Library& lib) {
  nlohmann::json j;
  j["mode"] = lib.mode == LibraryMode::Galilean    ? "galilean"
              : lib.mode == LibraryMode::Lorentz   ? "lorentz"
                                                   : "overcomplete";
  j["target"] = lib.target == TargetKind::FirstTimeDerivative ? "first-time-derivative"
                                                              : "second-time-derivative";
  nlohmann::json jv = nlohmann::json::array();
  int dim = 2;
  for (const auto& t : lib.terms)
    for (const auto& f : t.factors)
      if (!f.deriv.orders.empty()) dim = static_cast<int>(f.deriv.orders.size());
  for (const auto& t : lib.pinned)
    for (const auto& f : t.factors)
      if (!f.deriv.orders.empty()) dim = static_cast<int>(f.deriv.orders.size());
  for (const auto& v : lib.vars) {
    jv.push_back({{"id", v.id},
                  {"name", v.name},
                  {"kind", v.kind == VarKind::Velocity   ? "velocity"
                           : v.kind == VarKind::Pressure ? "pressure"
                                                         : "scalar"}});
  }
  j["vars"] = jv;
  j["spatial_dim"] = dim;
  nlohmann::json terms = nlohmann::json::array(), pinned = nlohmann::json::array();
  for (const auto& t : lib.terms) terms.push_back(term_to_string(t, lib.vars));
  for (const auto& t : lib.pinned) pinned.push_back(term_to_string(t, lib.vars));
  j["terms"] = terms;
  j["pinned"] = pinned;
  return j.dump(2);
}

Library library_from_json(const std::string& json_text) {
  const auto j = nlohmann::json::parse(json_text);
  Library lib;
  const std::string mode = j.at("mode");
  lib.mode = mode == "galilean"  ? LibraryMode::Galilean
             : mode == "lorentz" ? LibraryMode::Lorentz
                                 : LibraryMode::Overcomplete;
  lib.target = j.at("target") == "first-time-derivative" ? TargetKind::FirstTimeDerivative
                                                         : TargetKind::SecondTimeDerivative;
  for (const auto& jv : j.at("vars")) {
    FieldVar v;
    v.id = jv.at("id");
    v.name = jv.at("name");
    const std::string kind = jv.at("kind");
    v.kind = kind == "velocity"   ? VarKind::Velocity
             : kind == "pressure" ? VarKind::Pressure
                                  : VarKind::Scalar;
    lib.vars.push_back(v);
  }
  const int dim = j.at("spatial_dim");
  for (const auto& s : j.at("terms"))
    lib.terms.push_back(string_to_term(s.get<std::string>(), lib.vars, dim));
  for (const auto& s : j.at("pinned"))
    lib.pinned.push_back(string_to_term(s.get<std::string>(), lib.vars, dim));
  return lib;
}

std::vector<FieldVar> make_velocity_vars(int d, bool with_pressure) {
  const char* names[3] = {"u", "v", "w"};
  std::vector<FieldVar> vars;
  for (int i = 0; i < d; ++i) vars.push_back({i, names[i], VarKind::Velocity});
  if (with_pressure) vars.push_back({d, "p", VarKind::Pressure});
  return vars;
}

std::vector<FieldVar> make_scalar_vars(const std::vector<std::string>& names) {
  std::vector<FieldVar> vars;
  for (int i = 0; i < static_cast<int>(names.size()); ++i)
    vars.push_back({i, names[i], VarKind::Scalar});
  return vars;
}

}  // namespace icnet
