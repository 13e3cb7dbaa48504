#include "icnet/pde.hpp"

#include <cstdio>
#include <sstream>

#include "json.hpp"

namespace icnet {

const PdeEquation* DiscoveredPde::equation_for(const std::string& var) const {
  for (const auto& e : equations)
    if (e.target_var == var) return &e;
  return nullptr;
}

std::string pde_to_json(const DiscoveredPde& pde) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["spatial_dim"] = pde.spatial_dim;
  j["target"] = pde.target == TargetKind::FirstTimeDerivative ? "first" : "second";
  j["vars"] = nlohmann::json::array();
  for (const auto& v : pde.vars) {
    const char* kind = v.kind == VarKind::Velocity   ? "velocity"
                       : v.kind == VarKind::Pressure ? "pressure"
                                                     : "scalar";
    j["vars"].push_back({{"name", v.name}, {"kind", kind}});
  }
  j["equations"] = nlohmann::json::array();
  for (const auto& e : pde.equations) {
    nlohmann::json rhs = nlohmann::json::array();
    for (const auto& [term, coef] : e.rhs)
      rhs.push_back({{"term", term_to_string(term, pde.vars)}, {"coefficient", coef}});
    j["equations"].push_back({{"target_var", e.target_var}, {"rhs", rhs}});
  }
  if (!pde.provenance.empty()) {
    try {
      j["provenance"] = nlohmann::json::parse(pde.provenance);
    } catch (const nlohmann::json::parse_error&) {
      j["provenance"] = pde.provenance;
    }
  }
  return j.dump(2);
}

DiscoveredPde pde_from_json(const std::string& json_text) {
  const nlohmann::json j = nlohmann::json::parse(json_text);
  DiscoveredPde pde;
  pde.spatial_dim = j.at("spatial_dim").get<int>();
  pde.target = j.at("target").get<std::string>() == "second" ? TargetKind::SecondTimeDerivative
                                                             : TargetKind::FirstTimeDerivative;
  int id = 0;
  for (const auto& jv : j.at("vars")) {
    FieldVar v;
    v.id = id++;
    v.name = jv.at("name").get<std::string>();
    const std::string kind = jv.at("kind").get<std::string>();
    v.kind = kind == "velocity" ? VarKind::Velocity
             : kind == "pressure" ? VarKind::Pressure
                                  : VarKind::Scalar;
    pde.vars.push_back(v);
  }
  for (const auto& je : j.at("equations")) {
    PdeEquation e;
    e.target_var = je.at("target_var").get<std::string>();
    for (const auto& jt : je.at("rhs"))
      e.rhs.emplace_back(string_to_term(jt.at("term").get<std::string>(), pde.vars, pde.spatial_dim),
                         jt.at("coefficient").get<double>());
    pde.equations.push_back(std::move(e));
  }
  if (j.contains("provenance")) pde.provenance = j["provenance"].dump();
  return pde;
}

std::string pde_to_text(const DiscoveredPde& pde) {
  std::ostringstream os;
  const char* suffix = pde.target == TargetKind::FirstTimeDerivative ? "_t" : "_tt";
  for (const auto& e : pde.equations) {
    os << e.target_var << suffix << " =";
    if (e.rhs.empty()) os << " 0";
    bool first = true;
    for (const auto& [term, coef] : e.rhs) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.6g", std::abs(coef));
      if (first)
        os << (coef < 0 ? " -" : " ");
      else
        os << (coef < 0 ? " - " : " + ");
      first = false;
      os << buf;
      const std::string ts = term_to_string(term, pde.vars);
      if (ts != "1") os << "*" << ts;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace icnet
