#include "icnet/evaluate.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <map>
#include <stdexcept>

#include "icnet/loss.hpp"
#include "icnet/rng.hpp"
#include "icnet/solvers.hpp"

namespace icnet {

EvalReport relative_error(const FieldDataset& truth, const FieldDataset& pred) {
  if (truth.var_names != pred.var_names || truth.frame_size() != pred.frame_size())
    throw std::invalid_argument("relative_error: dataset shapes differ");
  const int nt = std::min(truth.nt, pred.nt);
  const std::int64_t frame = truth.frame_size();

  EvalReport rep;
  for (int it = 0; it < nt; ++it) {
    double num = 0.0, den = 0.0;
    for (const auto& var : truth.var_names) {
      const double* a = truth.data.at(var).data() + static_cast<std::size_t>(it) * frame;
      const double* b = pred.data.at(var).data() + static_cast<std::size_t>(it) * frame;
      double mean = 0.0;
      for (std::int64_t q = 0; q < frame; ++q) mean += a[q];
      mean /= static_cast<double>(frame);
      for (std::int64_t q = 0; q < frame; ++q) {
        const double d = b[q] - a[q];
        num += d * d;
        const double c = a[q] - mean;
        den += c * c;
      }
    }
    rep.per_time.push_back(den > 0 ? num / den : num);
  }
  for (double e : rep.per_time) {
    rep.mean += e;
    rep.max = std::max(rep.max, e);
  }
  if (!rep.per_time.empty()) rep.mean /= static_cast<double>(rep.per_time.size());
  return rep;
}

double equation_residual_rms(const DiscoveredPde& pde, const FieldDataset& ds, int skip_edges) {
  const int time_order = pde.target == TargetKind::SecondTimeDerivative ? 2 : 1;
  std::vector<int> var_index;
  for (const auto& eq : pde.equations) {
    int idx = -1;
    for (std::size_t v = 0; v < ds.var_names.size(); ++v)
      if (ds.var_names[v] == eq.target_var) idx = static_cast<int>(v);
    if (idx < 0) throw std::invalid_argument("equation_residual_rms: unknown variable " + eq.target_var);
    var_index.push_back(idx);
  }

  const int lo = std::min(skip_edges, std::max(0, ds.nt / 2 - 1));
  const int hi = ds.nt - lo;
  const std::int64_t frame = ds.frame_size();
  double ss = 0.0;
  std::int64_t count = 0;
  for (int it = lo; it < hi; ++it) {
    const std::vector<PointJet> jets = grid_jets(ds, it, time_order);
    for (std::size_t e = 0; e < pde.equations.size(); ++e) {
      const int ve = var_index[e];
      for (std::int64_t q = 0; q < frame; ++q) {
        double r = time_order == 2 ? jets[q].d2(ve, 0, 0) : jets[q].d1(ve, 0);
        for (const auto& [term, coef] : pde.equations[e].rhs)
          r -= coef * evaluate_term(term, jets[q]);
        ss += r * r;
        ++count;
      }
    }
  }
  return count > 0 ? std::sqrt(ss / static_cast<double>(count)) : 0.0;
}

CoefficientReport coefficient_report(const DiscoveredPde& found, const DiscoveredPde& reference) {
  CoefficientReport rep;
  std::map<std::pair<std::string, std::string>, double> fmap, rmap;
  for (const auto& eq : found.equations)
    for (const auto& [term, coef] : eq.rhs)
      fmap[{eq.target_var, term_to_string(term, found.vars)}] = coef;
  for (const auto& eq : reference.equations)
    for (const auto& [term, coef] : eq.rhs)
      rmap[{eq.target_var, term_to_string(term, reference.vars)}] = coef;

  for (const auto& [key, expected] : rmap) {
    const auto it = fmap.find(key);
    if (it == fmap.end()) {
      rep.missing.push_back({key.first, key.second, expected, 0.0});
    } else {
      rep.matched.push_back({key.first, key.second, expected, it->second});
      const double denom = std::max(std::abs(expected), 1e-300);
      rep.max_rel_error = std::max(rep.max_rel_error, std::abs(it->second - expected) / denom);
    }
  }
  for (const auto& [key, coef] : fmap)
    if (!rmap.count(key)) rep.spurious.push_back({key.first, key.second, 0.0, coef});

  const double nf = static_cast<double>(fmap.size());
  const double nr = static_cast<double>(rmap.size());
  rep.precision = nf > 0 ? static_cast<double>(rep.matched.size()) / nf : 1.0;
  rep.recall = nr > 0 ? static_cast<double>(rep.matched.size()) / nr : 1.0;
  rep.exact_support = rep.missing.empty() && rep.spurious.empty();
  return rep;
}

namespace {

PointJet random_jet(int dim, int nvars, std::uint64_t k) {
  PointJet j(dim, nvars);
  for (std::size_t i = 0; i < j.data.size(); ++i) j.data[i] = rng::normal(k, i);
  return j;
}

std::vector<int> velocity_components(const std::vector<FieldVar>& vars) {
  std::vector<int> comp(vars.size(), -1);
  int c = 0;
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (vars[v].kind == VarKind::Velocity) comp[v] = c++;
  return comp;
}

/// u(t, x) observed from a frame moving with velocity c: values of the
/// velocity components shift by -c, spatial derivatives are unchanged,
/// and time derivatives pick up the advective correction.
PointJet galilean_boost(const PointJet& j, const std::vector<FieldVar>& vars,
                        const std::vector<double>& c) {
  const int dim = j.dim;
  if (static_cast<int>(c.size()) != dim)
    throw std::invalid_argument("galilean_boost: velocity dimension mismatch");
  const std::vector<int> comp = velocity_components(vars);
  PointJet out = j;
  for (int v = 0; v < j.nvars; ++v) {
    if (comp[v] >= 0) out.value(v) = j.value(v) - c[comp[v]];
    double dt = j.d1(v, 0);
    for (int s = 1; s <= dim; ++s) dt += c[s - 1] * j.d1(v, s);
    out.d1(v, 0) = dt;
    double dtt = j.d2(v, 0, 0);
    for (int s = 1; s <= dim; ++s) dtt += 2.0 * c[s - 1] * j.d2(v, 0, s);
    for (int a = 1; a <= dim; ++a)
      for (int b = 1; b <= dim; ++b) dtt += c[a - 1] * c[b - 1] * j.d2(v, a, b);
    out.d2(v, 0, 0) = dtt;
    for (int s = 1; s <= dim; ++s) {
      double dts = j.d2(v, 0, s);
      for (int a = 1; a <= dim; ++a) dts += c[a - 1] * j.d2(v, a, s);
      out.d2(v, 0, s) = dts;
    }
  }
  return out;
}

/// Lorentz boost matrix (unit wave speed) acting on (t, x, y[, z]).
Eigen::MatrixXd lorentz_matrix(const std::vector<double>& v) {
  const int dim = static_cast<int>(v.size());
  double b2 = 0.0;
  for (double vi : v) b2 += vi * vi;
  if (b2 >= 1.0) throw std::invalid_argument("lorentz boost speed must be below 1");
  const double gamma = 1.0 / std::sqrt(1.0 - b2);
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(dim + 1, dim + 1);
  m(0, 0) = gamma;
  for (int i = 0; i < dim; ++i) {
    m(0, i + 1) = -gamma * v[i];
    m(i + 1, 0) = -gamma * v[i];
    for (int jn = 0; jn < dim; ++jn)
      m(i + 1, jn + 1) += b2 > 0 ? (gamma - 1.0) * v[i] * v[jn] / b2 : 0.0;
  }
  return m;
}

PointJet lorentz_boost(const PointJet& j, const std::vector<double>& v) {
  const int dim = j.dim;
  const int ni = dim + 1;
  // the chain rule uses the inverse transform, the boost with -v
  std::vector<double> mv(v);
  for (double& x : mv) x = -x;
  const Eigen::MatrixXd binv = lorentz_matrix(mv);

  PointJet out = j;
  for (int var = 0; var < j.nvars; ++var) {
    for (int mu = 0; mu < ni; ++mu) {
      double d = 0.0;
      for (int nu = 0; nu < ni; ++nu) d += binv(nu, mu) * j.d1(var, nu);
      out.d1(var, mu) = d;
    }
    for (int mu = 0; mu < ni; ++mu)
      for (int nu = mu; nu < ni; ++nu) {
        double d = 0.0;
        for (int a = 0; a < ni; ++a)
          for (int b = 0; b < ni; ++b) d += binv(a, mu) * binv(b, nu) * j.d2(var, a, b);
        out.d2(var, mu, nu) = d;
      }
  }
  return out;
}

PointJet apply_boost(const PointJet& j, const std::vector<FieldVar>& vars, const BoostSpec& spec) {
  if (spec.mode == LibraryMode::Galilean) return galilean_boost(j, vars, spec.velocity);
  if (spec.mode == LibraryMode::Lorentz) return lorentz_boost(j, spec.velocity);
  throw std::invalid_argument("apply_boost: overcomplete libraries have no symmetry group");
}

}  // namespace

InvarianceReport certify_invariance(const Library& lib, const BoostSpec& spec, int n_trials,
                                    std::uint64_t seed) {
  const int dim = static_cast<int>(spec.velocity.size());
  const int nv = static_cast<int>(lib.vars.size());
  InvarianceReport rep;
  rep.term_errors.assign(lib.terms.size(), 0.0);

  const std::vector<int> eq_vars = equation_var_indices(lib);
  const std::vector<std::vector<int>> eq_pinned = pinned_for_equations(lib);
  rep.combined_errors.assign(eq_vars.size(), 0.0);

  for (int trial = 0; trial < n_trials; ++trial) {
    const PointJet j = random_jet(dim, nv, rng::key(seed, 40 + trial));
    const PointJet jb = apply_boost(j, lib.vars, spec);

    for (std::size_t t = 0; t < lib.terms.size(); ++t) {
      const double e = std::abs(evaluate_term(lib.terms[t], jb) - evaluate_term(lib.terms[t], j));
      rep.term_errors[t] = std::max(rep.term_errors[t], e);
    }

    // the target plus unit-coefficient pinned combination is the group
    // invariant the construction relies on
    for (std::size_t e = 0; e < eq_vars.size(); ++e) {
      const int ve = eq_vars[e];
      double a, b;
      if (lib.target == TargetKind::SecondTimeDerivative) {
        a = j.d2(ve, 0, 0);
        b = jb.d2(ve, 0, 0);
        for (const int p : eq_pinned[e]) {
          a -= evaluate_term(lib.pinned[p], j);
          b -= evaluate_term(lib.pinned[p], jb);
        }
      } else {
        a = j.d1(ve, 0);
        b = jb.d1(ve, 0);
        for (const int p : eq_pinned[e]) {
          a += evaluate_term(lib.pinned[p], j);
          b += evaluate_term(lib.pinned[p], jb);
        }
      }
      rep.combined_errors[e] = std::max(rep.combined_errors[e], std::abs(a - b));
    }
  }

  for (double e : rep.term_errors) rep.max_error = std::max(rep.max_error, e);
  for (double e : rep.combined_errors) rep.max_error = std::max(rep.max_error, e);
  return rep;
}

double term_invariance_error(const Term& t, const std::vector<FieldVar>& vars, int spatial_dim,
                             const BoostSpec& spec, int n_trials, std::uint64_t seed) {
  double worst = 0.0;
  for (int trial = 0; trial < n_trials; ++trial) {
    const PointJet j = random_jet(spatial_dim, static_cast<int>(vars.size()),
                                  rng::key(seed, 40 + trial));
    const PointJet jb = apply_boost(j, vars, spec);
    worst = std::max(worst, std::abs(evaluate_term(t, jb) - evaluate_term(t, j)));
  }
  return worst;
}

}  // namespace icnet
