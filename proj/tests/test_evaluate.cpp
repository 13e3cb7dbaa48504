#include <cmath>

#include "doctest.h"
#include "icnet/evaluate.hpp"
#include "icnet/solvers.hpp"

using namespace icnet;

namespace {

FieldDataset constant_dataset(double base, int nt = 3, int n = 8) {
  FieldDataset ds;
  ds.grid = make_grid2d(n, n);
  ds.t0 = 0.0;
  ds.dt = 0.1;
  ds.nt = nt;
  ds.var_names = {"u"};
  auto& d = ds.data["u"];
  d.resize(static_cast<std::size_t>(nt) * n * n);
  for (std::size_t i = 0; i < d.size(); ++i)
    d[i] = base + std::sin(0.1 * static_cast<double>(i));
  return ds;
}

DiscoveredPde simple_pde(const std::vector<std::pair<std::string, double>>& u_rhs,
                         const std::vector<std::pair<std::string, double>>& v_rhs) {
  DiscoveredPde pde;
  pde.vars = make_velocity_vars(2);
  pde.spatial_dim = 2;
  pde.target = TargetKind::FirstTimeDerivative;
  PdeEquation eu, ev;
  eu.target_var = "u";
  for (const auto& [s, c] : u_rhs) eu.rhs.emplace_back(string_to_term(s, pde.vars, 2), c);
  ev.target_var = "v";
  for (const auto& [s, c] : v_rhs) ev.rhs.emplace_back(string_to_term(s, pde.vars, 2), c);
  pde.equations = {eu, ev};
  return pde;
}

}  // namespace

TEST_CASE("relative error vanishes on identical fields and is scale invariant") {
  const FieldDataset truth = constant_dataset(1.0);
  const EvalReport zero = relative_error(truth, truth);
  CHECK(zero.mean == 0.0);
  CHECK(zero.max == 0.0);
  CHECK(zero.per_time.size() == 3);

  FieldDataset pred = truth;
  for (auto& v : pred.data["u"]) v += 0.01;
  const EvalReport a = relative_error(truth, pred);
  CHECK(a.mean > 0.0);

  // scaling both fields by the same factor leaves the report unchanged
  FieldDataset truth2 = truth, pred2 = pred;
  for (auto& v : truth2.data["u"]) v *= 7.0;
  for (auto& v : pred2.data["u"]) v *= 7.0;
  const EvalReport b = relative_error(truth2, pred2);
  for (std::size_t i = 0; i < a.per_time.size(); ++i)
    CHECK(a.per_time[i] == doctest::Approx(b.per_time[i]).epsilon(1e-12));
}

TEST_CASE("residual of the true equations is far below a corrupted one") {
  SolverConfig cfg;
  cfg.nx = cfg.ny = 64;
  cfg.t_end = 0.3;
  cfg.ic_b1 = 2.0;  // gentle pulse keeps the nonlinear term band-limited
  const FieldDataset ds = solve_burgers2d(cfg);

  const auto rhs = [](const std::string& var, double nu) {
    return std::vector<std::pair<std::string, double>>{
        {"u*" + var + "_x", -1.0}, {var + "_y*v", -1.0}, {var + "_xx", nu}, {var + "_yy", nu}};
  };
  const DiscoveredPde truth = simple_pde(rhs("u", 0.1), rhs("v", 0.1));
  const DiscoveredPde wrong = simple_pde(rhs("u", 0.5), rhs("v", 0.5));

  const double r_true = equation_residual_rms(truth, ds);
  const double r_wrong = equation_residual_rms(wrong, ds);
  CHECK(r_true < 0.01);
  CHECK(r_wrong > 20 * r_true);
}

TEST_CASE("coefficient report: matches, misses, spurious terms and scores") {
  const DiscoveredPde ref = simple_pde(
      {{"u*u_x", -1.0}, {"u_y*v", -1.0}, {"u_xx", 0.1}, {"u_yy", 0.1}},
      {{"u*v_x", -1.0}, {"v*v_y", -1.0}, {"v_xx", 0.1}, {"v_yy", 0.1}});

  SUBCASE("identical systems score perfectly") {
    const CoefficientReport r = coefficient_report(ref, ref);
    CHECK(r.precision == 1.0);
    CHECK(r.recall == 1.0);
    CHECK(r.exact_support);
    CHECK(r.max_rel_error == 0.0);
    CHECK(r.matched.size() == 8);
  }

  SUBCASE("one missing and one spurious term") {
    const DiscoveredPde found = simple_pde(
        {{"u*u_x", -0.98}, {"u_y*v", -1.01}, {"u_xx", 0.1}, {"u_yy", 0.1}, {"v_x", 0.02}},
        {{"u*v_x", -1.0}, {"v*v_y", -1.0}, {"v_xx", 0.1}});
    const CoefficientReport r = coefficient_report(found, ref);
    CHECK(r.matched.size() == 7);
    CHECK(r.missing.size() == 1);
    CHECK(r.missing[0].term == "v_yy");
    CHECK(r.spurious.size() == 1);
    CHECK(r.spurious[0].term == "v_x");
    CHECK(r.precision == doctest::Approx(7.0 / 8.0));
    CHECK(r.recall == doctest::Approx(7.0 / 8.0));
    CHECK_FALSE(r.exact_support);
    CHECK(r.max_rel_error == doctest::Approx(0.02).epsilon(1e-9));
  }
}

TEST_CASE("frame-change certificate passes for the filtered libraries") {
  const auto uv = make_velocity_vars(2);
  const Library gal = galilean_filter(enumerate_candidates(uv, 2, 3, 2), uv);
  BoostSpec gspec;
  gspec.mode = LibraryMode::Galilean;
  gspec.velocity = {0.3, -0.2};
  const InvarianceReport gr = certify_invariance(gal, gspec);
  CHECK(gr.max_error < 1e-8);
  CHECK(gr.term_errors.size() == gal.terms.size());
  CHECK(gr.combined_errors.size() == 2);

  const auto phi = make_scalar_vars({"phi"});
  const Library lor = lorentz_filter(enumerate_candidates(phi, 2, 3, 2), phi);
  BoostSpec lspec;
  lspec.mode = LibraryMode::Lorentz;
  lspec.velocity = {0.3, 0.1};
  const InvarianceReport lr = certify_invariance(lor, lspec);
  CHECK(lr.max_error < 1e-8);
  CHECK(lr.combined_errors.size() == 1);
}

TEST_CASE("control terms that break the symmetry score their exact deviation") {
  const auto uv = make_velocity_vars(2);
  BoostSpec gspec;
  gspec.mode = LibraryMode::Galilean;
  gspec.velocity = {0.3, -0.2};
  // a bare velocity shifts by exactly the boost component
  CHECK(term_invariance_error(string_to_term("u", uv, 2), uv, 2, gspec) ==
        doctest::Approx(0.3).epsilon(1e-12));
  CHECK(term_invariance_error(string_to_term("v", uv, 2), uv, 2, gspec) ==
        doctest::Approx(0.2).epsilon(1e-12));
  // u*u_x alone is not invariant either, only the combination with u_t is
  CHECK(term_invariance_error(string_to_term("u*u_x", uv, 2), uv, 2, gspec) > 0.01);

  const auto phi = make_scalar_vars({"phi"});
  BoostSpec lspec;
  lspec.mode = LibraryMode::Lorentz;
  lspec.velocity = {0.4, 0.0};
  CHECK(term_invariance_error(string_to_term("phi_x", phi, 2), phi, 2, lspec) > 0.01);
  CHECK(term_invariance_error(string_to_term("phi_xx", phi, 2), phi, 2, lspec) > 0.01);
  CHECK(term_invariance_error(string_to_term("phi", phi, 2), phi, 2, lspec) < 1e-12);
}
