// End-to-end acceptance checks. Each case prints one [PASS]/[FAIL] line.
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "icnet/discover.hpp"
#include "icnet/evaluate.hpp"
#include "icnet/rng.hpp"
#include "icnet/solvers.hpp"

using namespace icnet;

namespace {

struct Verdict {
  bool ok = true;
  void req(bool c, const char* what) {
    CHECK_MESSAGE(c, doctest::String(what));
    ok = ok && c;
  }
  void print(const char* name) const { std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", name); }
};

std::map<std::string, double> rhs_map(const DiscoveredPde& pde, const std::string& var) {
  std::map<std::string, double> out;
  for (const auto& eq : pde.equations) {
    if (eq.target_var != var) continue;
    for (const auto& [t, c] : eq.rhs) out[term_to_string(t, pde.vars)] = c;
  }
  return out;
}

bool within(const std::map<std::string, double>& rhs, const std::string& term, double expect,
            double rel) {
  const auto it = rhs.find(term);
  return it != rhs.end() && std::abs(it->second - expect) <= rel * std::abs(expect);
}

// ---- shared end-to-end setups ------------------------------------------

FieldDataset burgers_dataset(double noise_level) {
  SolverConfig cfg;
  cfg.nx = cfg.ny = 64;
  cfg.t_end = 1.0;
  cfg.dt_output = 0.02;
  cfg.ic_b1 = 2.0;  // gentle pulses stay band-limited at this resolution
  cfg.ic_d1 = 0.5;  // overlapping pulses keep cross-convection identifiable
  FieldDataset ds = downsample(solve_burgers2d(cfg), {2, 2});
  if (noise_level > 0.0) {
    NoiseSpec n;
    n.level = noise_level;
    n.seed = 1;
    ds = add_noise(ds, n);
  }
  return ds;
}

std::vector<StageSpec> desk_schedule(int adam_iters, int lbfgs_iters) {
  return {{StageOpt::Adam, adam_iters, 1e-7, 1024},
          {StageOpt::Lbfgs, lbfgs_iters, 1e-7, 0},
          {StageOpt::Lbfgs, lbfgs_iters, 1e-6, 0}};
}

DiscoveryRun run_burgers_discovery(const FieldDataset& ds, int snapshot_range, bool prune) {
  SampleSpec sp;
  sp.n_snapshots = 30;
  sp.snapshot_range = snapshot_range;
  sp.n_spatial_points = 200;
  sp.seed = 2;
  const TrainingSet ts = sample_points(ds, sp);

  const auto vars = make_velocity_vars(2);
  const Library lib = galilean_filter(enumerate_candidates(vars, 2, 3, 2), vars);

  MlpSpec ms;
  ms.n_inputs = 3;
  ms.n_outputs = 2;
  ms.hidden = {40, 40, 40, 40};
  ms.seed = 0;
  Surrogate net(ms);
  net.calibrate(ts);

  DiscoveryConfig dc;
  dc.stages = desk_schedule(1500, 200);
  dc.prune = prune;
  dc.seed = 0;
  return discover(lib, ts, &net, dc);
}

FieldDataset slice_frames(const FieldDataset& ds, int first, int last) {
  FieldDataset out = ds;
  out.nt = last - first;
  out.t0 = ds.time(first);
  out.data.clear();
  const std::int64_t frame = ds.frame_size();
  for (const auto& name : ds.var_names) {
    const auto& src = ds.data.at(name);
    out.data[name].assign(src.begin() + static_cast<std::ptrdiff_t>(first) * frame,
                          src.begin() + static_cast<std::ptrdiff_t>(last) * frame);
  }
  return out;
}

void check_burgers_run(Verdict& v, const DiscoveryRun& run, double tol) {
  for (const std::string var : {"u", "v"}) {
    const auto rhs = rhs_map(run.pde, var);
    const std::string c1 = var == "u" ? "u*u_x" : "u*v_x";
    const std::string c2 = var == "u" ? "u_y*v" : "v*v_y";
    v.req(rhs.size() == 4, "exact four-term support");
    v.req(within(rhs, c1, -1.0, tol), "x-convection coefficient");
    v.req(within(rhs, c2, -1.0, tol), "y-convection coefficient");
    v.req(within(rhs, var + "_xx", 0.1, tol), "xx diffusion coefficient");
    v.req(within(rhs, var + "_yy", 0.1, tol), "yy diffusion coefficient");
  }
}

DiscoveryRun run_kg_discovery(double noise_level) {
  SolverConfig cfg;
  cfg.pde = PdeKind::KleinGordon;
  cfg.nx = cfg.ny = 64;
  cfg.t_end = 3.0;
  cfg.dt_output = 0.02;
  FieldDataset ds = downsample(generate(cfg), {2, 2});
  if (noise_level > 0.0) {
    NoiseSpec n;
    n.level = noise_level;
    n.seed = 3;
    ds = add_noise(ds, n);
  }

  SampleSpec sp;
  sp.n_snapshots = 30;
  sp.snapshot_range = 150;
  sp.n_spatial_points = 200;
  sp.seed = 4;
  const TrainingSet ts = sample_points(ds, sp);

  const auto vars = make_scalar_vars({"phi"});
  const Library lib = lorentz_filter(enumerate_candidates(vars, 2, 3, 2), vars);

  MlpSpec ms;
  ms.n_inputs = 3;
  ms.n_outputs = 1;
  ms.hidden = {40, 40, 40, 40};
  ms.seed = 0;
  Surrogate net(ms);
  net.calibrate(ts);

  DiscoveryConfig dc;
  dc.stages = desk_schedule(1500, 200);
  dc.seed = 0;
  return discover(lib, ts, &net, dc);
}

void check_kg_run(Verdict& v, const DiscoveryRun& run, double tol) {
  const auto rhs = rhs_map(run.pde, "phi");
  v.req(rhs.size() == 4, "support is {phi, phi^3} plus the pinned laplacian");
  v.req(within(rhs, "phi", 1.0, tol), "phi coefficient");
  v.req(within(rhs, "phi^3", -1.0, tol), "phi^3 coefficient");
  v.req(within(rhs, "phi_xx", 0.1, tol), "phi_xx coefficient");
  v.req(within(rhs, "phi_yy", 0.1, tol), "phi_yy coefficient");
}

}  // namespace

TEST_CASE("criterion 1: invariance-filtered golden libraries") {
  Verdict v;
  const auto to_set = [](const std::vector<Term>& ts, const std::vector<FieldVar>& vars) {
    std::set<std::string> s;
    for (const auto& t : ts) s.insert(term_to_string(t, vars));
    return s;
  };

  const auto uv = make_velocity_vars(2);
  const Library gal = galilean_filter(enumerate_candidates(uv, 2, 3, 2), uv);
  v.req(to_set(gal.terms, uv) == std::set<std::string>{"1", "u_x", "u_y", "u_xx", "u_xy", "u_yy",
                                                       "v_x", "v_y", "v_xx", "v_xy", "v_yy"},
        "velocity library kept terms");
  v.req(to_set(gal.pinned, uv) == std::set<std::string>{"u*u_x", "u_y*v", "u*v_x", "v*v_y"},
        "velocity library pinned terms");
  v.req(gal.terms.size() + gal.pinned.size() == 15, "velocity library has 15 terms");

  const auto phi = make_scalar_vars({"phi"});
  const Library lor = lorentz_filter(enumerate_candidates(phi, 2, 3, 2), phi);
  v.req(to_set(lor.terms, phi) == std::set<std::string>{"1", "phi", "phi^2", "phi^3"},
        "scalar wave kept terms");
  v.req(to_set(lor.pinned, phi) == std::set<std::string>{"phi_xx", "phi_yy"},
        "scalar wave pinned terms");
  v.req(lor.terms.size() + lor.pinned.size() == 6, "scalar wave library has 6 terms");

  const auto phis = make_scalar_vars({"phi1", "phi2"});
  const Library two = lorentz_filter(enumerate_candidates(phis, 2, 3, 2), phis);
  v.req(to_set(two.terms, phis) ==
            std::set<std::string>{"1", "phi1", "phi2", "phi1^2", "phi2^2", "phi1^3", "phi2^3",
                                  "phi1^2*phi2", "phi1*phi2^2"},
        "coupled wave kept terms");
  v.req(to_set(two.pinned, phis) ==
            std::set<std::string>{"phi1_xx", "phi1_yy", "phi2_xx", "phi2_yy"},
        "coupled wave pinned terms");
  v.req(two.terms.size() + two.pinned.size() == 13, "coupled wave library has 13 terms");
  v.print("criterion 1: golden invariant libraries match the published sets");
}

TEST_CASE("criterion 2: propagated jets and loss gradients match finite differences") {
  Verdict v;
  const std::uint64_t master = rng::key(2024, 0);

  // 50 randomized (network spec, point) pairs
  double worst_jet = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::uint64_t c = static_cast<std::uint64_t>(trial) * 100;
    MlpSpec ms;
    ms.n_inputs = 3;
    ms.n_outputs = 1 + static_cast<int>(rng::uniform(master, c++) * 3);
    const int h1 = 8 + static_cast<int>(rng::uniform(master, c++) * 16);
    const int h2 = 8 + static_cast<int>(rng::uniform(master, c++) * 16);
    ms.hidden = {h1, h2};
    ms.seed = 1000 + static_cast<std::uint64_t>(trial);
    Surrogate net(ms);
    net.set_input_box({0.0, -2.0, -1.0}, {1.5, 2.0, 3.0});
    std::vector<double> mu(ms.n_outputs), sd(ms.n_outputs);
    for (int o = 0; o < ms.n_outputs; ++o) {
      mu[o] = rng::normal(master, c++);
      sd[o] = 0.5 + rng::uniform(master, c++);
    }
    net.set_output_affine(mu, sd);

    Eigen::MatrixXd pt(1, 3);
    pt << rng::uniform(master, c) * 1.5, rng::uniform(master, c + 1) * 4.0 - 2.0,
        rng::uniform(master, c + 2) * 4.0 - 1.0;
    c += 3;
    const PointJet jet = net.jets(pt)[0];

    const auto value = [&](double t, double x, double y, int var) {
      Eigen::MatrixXd q(1, 3);
      q << t, x, y;
      return net.values(q)(0, var);
    };
    const double h = 1e-4;
    const double t = pt(0, 0), x = pt(0, 1), y = pt(0, 2);
    for (int var = 0; var < ms.n_outputs; ++var) {
      const double f0 = value(t, x, y, var);
      const auto rel = [](double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1.0); };
      worst_jet = std::max(worst_jet, rel(jet.value(var), f0));
      const double shifts[3][3] = {{h, 0, 0}, {0, h, 0}, {0, 0, h}};
      for (int i = 0; i < 3; ++i) {
        const double fp = value(t + shifts[i][0], x + shifts[i][1], y + shifts[i][2], var);
        const double fm = value(t - shifts[i][0], x - shifts[i][1], y - shifts[i][2], var);
        worst_jet = std::max(worst_jet, rel(jet.d1(var, i), (fp - fm) / (2 * h)));
        worst_jet = std::max(worst_jet, rel(jet.d2(var, i, i), (fp - 2 * f0 + fm) / (h * h)));
        for (int j = i + 1; j < 3; ++j) {
          const double fpp = value(t + shifts[i][0] + shifts[j][0], x + shifts[i][1] + shifts[j][1],
                                   y + shifts[i][2] + shifts[j][2], var);
          const double fpm = value(t + shifts[i][0] - shifts[j][0], x + shifts[i][1] - shifts[j][1],
                                   y + shifts[i][2] - shifts[j][2], var);
          const double fmp = value(t - shifts[i][0] + shifts[j][0], x - shifts[i][1] + shifts[j][1],
                                   y - shifts[i][2] + shifts[j][2], var);
          const double fmm = value(t - shifts[i][0] - shifts[j][0], x - shifts[i][1] - shifts[j][1],
                                   y - shifts[i][2] - shifts[j][2], var);
          worst_jet =
              std::max(worst_jet, rel(jet.d2(var, i, j), (fpp - fpm - fmp + fmm) / (4 * h * h)));
        }
      }
    }
  }
  v.req(worst_jet < 1e-6, "jet vs finite differences below 1e-6 over 50 randomized pairs");

  // 10 randomized full-loss gradient checks
  double worst_grad = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const bool wave = trial % 2 == 1;
    const auto vars = wave ? make_scalar_vars({"phi"}) : make_velocity_vars(2);
    const Library lib = wave ? lorentz_filter(enumerate_candidates(vars, 2, 3, 2), vars)
                             : galilean_filter(enumerate_candidates(vars, 2, 3, 2), vars);

    TrainingSet ts;
    ts.dim = 2;
    for (const auto& fv : vars) ts.var_names.push_back(fv.name);
    const std::uint64_t kd = rng::key(77, static_cast<std::uint64_t>(trial));
    std::uint64_t c = 0;
    const int npts = 15 + trial;
    for (int p = 0; p < npts; ++p) {
      const double t = rng::uniform(kd, c++), x = rng::uniform(kd, c++) * 2 - 1,
                   y = rng::uniform(kd, c++) * 2 - 1;
      ts.coords.insert(ts.coords.end(), {t, x, y});
      for (std::size_t vi = 0; vi < vars.size(); ++vi)
        ts.values.push_back(std::sin(x + 0.3 * static_cast<double>(vi)) * std::cos(y - t));
    }

    MlpSpec ms;
    ms.n_inputs = 3;
    ms.n_outputs = static_cast<int>(vars.size());
    ms.hidden = {10, 10};
    ms.seed = 50 + static_cast<std::uint64_t>(trial);
    Surrogate net(ms);
    net.calibrate(ts);
    PdeLoss loss(lib, ts, &net, 0.3 + 0.1 * trial, 1e-3);

    CoefficientState cs;
    for (int e = 0; e < loss.n_equations(); ++e) {
      cs.lambda.emplace_back();
      for (std::size_t p = 0; p < loss.equation_pinned()[e].size(); ++p)
        cs.lambda.back().push_back(rng::normal(kd, c++));
      cs.Lambda.emplace_back();
      for (int j = 0; j < loss.n_library(); ++j) {
        const double s = rng::uniform(kd, c++) < 0.5 ? -1.0 : 1.0;
        cs.Lambda.back().push_back(s * (0.5 + rng::uniform(kd, c++)));
      }
      cs.mask = loss.mask();
    }
    const Eigen::VectorXd x0 = loss.pack(cs);
    Eigen::VectorXd grad, dummy;
    loss.value_and_grad(x0, grad);

    const double h = 1e-6;
    for (int probe = 0; probe < 8; ++probe) {
      const int i = static_cast<int>(rng::uniform(kd, c++) * loss.n_params());
      Eigen::VectorXd xp = x0, xm = x0;
      xp[i] += h;
      xm[i] -= h;
      const double fd =
          (loss.value_and_grad(xp, dummy) - loss.value_and_grad(xm, dummy)) / (2 * h);
      worst_grad = std::max(worst_grad, std::abs(grad[i] - fd) / std::max(std::abs(fd), 1.0));
    }
  }
  v.req(worst_grad < 1e-5, "loss gradient vs finite differences below 1e-5 over 10 setups");
  v.print("criterion 2: jets and loss gradients verified against finite differences");
}

TEST_CASE("criterion 3: sparse regression oracle on seeded synthetic problems") {
  Verdict v;
  const int N = 200, M = 20, K = 4;

  const auto make_problem = [&](std::uint64_t seed, double noise, Eigen::MatrixXd& theta,
                                Eigen::VectorXd& y, Eigen::VectorXd& beta,
                                std::vector<int>& support) {
    theta.resize(N, M);
    const std::uint64_t k = rng::key(seed, 0);
    std::uint64_t c = 0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < M; ++j) theta(i, j) = rng::normal(k, c++);
    beta = Eigen::VectorXd::Zero(M);
    support.clear();
    const std::uint64_t ks = rng::key(seed, 1);
    std::set<int> chosen;
    std::uint64_t cc = 0;
    while (static_cast<int>(chosen.size()) < K)
      chosen.insert(static_cast<int>(rng::uniform(ks, cc++) * M));
    for (int j : chosen) {
      const double s = rng::uniform(ks, cc++) < 0.5 ? -1.0 : 1.0;
      beta[j] = s * (0.5 + 1.5 * rng::uniform(ks, cc++));
      support.push_back(j);
    }
    y = theta * beta;
    if (noise > 0.0) {
      const double ystd = std::sqrt(y.squaredNorm() / N);
      const std::uint64_t kn = rng::key(seed, 2);
      for (int i = 0; i < N; ++i) y[i] += noise * ystd * rng::normal(kn, i);
    }
  };

  int clean_exact = 0, noisy_exact = 0;
  double clean_worst = 0.0, noisy_worst = 0.0;
  for (int s = 0; s < 100; ++s) {
    Eigen::MatrixXd theta;
    Eigen::VectorXd y, beta;
    std::vector<int> support;

    make_problem(3000 + s, 0.0, theta, y, beta, support);
    SparseSolution sol = train_stridge(theta, y, {});
    if (sol.support == support) {
      ++clean_exact;
      clean_worst = std::max(clean_worst, (sol.coefficients - beta).lpNorm<Eigen::Infinity>());
    }

    make_problem(3000 + s, 0.01, theta, y, beta, support);
    sol = train_stridge(theta, y, {});
    if (sol.support == support) {
      ++noisy_exact;
      for (int j : support)
        noisy_worst = std::max(noisy_worst,
                               std::abs(sol.coefficients[j] - beta[j]) / std::abs(beta[j]));
    }
  }
  v.req(clean_exact == 100, "100/100 exact support on noiseless problems");
  v.req(clean_worst < 1e-8, "noiseless coefficients within 1e-8");
  v.req(noisy_exact >= 95, "at least 95/100 exact support at 1% noise");
  v.req(noisy_worst < 0.02, "noisy coefficients within 2%");
  v.print("criterion 3: sparse regression oracle (clean exact, 1% noise robust)");
}

TEST_CASE("criterion 4: advection-diffusion system recovered from clean data") {
  Verdict v;
  const FieldDataset ds = burgers_dataset(0.0);
  const DiscoveryRun run = run_burgers_discovery(ds, 50, true);
  check_burgers_run(v, run, 0.05);
  v.print("criterion 4: clean end-to-end recovery within 5%");
}

TEST_CASE("criterion 5: advection-diffusion system recovered at 50% noise") {
  Verdict v;
  const FieldDataset ds = burgers_dataset(0.5);
  const DiscoveryRun run = run_burgers_discovery(ds, 50, true);
  check_burgers_run(v, run, 0.15);
  v.print("criterion 5: 50% noise end-to-end recovery within 15%");
}

TEST_CASE("criterion 6: scalar wave equation recovered clean and at 50% noise") {
  Verdict v;
  check_kg_run(v, run_kg_discovery(0.0), 0.05);
  check_kg_run(v, run_kg_discovery(0.5), 0.15);
  v.print("criterion 6: scalar wave recovery (clean 5%, 50% noise 15%)");
}

TEST_CASE("criterion 7: coupled wave system from 300 points, 20 snapshots, 10% noise") {
  Verdict v;
  SolverConfig cfg;
  cfg.pde = PdeKind::CoupledKleinGordon;
  cfg.nx = cfg.ny = 64;
  cfg.t_end = 2.0;
  cfg.dt_output = 0.04;
  FieldDataset ds = downsample(generate(cfg), {2, 2});
  NoiseSpec n;
  n.level = 0.1;
  n.seed = 5;
  ds = add_noise(ds, n);

  SampleSpec sp;
  sp.n_snapshots = 20;
  sp.snapshot_range = 50;
  sp.n_spatial_points = 300;
  sp.seed = 6;
  const TrainingSet ts = sample_points(ds, sp);

  const auto vars = make_scalar_vars({"phi1", "phi2"});
  const Library lib = lorentz_filter(enumerate_candidates(vars, 2, 3, 2), vars);

  MlpSpec ms;
  ms.n_inputs = 3;
  ms.n_outputs = 2;
  ms.hidden = {40, 40, 40, 40};
  ms.seed = 0;
  Surrogate net(ms);
  net.calibrate(ts);

  DiscoveryConfig dc;
  dc.stages = desk_schedule(1500, 200);
  dc.seed = 0;
  const DiscoveryRun run = discover(lib, ts, &net, dc);

  for (const std::string self : {"phi1", "phi2"}) {
    const std::string other = self == "phi1" ? "phi2" : "phi1";
    const auto rhs = rhs_map(run.pde, self);
    const std::string cross = self == "phi1" ? "phi1*phi2^2" : "phi1^2*phi2";
    v.req(rhs.size() == 5, "five-term structure");
    v.req(within(rhs, self, 1.0, 0.15), "linear coefficient");
    v.req(within(rhs, self + "^3", -1.0, 0.15), "cubic coefficient");
    v.req(within(rhs, cross, -1.0, 0.15), "cross-coupling coefficient");
    v.req(within(rhs, self + "_xx", 0.1, 0.15), "xx coefficient");
    v.req(within(rhs, self + "_yy", 0.1, 0.15), "yy coefficient");
    (void)other;
  }
  v.print("criterion 7: coupled wave structure and coefficients within 15%");
}

TEST_CASE("criterion 8: decaying-vortex flow with pressure gradients") {
  Verdict v;
  SolverConfig cfg;
  cfg.pde = PdeKind::TaylorGreenNS;
  cfg.nx = cfg.ny = 64;
  cfg.t_end = 0.5;
  cfg.dt_output = 0.01;
  cfg.re = 5.0;
  cfg.drift_u = 0.6;  // boosted frame keeps the pressure column identifiable
  cfg.drift_v = -0.3;
  const FieldDataset ds = generate(cfg);

  const auto vars = make_velocity_vars(2, true);
  const Library lib = galilean_filter(enumerate_candidates(vars, 2, 3, 2), vars);

  BaselineConfig bc;
  bc.n_snapshots = 10;
  bc.snapshot_range = 40;
  const DiscoveryRun run = discover_baseline(lib, ds, bc);

  for (const std::string var : {"u", "v"}) {
    const auto rhs = rhs_map(run.pde, var);
    const std::string grad_p = var == "u" ? "p_x" : "p_y";
    v.req(rhs.size() == 5, "support is the pinned convection plus {grad p, xx, yy}");
    v.req(within(rhs, grad_p, -1.0, 0.05), "pressure gradient coefficient");
    v.req(within(rhs, var + "_xx", 0.2, 0.05), "xx viscosity at 1/Re");
    v.req(within(rhs, var + "_yy", 0.2, 0.05), "yy viscosity at 1/Re");
  }
  v.print("criterion 8: vortex flow momentum equation with pressure recovered");
}

TEST_CASE("criterion 9: pruning never hurts the held-out residual") {
  Verdict v;
  const FieldDataset ds = burgers_dataset(0.0);
  const DiscoveryRun pruned = run_burgers_discovery(ds, 40, true);
  const DiscoveryRun unpruned = run_burgers_discovery(ds, 40, false);

  const FieldDataset held = slice_frames(ds, 38, 51);
  const double r_pruned = equation_residual_rms(pruned.pde, held);
  const double r_unpruned = equation_residual_rms(unpruned.pde, held);
  v.req(r_pruned <= 1.05 * r_unpruned, "pruned residual within 5% of the unpruned one");

  int shared = 0;
  double worst = 0.0;
  for (const std::string var : {"u", "v"}) {
    const auto a = rhs_map(pruned.pde, var);
    const auto b = rhs_map(unpruned.pde, var);
    for (const auto& [term, ca] : a) {
      const auto it = b.find(term);
      if (it == b.end() || std::abs(it->second) < 0.01) continue;
      ++shared;
      worst = std::max(worst, std::abs(ca - it->second) / std::abs(it->second));
    }
  }
  v.req(shared >= 8, "the retained terms appear in both runs");
  v.req(worst <= 0.02, "shared coefficients agree within 2%");
  v.print("criterion 9: pruning ablation (residual and coefficient agreement)");
}

TEST_CASE("criterion 10: frame-change certification of every shipped library") {
  Verdict v;
  BoostSpec g;
  g.mode = LibraryMode::Galilean;
  g.velocity = {0.3, -0.2};
  BoostSpec l;
  l.mode = LibraryMode::Lorentz;
  l.velocity = {0.25, -0.1};

  const auto uv = make_velocity_vars(2);
  const auto uvp = make_velocity_vars(2, true);
  const auto phi = make_scalar_vars({"phi"});
  const auto phis = make_scalar_vars({"phi1", "phi2"});

  v.req(certify_invariance(galilean_filter(enumerate_candidates(uv, 2, 3, 2), uv), g).max_error <
            1e-8,
        "velocity library certified");
  v.req(certify_invariance(galilean_filter(enumerate_candidates(uvp, 2, 3, 2), uvp), g).max_error <
            1e-8,
        "velocity+pressure library certified");
  v.req(certify_invariance(lorentz_filter(enumerate_candidates(phi, 2, 3, 2), phi), l).max_error <
            1e-8,
        "scalar wave library certified");
  v.req(certify_invariance(lorentz_filter(enumerate_candidates(phis, 2, 3, 2), phis), l).max_error <
            1e-8,
        "coupled wave library certified");

  const double dev = term_invariance_error(string_to_term("u", uv, 2), uv, 2, g);
  v.req(dev >= 0.3 - 1e-6, "bare velocity control term deviates by the boost magnitude");
  v.print("criterion 10: invariance certified at 1e-8, control term rejected");
}
