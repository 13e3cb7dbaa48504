#include "icnet/solvers.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "icnet/spectral.hpp"
#include "json.hpp"

namespace icnet {

namespace {

using Fields = std::vector<std::vector<double>>;

constexpr double kPi = 3.14159265358979323846;

/// dt_stable caps the internal step at the stiffest explicit term's
/// stability limit (resolution dependent); 0.002 covers the advective CFL
/// of every shipped configuration at desk resolutions.
int auto_substeps(double dt_output, int requested, double dt_stable = 0.002) {
  if (requested > 0) return requested;
  const double cap = std::min(0.002, dt_stable);
  return std::max(1, static_cast<int>(std::ceil(dt_output / cap)));
}

void check_finite(const Fields& state, double t) {
  for (const auto& f : state)
    for (double v : f)
      if (!std::isfinite(v) || std::abs(v) > 1e6) {
        std::ostringstream os;
        os << "solver blow-up detected at t=" << t << " (|value| > 1e6 or non-finite)";
        throw SolverError(os.str());
      }
}

/// Classic RK4 with fixed step; rhs(state, out) must not alias.
void rk4_march(Fields& state, double dt,
               const std::function<void(const Fields&, Fields&)>& rhs) {
  const std::size_t nf = state.size(), n = state[0].size();
  Fields k1 = state, k2 = state, k3 = state, k4 = state, tmp = state;
  rhs(state, k1);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < n; ++i) tmp[f][i] = state[f][i] + 0.5 * dt * k1[f][i];
  rhs(tmp, k2);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < n; ++i) tmp[f][i] = state[f][i] + 0.5 * dt * k2[f][i];
  rhs(tmp, k3);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < n; ++i) tmp[f][i] = state[f][i] + dt * k3[f][i];
  rhs(tmp, k4);
  for (std::size_t f = 0; f < nf; ++f)
    for (std::size_t i = 0; i < n; ++i)
      state[f][i] += dt / 6.0 * (k1[f][i] + 2.0 * k2[f][i] + 2.0 * k3[f][i] + k4[f][i]);
}

FieldDataset run_solver(const SolverConfig& cfg, const std::vector<std::string>& names,
                        Fields state, const std::vector<int>& output_fields,
                        const std::function<void(const Fields&, Fields&)>& rhs,
                        const std::string& provenance, double dt_stable = 0.002) {
  FieldDataset ds;
  ds.grid = make_grid2d(cfg.nx, cfg.ny, cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax);
  ds.t0 = 0.0;
  ds.dt = cfg.dt_output;
  ds.nt = static_cast<int>(std::round(cfg.t_end / cfg.dt_output)) + 1;
  ds.var_names = names;
  ds.provenance = provenance;
  const std::int64_t frame = ds.frame_size();
  for (const auto& n : names) ds.data[n].resize(static_cast<std::size_t>(ds.nt) * frame);

  const int substeps = auto_substeps(cfg.dt_output, cfg.substeps);
  const double dt = cfg.dt_output / substeps;
  for (int it = 0; it < ds.nt; ++it) {
    check_finite(state, ds.time(it));
    for (std::size_t v = 0; v < names.size(); ++v)
      std::copy(state[output_fields[v]].begin(), state[output_fields[v]].end(),
                ds.data[names[v]].begin() + static_cast<std::size_t>(it) * frame);
    if (it + 1 < ds.nt)
      for (int s = 0; s < substeps; ++s) rk4_march(state, dt, rhs);
  }
  return ds;
}

double sech(double x) { return 1.0 / std::cosh(x); }

}  // namespace

FieldDataset solve_burgers2d(const SolverConfig& cfg) {
  const Grid g = make_grid2d(cfg.nx, cfg.ny, cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax);
  Spectral2D sp(cfg.nx, cfg.ny, cfg.xmax - cfg.xmin, cfg.ymax - cfg.ymin);
  const std::int64_t frame = g.points();

  Fields state(2, std::vector<double>(frame));
  for (int i = 0; i < cfg.nx; ++i)
    for (int j = 0; j < cfg.ny; ++j) {
      const double x = g.coord(0, i), y = g.coord(1, j);
      state[0][i * cfg.ny + j] =
          cfg.ic_a1 + cfg.ic_b1 * sech(cfg.ic_c1 * ((x + cfg.ic_d1) * (x + cfg.ic_d1) +
                                                    (y + cfg.ic_d1) * (y + cfg.ic_d1)));
      state[1][i * cfg.ny + j] =
          cfg.ic_a1 - cfg.ic_b1 * sech(cfg.ic_c1 * ((x - cfg.ic_d1) * (x - cfg.ic_d1) +
                                                    (y - cfg.ic_d1) * (y - cfg.ic_d1)));
    }

  std::vector<double> ux(frame), uy(frame), lu(frame), tmp(frame);
  auto rhs = [&](const Fields& s, Fields& out) {
    for (int f = 0; f < 2; ++f) {
      sp.derivatives(s[f].data(), {{1, 0}, {0, 1}, {2, 0}, {0, 2}},
                     {ux.data(), uy.data(), lu.data(), tmp.data()});
      for (std::int64_t i = 0; i < frame; ++i)
        out[f][i] = -(s[0][i] * ux[i] + s[1][i] * uy[i]) + cfg.nu * (lu[i] + tmp[i]);
      sp.dealias(out[f].data(), out[f].data());
    }
  };

  // explicit diffusion: RK4 needs nu * |k|^2_max * dt below ~2.8
  const double kxn = kPi * cfg.nx / (cfg.xmax - cfg.xmin);
  const double kyn = kPi * cfg.ny / (cfg.ymax - cfg.ymin);
  const double dt_stable = cfg.nu > 0 ? 2.5 / (cfg.nu * (kxn * kxn + kyn * kyn)) : 0.002;

  nlohmann::json prov{{"solver", "burgers2d"},
                      {"nu", cfg.nu},
                      {"ic", {cfg.ic_a1, cfg.ic_b1, cfg.ic_c1, cfg.ic_d1}},
                      {"substeps", auto_substeps(cfg.dt_output, cfg.substeps, dt_stable)}};
  return run_solver(cfg, {"u", "v"}, std::move(state), {0, 1}, rhs, prov.dump(), dt_stable);
}

FieldDataset solve_klein_gordon(const SolverConfig& cfg) {
  const Grid g = make_grid2d(cfg.nx, cfg.ny, cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax);
  Spectral2D sp(cfg.nx, cfg.ny, cfg.xmax - cfg.xmin, cfg.ymax - cfg.ymin);
  const std::int64_t frame = g.points();

  Fields state(2, std::vector<double>(frame, 0.0));  // phi, phi_t
  for (int i = 0; i < cfg.nx; ++i)
    for (int j = 0; j < cfg.ny; ++j) {
      const double x = g.coord(0, i), y = g.coord(1, j);
      state[0][i * cfg.ny + j] = cfg.ic_a2 * std::exp(-cfg.ic_b2 * ((x - cfg.ic_x0) * (x - cfg.ic_x0) +
                                                                    (y - cfg.ic_y0) * (y - cfg.ic_y0)));
    }

  std::vector<double> lap(frame);
  auto rhs = [&](const Fields& s, Fields& out) {
    sp.laplacian(s[0].data(), lap.data());
    for (std::int64_t i = 0; i < frame; ++i) {
      out[0][i] = s[1][i];
      out[1][i] = cfg.kg_a1 * s[0][i] + cfg.kg_b1 * s[0][i] * s[0][i] * s[0][i] + cfg.kg_d1 * lap[i];
    }
    sp.dealias(out[1].data(), out[1].data());
  };

  nlohmann::json prov{{"solver", "klein_gordon"},
                      {"a1", cfg.kg_a1},
                      {"b1", cfg.kg_b1},
                      {"d1", cfg.kg_d1},
                      {"ic", {cfg.ic_a2, cfg.ic_b2, cfg.ic_x0, cfg.ic_y0}},
                      {"substeps", auto_substeps(cfg.dt_output, cfg.substeps)}};
  return run_solver(cfg, {"phi"}, std::move(state), {0}, rhs, prov.dump());
}

FieldDataset solve_coupled_kg(const SolverConfig& cfg) {
  const Grid g = make_grid2d(cfg.nx, cfg.ny, cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax);
  Spectral2D sp(cfg.nx, cfg.ny, cfg.xmax - cfg.xmin, cfg.ymax - cfg.ymin);
  const std::int64_t frame = g.points();

  Fields state(4, std::vector<double>(frame, 0.0));  // phi1, phi2, phi1_t, phi2_t
  const double A = cfg.ic_a3, B = cfg.ic_b3, x0 = cfg.ic_x0c, y0 = cfg.ic_y0c;
  const auto bump = [&](double x, double y) { return std::exp(-B * (x * x + y * y)); };
  for (int i = 0; i < cfg.nx; ++i)
    for (int j = 0; j < cfg.ny; ++j) {
      const double x = g.coord(0, i), y = g.coord(1, j);
      state[0][i * cfg.ny + j] = A * bump(x - x0, y + y0) - A * bump(x + x0, y - y0);
      state[1][i * cfg.ny + j] = A * bump(x - x0, y - y0) - A * bump(x + x0, y + y0);
    }

  std::vector<double> lap(frame);
  auto rhs = [&](const Fields& s, Fields& out) {
    for (int f = 0; f < 2; ++f) {
      sp.laplacian(s[f].data(), lap.data());
      for (std::int64_t i = 0; i < frame; ++i) {
        const double sq = s[0][i] * s[0][i] + s[1][i] * s[1][i];
        out[f][i] = s[2 + f][i];
        out[2 + f][i] = cfg.kg_a2 * s[f][i] + cfg.kg_b2 * sq * s[f][i] + cfg.kg_c2 * lap[i];
      }
      sp.dealias(out[2 + f].data(), out[2 + f].data());
    }
  };

  nlohmann::json prov{{"solver", "coupled_kg"},
                      {"a2", cfg.kg_a2},
                      {"b2", cfg.kg_b2},
                      {"c2", cfg.kg_c2},
                      {"ic", {A, B, x0, y0}},
                      {"substeps", auto_substeps(cfg.dt_output, cfg.substeps)}};
  return run_solver(cfg, {"phi1", "phi2"}, std::move(state), {0, 1}, rhs, prov.dump());
}

FieldDataset taylor_green_ns(const SolverConfig& cfg) {
  FieldDataset ds;
  ds.grid = make_grid2d(cfg.nx, cfg.ny, cfg.xmin, cfg.xmax, cfg.ymin, cfg.ymax);
  ds.t0 = 0.0;
  ds.dt = cfg.dt_output;
  ds.nt = static_cast<int>(std::round(cfg.t_end / cfg.dt_output)) + 1;
  ds.var_names = {"u", "v", "p"};
  if (cfg.re <= 0.0) throw std::invalid_argument("taylor_green_ns: Re must be positive");
  const std::int64_t frame = ds.frame_size();
  for (const auto& n : ds.var_names) ds.data[n].resize(static_cast<std::size_t>(ds.nt) * frame);

  const double U = cfg.drift_u, V = cfg.drift_v;
  for (int it = 0; it < ds.nt; ++it) {
    const double t = ds.time(it);
    const double E = std::exp(-2.0 * t / cfg.re);
    for (int i = 0; i < cfg.nx; ++i)
      for (int j = 0; j < cfg.ny; ++j) {
        // a uniformly translating Taylor-Green vortex is still an exact
        // Navier-Stokes solution; drift defaults to zero
        const double x = ds.grid.coord(0, i) - U * t, y = ds.grid.coord(1, j) - V * t;
        const std::int64_t q = static_cast<std::int64_t>(it) * frame + i * cfg.ny + j;
        ds.data["u"][q] = U - std::cos(x) * std::sin(y) * E;
        ds.data["v"][q] = V + std::sin(x) * std::cos(y) * E;
        ds.data["p"][q] = -(std::cos(2.0 * x) + std::cos(2.0 * y)) * E * E / 4.0;
      }
  }
  nlohmann::json prov{{"solver", "taylor_green_ns"}, {"re", cfg.re}, {"drift", {U, V}}};
  ds.provenance = prov.dump();
  return ds;
}

FieldDataset generate(const SolverConfig& cfg) {
  switch (cfg.pde) {
    case PdeKind::Burgers2D: return solve_burgers2d(cfg);
    case PdeKind::KleinGordon: return solve_klein_gordon(cfg);
    case PdeKind::CoupledKleinGordon: return solve_coupled_kg(cfg);
    case PdeKind::TaylorGreenNS: return taylor_green_ns(cfg);
  }
  throw std::invalid_argument("unknown pde kind");
}

namespace {

/// Time derivative of one variable at snapshot `it` by finite differences,
/// 4th order central in the interior.
std::vector<double> time_fd(const FieldDataset& ds, const std::string& var, int it, int order) {
  const std::int64_t frame = ds.frame_size();
  std::vector<double> out(frame, 0.0);
  const auto f = [&](int k) { return ds.data.at(var).begin() + static_cast<std::size_t>(k) * frame; };
  const double h = ds.dt;
  const auto acc = [&](std::initializer_list<std::pair<int, double>> stencil, double scale) {
    for (const auto& [off, w] : stencil) {
      auto src = f(it + off);
      for (std::int64_t i = 0; i < frame; ++i) out[i] += w * src[i] * scale;
    }
  };
  if (order == 1) {
    if (it >= 2 && it + 2 < ds.nt)
      acc({{-2, 1.0 / 12}, {-1, -8.0 / 12}, {1, 8.0 / 12}, {2, -1.0 / 12}}, 1.0 / h);
    else if (it >= 1 && it + 1 < ds.nt)
      acc({{-1, -0.5}, {1, 0.5}}, 1.0 / h);
    else if (it == 0)
      acc({{0, -1.5}, {1, 2.0}, {2, -0.5}}, 1.0 / h);
    else
      acc({{0, 1.5}, {-1, -2.0}, {-2, 0.5}}, 1.0 / h);
  } else if (order == 2) {
    if (it >= 2 && it + 2 < ds.nt)
      acc({{-2, -1.0 / 12}, {-1, 16.0 / 12}, {0, -30.0 / 12}, {1, 16.0 / 12}, {2, -1.0 / 12}},
          1.0 / (h * h));
    else if (it >= 1 && it + 1 < ds.nt)
      acc({{-1, 1.0}, {0, -2.0}, {1, 1.0}}, 1.0 / (h * h));
    else if (it == 0)
      acc({{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}, 1.0 / (h * h));
    else
      acc({{0, 2.0}, {-1, -5.0}, {-2, 4.0}, {-3, -1.0}}, 1.0 / (h * h));
  } else {
    throw std::invalid_argument("time_fd: order must be 1 or 2");
  }
  return out;
}

}  // namespace

std::vector<PointJet> grid_jets(const FieldDataset& ds, int it, int time_order) {
  if (ds.grid.dim() != 2) throw std::invalid_argument("grid_jets: 2D grids only");
  const int nx = ds.grid.shape[0], ny = ds.grid.shape[1];
  Spectral2D sp(nx, ny, ds.grid.maxs[0] - ds.grid.mins[0], ds.grid.maxs[1] - ds.grid.mins[1]);
  const std::int64_t frame = ds.frame_size();
  const int nv = static_cast<int>(ds.var_names.size());

  std::vector<PointJet> jets(frame, PointJet(2, nv));
  std::vector<std::vector<double>> d(5, std::vector<double>(frame));
  for (int v = 0; v < nv; ++v) {
    const double* f = ds.data.at(ds.var_names[v]).data() + static_cast<std::size_t>(it) * frame;
    sp.derivatives(f, {{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}},
                   {d[0].data(), d[1].data(), d[2].data(), d[3].data(), d[4].data()});
    std::vector<double> dt1, dt2;
    if (time_order >= 1) dt1 = time_fd(ds, ds.var_names[v], it, 1);
    if (time_order >= 2) dt2 = time_fd(ds, ds.var_names[v], it, 2);
    for (std::int64_t q = 0; q < frame; ++q) {
      PointJet& j = jets[q];
      j.value(v) = f[q];
      j.d1(v, 1) = d[0][q];
      j.d1(v, 2) = d[1][q];
      j.d2(v, 1, 1) = d[2][q];
      j.d2(v, 1, 2) = d[3][q];
      j.d2(v, 2, 2) = d[4][q];
      if (time_order >= 1) j.d1(v, 0) = dt1[q];
      if (time_order >= 2) j.d2(v, 0, 0) = dt2[q];
    }
  }
  return jets;
}

FieldDataset simulate_discovered(const DiscoveredPde& pde, const FieldDataset& ic, int it0,
                                 const SimulateConfig& cfg) {
  if (ic.grid.dim() != 2) throw std::invalid_argument("simulate_discovered: 2D grids only");
  const int nx = ic.grid.shape[0], ny = ic.grid.shape[1];
  Spectral2D sp(nx, ny, ic.grid.maxs[0] - ic.grid.mins[0], ic.grid.maxs[1] - ic.grid.mins[1]);
  const std::int64_t frame = ic.frame_size();
  const int nv = static_cast<int>(ic.var_names.size());

  std::vector<const PdeEquation*> eqs;
  for (const auto& name : ic.var_names) {
    const PdeEquation* e = pde.equation_for(name);
    if (!e) throw std::invalid_argument("simulate_discovered: no equation for variable " + name);
    eqs.push_back(e);
  }
  const bool second_order = pde.target == TargetKind::SecondTimeDerivative;

  Fields state;
  for (int v = 0; v < nv; ++v) {
    const double* f = ic.data.at(ic.var_names[v]).data() + static_cast<std::size_t>(it0) * frame;
    state.emplace_back(f, f + frame);
  }
  if (second_order) {
    for (int v = 0; v < nv; ++v) {
      if (ic.nt >= 4)
        state.push_back(time_fd(ic, ic.var_names[v], it0, 1));
      else
        state.emplace_back(frame, 0.0);
    }
  }

  std::vector<std::vector<double>> d(5, std::vector<double>(frame));
  std::vector<PointJet> jets(frame, PointJet(2, nv));
  auto rhs = [&](const Fields& s, Fields& out) {
    for (int v = 0; v < nv; ++v) {
      sp.derivatives(s[v].data(), {{1, 0}, {0, 1}, {2, 0}, {1, 1}, {0, 2}},
                     {d[0].data(), d[1].data(), d[2].data(), d[3].data(), d[4].data()});
      for (std::int64_t q = 0; q < frame; ++q) {
        PointJet& j = jets[q];
        j.value(v) = s[v][q];
        j.d1(v, 1) = d[0][q];
        j.d1(v, 2) = d[1][q];
        j.d2(v, 1, 1) = d[2][q];
        j.d2(v, 1, 2) = d[3][q];
        j.d2(v, 2, 2) = d[4][q];
      }
    }
    for (int v = 0; v < nv; ++v) {
      auto& target = second_order ? out[nv + v] : out[v];
      for (std::int64_t q = 0; q < frame; ++q) {
        double acc = 0.0;
        for (const auto& [term, coef] : eqs[v]->rhs) acc += coef * evaluate_term(term, jets[q]);
        target[q] = acc;
      }
      sp.dealias(target.data(), target.data());
      if (second_order)
        for (std::int64_t q = 0; q < frame; ++q) out[v][q] = s[nv + v][q];
    }
  };

  FieldDataset ds;
  ds.grid = ic.grid;
  ds.t0 = ic.time(it0);
  ds.dt = cfg.dt_output;
  ds.nt = static_cast<int>(std::round(cfg.t_end / cfg.dt_output)) + 1;
  ds.var_names = ic.var_names;
  nlohmann::json prov{{"solver", "simulate_discovered"}, {"it0", it0}};
  ds.provenance = prov.dump();
  for (const auto& n : ds.var_names) ds.data[n].resize(static_cast<std::size_t>(ds.nt) * frame);

  const int substeps = auto_substeps(cfg.dt_output, cfg.substeps);
  const double dt = cfg.dt_output / substeps;
  for (int it = 0; it < ds.nt; ++it) {
    check_finite(state, ds.time(it));
    for (int v = 0; v < nv; ++v)
      std::copy(state[v].begin(), state[v].end(),
                ds.data[ds.var_names[v]].begin() + static_cast<std::size_t>(it) * frame);
    if (it + 1 < ds.nt)
      for (int s = 0; s < substeps; ++s) rk4_march(state, dt, rhs);
  }
  return ds;
}

}  // namespace icnet
