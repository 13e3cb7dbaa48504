#include "icnet/discover.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "icnet/rng.hpp"
#include "icnet/optim.hpp"
#include "icnet/solvers.hpp"
#include "json.hpp"

namespace icnet {

std::vector<StageSpec> default_schedule() {
  return {{StageOpt::Adam, 2000, 1e-7, 2048},
          {StageOpt::Lbfgs, 400, 1e-7, 0},
          {StageOpt::Lbfgs, 400, 1e-6, 0}};
}

DiscoveredPde assemble_pde(const Library& lib, const std::vector<int>& eq_vars,
                           const std::vector<std::vector<int>>& eq_pinned,
                           const CoefficientState& cs, const std::string& provenance) {
  DiscoveredPde pde;
  pde.vars = lib.vars;
  pde.target = lib.target;
  pde.provenance = provenance;
  for (std::size_t e = 0; e < eq_vars.size(); ++e) {
    PdeEquation eq;
    eq.target_var = lib.vars[eq_vars[e]].name;
    for (std::size_t p = 0; p < eq_pinned[e].size(); ++p)
      eq.rhs.emplace_back(lib.pinned[eq_pinned[e][p]], -cs.lambda[e][p]);
    for (std::size_t j = 0; j < lib.terms.size(); ++j)
      if (cs.mask[e][j] && cs.Lambda[e][j] != 0.0) eq.rhs.emplace_back(lib.terms[j], cs.Lambda[e][j]);
    pde.equations.push_back(std::move(eq));
  }
  return pde;
}

namespace {

void project_masked(Eigen::VectorXd& x, AdamState* adam, const PdeLoss& loss) {
  const int ne = loss.n_equations();
  const int M = loss.n_library();
  int off = loss.n_params() - ne * M;
  for (int e = 0; e < ne; ++e)
    for (int j = 0; j < M; ++j, ++off)
      if (!loss.mask()[e][j]) {
        x[off] = 0.0;
        if (adam && adam->m.size() == x.size()) {
          adam->m[off] = 0.0;
          adam->v[off] = 0.0;
        }
      }
}

}  // namespace

DiscoveryRun discover(const Library& lib, const TrainingSet& ts, Surrogate* net,
                      const DiscoveryConfig& cfg) {
  DiscoveryConfig c = cfg;
  if (c.stages.empty()) c.stages = default_schedule();

  PdeLoss loss(lib, ts, net, c.alpha, c.stages[0].beta);
  const int ne = loss.n_equations();
  const int M = loss.n_library();

  CoefficientState cs;
  for (int e = 0; e < ne; ++e) {
    cs.lambda.emplace_back(loss.equation_pinned()[e].size(), 0.0);
    cs.Lambda.emplace_back(M, 0.0);
    cs.mask.emplace_back(M, 1);
  }
  Eigen::VectorXd x = loss.pack(cs);
  AdamState adam;

  std::ofstream trace;
  if (!c.trace_csv.empty()) {
    trace.open(c.trace_csv);
    trace << "round,stage,loss_total,loss_data,loss_physics,loss_l1,supports,changed\n";
  }

  DiscoveryRun run;
  const std::int64_t n = loss.n_points();

  const auto run_stage = [&](const StageSpec& st, int round) {
    loss.set_alpha(st.alpha >= 0 ? st.alpha : c.alpha);
    loss.set_beta(st.beta);
    Eigen::VectorXd g;
    if (st.opt == StageOpt::Adam) {
      const std::uint64_t k = rng::key(c.seed, 7000 + static_cast<std::uint64_t>(round));
      std::vector<std::int64_t> batch;
      for (int it = 0; it < st.iters; ++it) {
        if (st.batch > 0 && st.batch < n) {
          batch.resize(st.batch);
          for (int b = 0; b < st.batch; ++b)
            batch[b] = static_cast<std::int64_t>(
                rng::uniform(k, static_cast<std::uint64_t>(it) * st.batch + b) * n);
          loss.value_and_grad(x, g, &batch);
        } else {
          loss.value_and_grad(x, g);
        }
        adam.step(x, g);
        project_masked(x, &adam, loss);
      }
    } else {
      LbfgsConfig lc;
      lc.max_iters = st.iters;
      lbfgs_minimize([&](const Eigen::VectorXd& xx, Eigen::VectorXd& gg) {
        return loss.value_and_grad(xx, gg);
      }, x, lc);
      project_masked(x, &adam, loss);
    }
  };

  // shrink_mask=false still resets the coefficients to the regression
  // optimum but leaves every term trainable; used after data-only warmup
  // stages where the surrogate has not seen the physics residual yet
  const auto prune_once = [&](int round, int stage_idx, bool shrink_mask) -> bool {
    std::vector<Eigen::MatrixXd> theta, pin;
    std::vector<Eigen::VectorXd> y;
    loss.features(x, theta, y, &pin);

    CoefficientState cur = loss.unpack(x);
    auto mask = loss.mask();
    bool changed = false;
    std::vector<int> sizes;
    for (int e = 0; e < ne; ++e) {
      const int np = static_cast<int>(loss.equation_pinned()[e].size());
      std::vector<int> active;
      for (int j = 0; j < M; ++j)
        if (mask[e][j]) active.push_back(j);

      // regress the raw time derivative on [pinned | active library] with
      // the pinned columns protected; selecting the support against the
      // trained lambda instead would force the library to absorb any
      // pinned-coefficient error as spurious terms
      Eigen::VectorXd target = y[e];
      for (int p = 0; p < np; ++p) target -= cur.lambda[e][p] * pin[e].col(p);
      Eigen::MatrixXd joint(theta[e].rows(), np + static_cast<long>(active.size()));
      joint.leftCols(np) = pin[e];
      for (std::size_t j = 0; j < active.size(); ++j)
        joint.col(np + static_cast<long>(j)) = theta[e].col(active[j]);
      TrainStridgeConfig tc;
      tc.eta = c.eta;
      tc.lambda = c.ridge_lambda;
      tc.protected_cols.assign(np + active.size(), 0);
      for (int p = 0; p < np; ++p) tc.protected_cols[p] = 1;
      const SparseSolution sol = train_stridge(joint, target, tc);

      // reset the coefficients to the regression optimum: exact block
      // minimization of the physics residual at the current surrogate
      for (int p = 0; p < np; ++p) cur.lambda[e][p] = -sol.coefficients[p];
      std::vector<char> keep(active.size(), 0);
      for (int j : sol.support)
        if (j >= np) keep[j - np] = 1;
      for (std::size_t j = 0; j < active.size(); ++j) {
        cur.Lambda[e][active[j]] = keep[j] ? sol.coefficients[np + static_cast<long>(j)] : 0.0;
        if (!keep[j] && shrink_mask) {
          mask[e][active[j]] = 0;
          changed = true;
        }
      }
      int cnt = 0;
      for (int j = 0; j < M; ++j) cnt += mask[e][j];
      sizes.push_back(cnt);
    }
    loss.set_mask(mask);
    x = loss.pack(cur);
    project_masked(x, &adam, loss);

    Eigen::VectorXd g;
    LossParts parts;
    loss.value_and_grad(x, g, nullptr, &parts);
    PruneRecord rec;
    rec.round = round;
    rec.loss = parts;
    rec.support_sizes = sizes;
    rec.changed = changed;
    run.history.push_back(rec);
    if (trace.is_open()) {
      trace << round << ',' << stage_idx << ',' << parts.total << ',' << parts.data << ','
            << parts.physics << ',' << parts.l1 << ',';
      for (std::size_t i = 0; i < sizes.size(); ++i) trace << (i ? "|" : "") << sizes[i];
      trace << ',' << (changed ? 1 : 0) << "\n";
    }
    if (c.verbose) {
      std::cerr << "round " << round << " loss " << parts.total << " supports";
      for (int s : sizes) std::cerr << ' ' << s;
      std::cerr << (changed ? " (pruned)" : "") << "\n";
    }
    return changed;
  };

  int round = 0;
  int stable = 0;
  const auto stage_alpha = [&](const StageSpec& st) {
    return st.alpha >= 0 ? st.alpha : c.alpha;
  };
  for (std::size_t si = 0; si < c.stages.size(); ++si) {
    run_stage(c.stages[si], round);
    if (c.prune) {
      const bool shrink = stage_alpha(c.stages[si]) != 0.0;
      const bool changed = prune_once(round, static_cast<int>(si), shrink);
      if (shrink) stable = changed ? 0 : stable + 1;
    }
    ++round;
  }
  if (c.prune) {
    for (int extra = 0; extra < c.max_extra_rounds && stable < c.stable_needed; ++extra) {
      run_stage(c.stages.back(), round);
      const bool changed = prune_once(round, static_cast<int>(c.stages.size()) - 1,
                                      stage_alpha(c.stages.back()) != 0.0);
      stable = changed ? 0 : stable + 1;
      ++round;
    }
    run.support_stable = stable >= c.stable_needed;
  } else {
    run.support_stable = true;
  }

  // joint unregularized refit of the surviving support for the reported PDE
  {
    std::vector<Eigen::MatrixXd> theta, pin;
    std::vector<Eigen::VectorXd> y;
    loss.features(x, theta, y, &pin);
    CoefficientState fin = loss.unpack(x);
    for (int e = 0; e < ne; ++e) {
      const int np = static_cast<int>(loss.equation_pinned()[e].size());
      std::vector<int> active;
      for (int j = 0; j < M; ++j)
        if (fin.mask[e][j]) active.push_back(j);
      Eigen::VectorXd target = y[e];
      for (int p = 0; p < np; ++p) target -= fin.lambda[e][p] * pin[e].col(p);
      Eigen::MatrixXd joint(theta[e].rows(), np + static_cast<long>(active.size()));
      joint.leftCols(np) = pin[e];
      for (std::size_t j = 0; j < active.size(); ++j)
        joint.col(np + static_cast<long>(j)) = theta[e].col(active[j]);
      auto cod = joint.completeOrthogonalDecomposition();
      cod.setThreshold(1e-10);  // match the sparse-regression refit
      const Eigen::VectorXd w = cod.solve(target);
      for (int p = 0; p < np; ++p) fin.lambda[e][p] = -w[p];
      std::fill(fin.Lambda[e].begin(), fin.Lambda[e].end(), 0.0);
      for (std::size_t j = 0; j < active.size(); ++j)
        fin.Lambda[e][active[j]] = w[np + static_cast<long>(j)];
    }
    run.coefficients = fin;
  }

  Eigen::VectorXd g;
  loss.value_and_grad(x, g, nullptr, &run.final_loss);

  nlohmann::json prov{{"method", "surrogate"},
                      {"seed", c.seed},
                      {"alpha", c.alpha},
                      {"rounds", round},
                      {"support_stable", run.support_stable},
                      {"final_loss", {{"data", run.final_loss.data},
                                      {"physics", run.final_loss.physics},
                                      {"l1", run.final_loss.l1}}}};
  run.pde = assemble_pde(lib, loss.equation_vars(), loss.equation_pinned(), run.coefficients,
                         prov.dump());
  run.pde.spatial_dim = ts.dim;
  return run;
}

namespace {

/// 1D periodic Savitzky-Golay style derivative weights: least-squares
/// polynomial fit over a centred window.
std::vector<double> poly_weights(int halfwidth, int degree, int order, double spacing) {
  const int w = 2 * halfwidth + 1;
  Eigen::MatrixXd a(w, degree + 1);
  for (int i = 0; i < w; ++i) {
    double p = 1.0;
    for (int j = 0; j <= degree; ++j) {
      a(i, j) = p;
      p *= (i - halfwidth) * spacing;
    }
  }
  const Eigen::MatrixXd pinv = (a.transpose() * a).ldlt().solve(a.transpose());
  double fact = 1.0;
  for (int r = 2; r <= order; ++r) fact *= r;
  std::vector<double> out(w);
  for (int i = 0; i < w; ++i) out[i] = fact * pinv(order, i);
  return out;
}

void apply_axis(const std::vector<double>& in, std::vector<double>& out, int nx, int ny, int axis,
                const std::vector<double>& wts) {
  const int h = (static_cast<int>(wts.size()) - 1) / 2;
  for (int i = 0; i < nx; ++i)
    for (int j = 0; j < ny; ++j) {
      double acc = 0.0;
      for (int k = -h; k <= h; ++k) {
        int ii = i, jj = j;
        if (axis == 0)
          ii = ((i + k) % nx + nx) % nx;
        else
          jj = ((j + k) % ny + ny) % ny;
        acc += wts[k + h] * in[static_cast<std::size_t>(ii) * ny + jj];
      }
      out[static_cast<std::size_t>(i) * ny + j] = acc;
    }
}

void polynomial_spatial_jets(const FieldDataset& ds, int it, const BaselineConfig& cfg,
                             std::vector<PointJet>& jets) {
  const int nx = ds.grid.shape[0], ny = ds.grid.shape[1];
  const std::int64_t frame = ds.frame_size();
  const auto w1x = poly_weights(cfg.poly_halfwidth, cfg.poly_degree, 1, ds.grid.spacing(0));
  const auto w2x = poly_weights(cfg.poly_halfwidth, cfg.poly_degree, 2, ds.grid.spacing(0));
  const auto w1y = poly_weights(cfg.poly_halfwidth, cfg.poly_degree, 1, ds.grid.spacing(1));
  const auto w2y = poly_weights(cfg.poly_halfwidth, cfg.poly_degree, 2, ds.grid.spacing(1));
  std::vector<double> f(frame), d(frame), dd(frame);
  for (std::size_t v = 0; v < ds.var_names.size(); ++v) {
    const double* src = ds.data.at(ds.var_names[v]).data() + static_cast<std::size_t>(it) * frame;
    std::copy(src, src + frame, f.begin());
    const auto store = [&](int a, int b, const std::vector<double>& vals) {
      for (std::int64_t q = 0; q < frame; ++q) {
        if (a == b && a > 0)
          jets[q].d2(static_cast<int>(v), a, b) = vals[q];
        else if (b == 0)
          jets[q].d1(static_cast<int>(v), a) = vals[q];
        else
          jets[q].d2(static_cast<int>(v), a, b) = vals[q];
      }
    };
    apply_axis(f, d, nx, ny, 0, w1x);
    store(1, 0, d);
    apply_axis(f, dd, nx, ny, 0, w2x);
    store(1, 1, dd);
    apply_axis(f, dd, nx, ny, 1, w1y);
    store(2, 0, dd);
    apply_axis(d, dd, nx, ny, 1, w1y);  // d/dy of d/dx
    store(1, 2, dd);
    apply_axis(f, dd, nx, ny, 1, w2y);
    store(2, 2, dd);
  }
}

}  // namespace

DiscoveryRun discover_baseline(const Library& lib, const FieldDataset& ds,
                               const BaselineConfig& cfg) {
  if (ds.grid.dim() != 2) throw std::invalid_argument("discover_baseline: 2D grids only");
  for (std::size_t v = 0; v < lib.vars.size(); ++v)
    if (v >= ds.var_names.size() || lib.vars[v].name != ds.var_names[v])
      throw std::invalid_argument("discover_baseline: library vars do not match the dataset");

  const std::vector<int> eq_vars = equation_var_indices(lib);
  const std::vector<std::vector<int>> eq_pinned = pinned_for_equations(lib);
  const int time_order = lib.target == TargetKind::SecondTimeDerivative ? 2 : 1;

  int range = cfg.snapshot_range > 0 ? std::min(cfg.snapshot_range, ds.nt) : ds.nt;
  std::vector<int> snaps;
  if (cfg.n_snapshots > 0 && cfg.n_snapshots < range) {
    // even coverage of the requested range, deterministic
    for (int k = 0; k < cfg.n_snapshots; ++k)
      snaps.push_back(static_cast<int>(std::llround(static_cast<double>(k) * (range - 1) /
                                                    std::max(1, cfg.n_snapshots - 1))));
  } else {
    for (int k = 0; k < range; ++k) snaps.push_back(k);
  }

  const std::int64_t frame = ds.frame_size();
  const std::int64_t rows = static_cast<std::int64_t>(snaps.size()) * frame;
  const int M = static_cast<int>(lib.terms.size());

  DiscoveryRun run;
  CoefficientState cs;
  nlohmann::json prov{{"method", "baseline"},
                      {"derivatives", cfg.derivs == BaselineDerivs::Spectral ? "spectral" : "polynomial"},
                      {"snapshots", snaps.size()}};

  for (std::size_t e = 0; e < eq_vars.size(); ++e) {
    const int np = static_cast<int>(eq_pinned[e].size());
    Eigen::MatrixXd theta(rows, np + M);
    Eigen::VectorXd y(rows);
    std::int64_t r = 0;
    for (int it : snaps) {
      std::vector<PointJet> jets = grid_jets(ds, it, time_order);
      if (cfg.derivs == BaselineDerivs::Polynomial) polynomial_spatial_jets(ds, it, cfg, jets);
      const int ve = eq_vars[e];
      for (std::int64_t q = 0; q < frame; ++q, ++r) {
        const PointJet& j = jets[q];
        y[r] = time_order == 2 ? j.d2(ve, 0, 0) : j.d1(ve, 0);
        for (int p = 0; p < np; ++p) theta(r, p) = evaluate_term(lib.pinned[eq_pinned[e][p]], j);
        for (int t = 0; t < M; ++t) theta(r, np + t) = evaluate_term(lib.terms[t], j);
      }
    }

    TrainStridgeConfig tc;
    tc.eta = cfg.eta;
    tc.lambda = cfg.ridge_lambda;
    tc.protected_cols.assign(np + M, 0);
    for (int p = 0; p < np; ++p) tc.protected_cols[p] = 1;
    const SparseSolution sol = train_stridge(theta, y, tc);

    // regression solves y_t = sum c_k col_k directly, so the pinned
    // coefficient convention (lambda on the left) flips sign
    cs.lambda.emplace_back(np, 0.0);
    cs.Lambda.emplace_back(M, 0.0);
    cs.mask.emplace_back(M, 0);
    for (int p = 0; p < np; ++p) cs.lambda.back()[p] = -sol.coefficients[p];
    for (int t = 0; t < M; ++t) {
      cs.Lambda.back()[t] = sol.coefficients[np + t];
      if (cs.Lambda.back()[t] != 0.0) cs.mask.back()[t] = 1;
    }
  }

  run.coefficients = cs;
  run.support_stable = true;
  run.pde = assemble_pde(lib, eq_vars, eq_pinned, cs, prov.dump());
  run.pde.spatial_dim = 2;
  return run;
}

void save_checkpoint(const std::string& dir, const Surrogate& net, const CoefficientState& cs) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["spec"] = {{"n_inputs", net.spec().n_inputs},
               {"n_outputs", net.spec().n_outputs},
               {"hidden", net.spec().hidden},
               {"seed", net.spec().seed}};
  j["input_scale"] = net.input_scale();
  j["input_shift"] = net.input_shift();
  j["output_means"] = net.output_means();
  j["output_stds"] = net.output_stds();
  j["lambda"] = cs.lambda;
  j["Lambda"] = cs.Lambda;
  std::vector<std::vector<int>> mask;
  for (const auto& m : cs.mask) mask.emplace_back(m.begin(), m.end());
  j["mask"] = mask;
  std::ofstream meta(dir + "/checkpoint.json");
  if (!meta) throw std::runtime_error("save_checkpoint: cannot write to " + dir);
  meta << j.dump(2) << "\n";

  const Eigen::VectorXd p = net.get_params();
  std::ofstream blob(dir + "/params.f64", std::ios::binary);
  blob.write(reinterpret_cast<const char*>(p.data()),
             static_cast<std::streamsize>(sizeof(double) * p.size()));
}

CoefficientState load_checkpoint(const std::string& dir, Surrogate* net) {
  std::ifstream meta(dir + "/checkpoint.json");
  if (!meta) throw std::runtime_error("load_checkpoint: missing " + dir + "/checkpoint.json");
  nlohmann::json j;
  meta >> j;
  const auto spec = j.at("spec");
  if (spec.at("n_inputs").get<int>() != net->spec().n_inputs ||
      spec.at("n_outputs").get<int>() != net->spec().n_outputs ||
      spec.at("hidden").get<std::vector<int>>() != net->spec().hidden)
    throw std::runtime_error("load_checkpoint: surrogate spec mismatch");

  const auto shift = j.at("input_shift").get<std::vector<double>>();
  const auto scale = j.at("input_scale").get<std::vector<double>>();
  std::vector<double> mins(shift.size()), maxs(shift.size());
  for (std::size_t i = 0; i < shift.size(); ++i) {
    mins[i] = shift[i] - 1.0 / scale[i];
    maxs[i] = shift[i] + 1.0 / scale[i];
  }
  net->set_input_box(mins, maxs);
  net->set_output_affine(j.at("output_means").get<std::vector<double>>(),
                         j.at("output_stds").get<std::vector<double>>());

  std::ifstream blob(dir + "/params.f64", std::ios::binary);
  if (!blob) throw std::runtime_error("load_checkpoint: missing " + dir + "/params.f64");
  Eigen::VectorXd p(net->n_params());
  blob.read(reinterpret_cast<char*>(p.data()),
            static_cast<std::streamsize>(sizeof(double) * p.size()));
  if (blob.gcount() != static_cast<std::streamsize>(sizeof(double) * p.size()))
    throw std::runtime_error("load_checkpoint: parameter blob size mismatch");
  net->set_params(p);

  CoefficientState cs;
  cs.lambda = j.at("lambda").get<std::vector<std::vector<double>>>();
  cs.Lambda = j.at("Lambda").get<std::vector<std::vector<double>>>();
  for (const auto& m : j.at("mask").get<std::vector<std::vector<int>>>())
    cs.mask.emplace_back(m.begin(), m.end());
  return cs;
}

}  // namespace icnet
