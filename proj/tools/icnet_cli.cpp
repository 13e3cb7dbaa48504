#include <filesystem>
#include <set>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "icnet/dataset.hpp"
#include "icnet/discover.hpp"
#include "icnet/evaluate.hpp"
#include "icnet/mlp.hpp"
#include "icnet/solvers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_run_json(const std::string& dir, const std::string& command, const json& config) {
  json j{{"command", command}, {"config", config}};
  std::ofstream out(dir + "/run.json");
  out << j.dump(2) << "\n";
}

std::vector<icnet::FieldVar> preset_vars(const std::string& preset) {
  using icnet::VarKind;
  std::vector<std::pair<std::string, VarKind>> def;
  if (preset == "burgers")
    def = {{"u", VarKind::Velocity}, {"v", VarKind::Velocity}};
  else if (preset == "kg")
    def = {{"phi", VarKind::Scalar}};
  else if (preset == "coupled-kg")
    def = {{"phi1", VarKind::Scalar}, {"phi2", VarKind::Scalar}};
  else if (preset == "ns-taylor-green")
    def = {{"u", VarKind::Velocity}, {"v", VarKind::Velocity}, {"p", VarKind::Pressure}};
  else
    throw std::invalid_argument("unknown preset " + preset);
  std::vector<icnet::FieldVar> vars;
  for (std::size_t i = 0; i < def.size(); ++i)
    vars.push_back({static_cast<int>(i), def[i].first, def[i].second});
  return vars;
}

icnet::Library preset_library(const std::string& preset, const std::string& mode, int max_degree,
                              int max_order) {
  const auto vars = preset_vars(preset);
  const bool second = preset == "kg" || preset == "coupled-kg";
  icnet::Library lib;
  if (mode == "galilean") {
    lib = icnet::galilean_filter(icnet::enumerate_candidates(vars, 2, max_degree, max_order), vars);
  } else if (mode == "lorentz") {
    lib = icnet::lorentz_filter(icnet::enumerate_candidates(vars, 2, max_degree, max_order), vars);
  } else if (mode == "overcomplete") {
    lib = icnet::overcomplete_library(vars, 2, max_degree, max_order);
  } else {
    throw std::invalid_argument("unknown library mode " + mode);
  }
  lib.target = second ? icnet::TargetKind::SecondTimeDerivative
                      : icnet::TargetKind::FirstTimeDerivative;
  return lib;
}

int cmd_gen(const std::string& pde, const icnet::SolverConfig& cfg, const std::string& out,
            const json& echo) {
  icnet::SolverConfig c = cfg;
  if (pde == "burgers2d")
    c.pde = icnet::PdeKind::Burgers2D;
  else if (pde == "kg")
    c.pde = icnet::PdeKind::KleinGordon;
  else if (pde == "coupled-kg")
    c.pde = icnet::PdeKind::CoupledKleinGordon;
  else if (pde == "ns-taylor-green")
    c.pde = icnet::PdeKind::TaylorGreenNS;
  else
    throw std::invalid_argument("unknown pde " + pde);
  const icnet::FieldDataset ds = icnet::generate(c);
  fs::create_directories(out);
  icnet::save_dataset(ds, out);
  write_run_json(out, "gen", echo);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"invariance constrained discovery of PDEs from gridded data"};
  app.require_subcommand(1);

  // gen
  auto* gen = app.add_subcommand("gen", "integrate a reference PDE and write a dataset");
  std::string gen_pde, gen_out;
  icnet::SolverConfig scfg;
  gen->add_option("pde", gen_pde, "burgers2d | kg | coupled-kg | ns-taylor-green")->required();
  gen->add_option("--out", gen_out, "output dataset directory")->required();
  gen->add_option("--nx", scfg.nx);
  gen->add_option("--ny", scfg.ny);
  gen->add_option("--dt-out", scfg.dt_output);
  gen->add_option("--t-end", scfg.t_end);
  gen->add_option("--substeps", scfg.substeps);
  gen->add_option("--nu", scfg.nu);
  gen->add_option("--a1", scfg.kg_a1);
  gen->add_option("--b1", scfg.kg_b1);
  gen->add_option("--d1", scfg.kg_d1);
  gen->add_option("--a2", scfg.kg_a2);
  gen->add_option("--b2", scfg.kg_b2);
  gen->add_option("--c2", scfg.kg_c2);
  gen->add_option("--re", scfg.re);
  gen->add_option("--drift-u", scfg.drift_u);
  gen->add_option("--drift-v", scfg.drift_v);

  // degrade
  auto* deg = app.add_subcommand("degrade", "downsample and add noise");
  std::string deg_in, deg_out;
  int deg_down = 1, deg_down_t = 1;
  double deg_noise = 0.0;
  std::uint64_t deg_seed = 0;
  deg->add_option("--in", deg_in)->required();
  deg->add_option("--out", deg_out)->required();
  deg->add_option("--downsample", deg_down, "spatial decimation factor");
  deg->add_option("--downsample-t", deg_down_t, "temporal decimation factor");
  deg->add_option("--noise", deg_noise, "noise level as a fraction of each variable's std");
  deg->add_option("--seed", deg_seed);

  // discover
  auto* dis = app.add_subcommand("discover", "recover the governing equations");
  std::string dis_data, dis_out, dis_lib = "galilean", dis_method = "icnet", dis_preset = "burgers";
  bool dis_noprune = false;
  int dis_snapshots = 30, dis_range = 0, dis_points = 0, dis_degree = 3, dis_order = 2;
  std::uint64_t dis_seed = 0;
  std::vector<int> dis_hidden{40, 40, 40, 40};
  double dis_alpha = 1.0, dis_eta = 1e-4;
  int dis_adam = 2000, dis_lbfgs = 400;
  dis->add_option("--data", dis_data)->required();
  dis->add_option("--out", dis_out)->required();
  dis->add_option("--library", dis_lib, "galilean | lorentz | overcomplete");
  dis->add_option("--method", dis_method, "icnet | stridge-only");
  dis->add_flag("--no-prune", dis_noprune, "skip the support pruning loop");
  dis->add_option("--preset", dis_preset, "burgers | kg | coupled-kg | ns-taylor-green");
  dis->add_option("--snapshots", dis_snapshots, "training snapshots (0 = all)");
  dis->add_option("--snapshot-range", dis_range, "sample snapshots from the first N steps");
  dis->add_option("--points", dis_points, "spatial points per snapshot (0 = full grid)");
  dis->add_option("--max-degree", dis_degree);
  dis->add_option("--max-order", dis_order);
  dis->add_option("--seed", dis_seed);
  dis->add_option("--hidden", dis_hidden, "hidden layer widths");
  dis->add_option("--alpha", dis_alpha, "physics loss weight");
  dis->add_option("--eta", dis_eta, "sparsity weight in model selection");
  dis->add_option("--adam-iters", dis_adam);
  dis->add_option("--lbfgs-iters", dis_lbfgs);

  // simulate
  auto* sim = app.add_subcommand("simulate", "integrate a discovered PDE from a dataset slice");
  std::string sim_pde, sim_ic, sim_out;
  int sim_it0 = 0, sim_substeps = 0;
  double sim_tend = 1.0, sim_dt = 0.01;
  sim->add_option("--pde", sim_pde, "discovered PDE JSON")->required();
  sim->add_option("--ic", sim_ic, "dataset directory providing the initial slice")->required();
  sim->add_option("--out", sim_out)->required();
  sim->add_option("--it0", sim_it0);
  sim->add_option("--t-end", sim_tend);
  sim->add_option("--dt-out", sim_dt);
  sim->add_option("--substeps", sim_substeps);

  // eval
  auto* ev = app.add_subcommand("eval", "compare datasets or check a PDE's residual");
  std::string ev_truth, ev_pred, ev_pde, ev_data, ev_out;
  ev->add_option("--truth", ev_truth);
  ev->add_option("--pred", ev_pred);
  ev->add_option("--pde", ev_pde);
  ev->add_option("--data", ev_data);
  ev->add_option("--out", ev_out, "directory for eval.json and eps_t.csv");

  // report
  auto* rep = app.add_subcommand("report", "merge discovery runs into a Markdown table");
  std::vector<std::string> rep_runs;
  std::string rep_ref, rep_out;
  rep->add_option("runs", rep_runs, "run directories containing pde.json")->required();
  rep->add_option("--reference", rep_ref, "reference pde.json for coefficient errors");
  rep->add_option("--out", rep_out, "write the table here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) {
      json echo{{"pde", gen_pde}, {"nx", scfg.nx},      {"ny", scfg.ny},
                {"dt_out", scfg.dt_output}, {"t_end", scfg.t_end}, {"substeps", scfg.substeps},
                {"nu", scfg.nu}, {"re", scfg.re}};
      return cmd_gen(gen_pde, scfg, gen_out, echo);
    }

    if (deg->parsed()) {
      icnet::FieldDataset ds = icnet::load_dataset(deg_in);
      if (deg_down > 1 || deg_down_t > 1) {
        std::vector<int> factors{deg_down_t};
        for (int a = 0; a < ds.grid.dim(); ++a) factors.push_back(deg_down);
        ds = icnet::downsample(ds, factors);
      }
      if (deg_noise > 0.0) {
        icnet::NoiseSpec ns;
        ns.level = deg_noise;
        ns.seed = deg_seed;
        ds = icnet::add_noise(ds, ns);
      }
      fs::create_directories(deg_out);
      icnet::save_dataset(ds, deg_out);
      write_run_json(deg_out, "degrade",
                     json{{"in", deg_in}, {"downsample", deg_down}, {"downsample_t", deg_down_t},
                          {"noise", deg_noise}, {"seed", deg_seed}});
      return 0;
    }

    if (dis->parsed()) {
      const icnet::FieldDataset ds = icnet::load_dataset(dis_data);
      const icnet::Library lib = preset_library(dis_preset, dis_lib, dis_degree, dis_order);
      fs::create_directories(dis_out);
      {
        std::ofstream lf(dis_out + "/library.json");
        lf << icnet::library_to_json(lib) << "\n";
      }

      icnet::DiscoveryRun run;
      if (dis_method == "stridge-only") {
        icnet::BaselineConfig bc;
        bc.n_snapshots = dis_snapshots;
        bc.snapshot_range = dis_range;
        bc.seed = dis_seed;
        bc.eta = dis_eta;
        run = icnet::discover_baseline(lib, ds, bc);
      } else if (dis_method == "icnet") {
        icnet::SampleSpec sp;
        sp.n_snapshots = dis_snapshots;
        sp.snapshot_range = dis_range;
        sp.n_spatial_points = dis_points;
        sp.seed = dis_seed;
        const icnet::TrainingSet ts = icnet::sample_points(ds, sp);

        icnet::MlpSpec ms;
        ms.n_inputs = ds.grid.dim() + 1;
        ms.n_outputs = static_cast<int>(ds.var_names.size());
        ms.hidden = dis_hidden;
        ms.seed = dis_seed;
        icnet::Surrogate net(ms);
        net.calibrate(ts);

        icnet::DiscoveryConfig dc;
        dc.alpha = dis_alpha;
        dc.eta = dis_eta;
        dc.seed = dis_seed;
        dc.prune = !dis_noprune;
        dc.stages = {{icnet::StageOpt::Adam, dis_adam, 1e-7, 2048},
                     {icnet::StageOpt::Lbfgs, dis_lbfgs, 1e-7, 0},
                     {icnet::StageOpt::Lbfgs, dis_lbfgs, 1e-6, 0}};
        dc.trace_csv = dis_out + "/trace.csv";
        run = icnet::discover(lib, ts, &net, dc);

        fs::create_directories(dis_out + "/checkpoint");
        icnet::save_checkpoint(dis_out + "/checkpoint", net, run.coefficients);
      } else {
        std::cerr << "unknown method " << dis_method << "\n";
        return 2;
      }

      {
        std::ofstream pf(dis_out + "/pde.json");
        pf << icnet::pde_to_json(run.pde) << "\n";
        std::ofstream tf(dis_out + "/pde.txt");
        tf << icnet::pde_to_text(run.pde);
      }
      write_run_json(dis_out, "discover",
                     json{{"data", dis_data}, {"library", dis_lib}, {"method", dis_method},
                          {"preset", dis_preset}, {"no_prune", dis_noprune},
                          {"snapshots", dis_snapshots}, {"snapshot_range", dis_range},
                          {"points", dis_points}, {"seed", dis_seed}, {"hidden", dis_hidden},
                          {"alpha", dis_alpha}, {"eta", dis_eta}, {"adam_iters", dis_adam},
                          {"lbfgs_iters", dis_lbfgs}});
      std::cout << icnet::pde_to_text(run.pde);
      return 0;
    }

    if (sim->parsed()) {
      std::ifstream pf(sim_pde);
      if (!pf) throw std::runtime_error("cannot read " + sim_pde);
      std::stringstream buf;
      buf << pf.rdbuf();
      const icnet::DiscoveredPde pde = icnet::pde_from_json(buf.str());
      const icnet::FieldDataset ic = icnet::load_dataset(sim_ic);
      icnet::SimulateConfig sc;
      sc.t_end = sim_tend;
      sc.dt_output = sim_dt;
      sc.substeps = sim_substeps;
      const icnet::FieldDataset out = icnet::simulate_discovered(pde, ic, sim_it0, sc);
      fs::create_directories(sim_out);
      icnet::save_dataset(out, sim_out);
      write_run_json(sim_out, "simulate",
                     json{{"pde", sim_pde}, {"ic", sim_ic}, {"it0", sim_it0},
                          {"t_end", sim_tend}, {"dt_out", sim_dt}});
      return 0;
    }

    if (ev->parsed()) {
      json out;
      std::string csv;
      if (!ev_truth.empty() && !ev_pred.empty()) {
        const icnet::FieldDataset truth = icnet::load_dataset(ev_truth);
        const icnet::FieldDataset pred = icnet::load_dataset(ev_pred);
        const icnet::EvalReport r = icnet::relative_error(truth, pred);
        out["relative_error"] = {{"mean", r.mean}, {"max", r.max}};
        std::ostringstream c;
        c << "t,eps_t\n";
        for (std::size_t i = 0; i < r.per_time.size(); ++i)
          c << truth.time(static_cast<int>(i)) << ',' << r.per_time[i] << "\n";
        csv = c.str();
      }
      if (!ev_pde.empty() && !ev_data.empty()) {
        std::ifstream pf(ev_pde);
        if (!pf) throw std::runtime_error("cannot read " + ev_pde);
        std::stringstream buf;
        buf << pf.rdbuf();
        const icnet::DiscoveredPde pde = icnet::pde_from_json(buf.str());
        const icnet::FieldDataset ds = icnet::load_dataset(ev_data);
        out["residual_rms"] = icnet::equation_residual_rms(pde, ds);
      }
      if (out.empty()) {
        std::cerr << "eval needs --truth/--pred or --pde/--data\n";
        return 2;
      }
      if (!ev_out.empty()) {
        fs::create_directories(ev_out);
        std::ofstream jf(ev_out + "/eval.json");
        jf << out.dump(2) << "\n";
        if (!csv.empty()) {
          std::ofstream cf(ev_out + "/eps_t.csv");
          cf << csv;
        }
        write_run_json(ev_out, "eval",
                       json{{"truth", ev_truth}, {"pred", ev_pred}, {"pde", ev_pde},
                            {"data", ev_data}});
      }
      std::cout << out.dump(2) << "\n";
      return 0;
    }

    if (rep->parsed()) {
      icnet::DiscoveredPde ref;
      bool have_ref = false;
      if (!rep_ref.empty()) {
        std::ifstream rf(rep_ref);
        if (!rf) throw std::runtime_error("cannot read " + rep_ref);
        std::stringstream buf;
        buf << rf.rdbuf();
        ref = icnet::pde_from_json(buf.str());
        have_ref = true;
      }

      std::vector<std::pair<std::string, icnet::DiscoveredPde>> runs;
      std::set<std::pair<std::string, std::string>> keys;
      for (const auto& dir : rep_runs) {
        std::ifstream pf(dir + "/pde.json");
        if (!pf) throw std::runtime_error("no pde.json under " + dir);
        std::stringstream buf;
        buf << pf.rdbuf();
        runs.emplace_back(dir, icnet::pde_from_json(buf.str()));
        for (const auto& eq : runs.back().second.equations)
          for (const auto& [term, coef] : eq.rhs)
            keys.insert({eq.target_var, icnet::term_to_string(term, runs.back().second.vars)});
      }
      if (have_ref)
        for (const auto& eq : ref.equations)
          for (const auto& [term, coef] : eq.rhs)
            keys.insert({eq.target_var, icnet::term_to_string(term, ref.vars)});

      const auto lookup = [](const icnet::DiscoveredPde& pde,
                             const std::pair<std::string, std::string>& key, double* out) {
        for (const auto& eq : pde.equations) {
          if (eq.target_var != key.first) continue;
          for (const auto& [term, coef] : eq.rhs)
            if (icnet::term_to_string(term, pde.vars) == key.second) {
              *out = coef;
              return true;
            }
        }
        return false;
      };

      std::ostringstream md;
      md << "| equation | term |";
      if (have_ref) md << " reference |";
      for (const auto& [dir, pde] : runs) md << ' ' << dir << " |";
      md << "\n|---|---|";
      if (have_ref) md << "---|";
      for (std::size_t i = 0; i < runs.size(); ++i) md << "---|";
      md << "\n";
      for (const auto& key : keys) {
        md << "| " << key.first << " | " << key.second << " |";
        double c = 0.0;
        if (have_ref) {
          if (lookup(ref, key, &c))
            md << ' ' << c << " |";
          else
            md << " - |";
        }
        for (const auto& [dir, pde] : runs) {
          if (lookup(pde, key, &c))
            md << ' ' << c << " |";
          else
            md << " - |";
        }
        md << "\n";
      }
      if (have_ref) {
        md << "\n";
        for (const auto& [dir, pde] : runs) {
          const icnet::CoefficientReport cr = icnet::coefficient_report(pde, ref);
          md << "- " << dir << ": precision " << cr.precision << ", recall " << cr.recall
             << ", max relative coefficient error " << cr.max_rel_error << "\n";
        }
      }
      if (!rep_out.empty()) {
        std::ofstream of(rep_out);
        of << md.str();
      } else {
        std::cout << md.str();
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
