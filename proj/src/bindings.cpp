#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "icnet/discover.hpp"
#include "icnet/evaluate.hpp"
#include "icnet/solvers.hpp"
#include "icnet/stridge.hpp"

namespace py = pybind11;
using namespace icnet;

namespace {

py::array_t<double> dataset_array(const FieldDataset& ds, const std::string& var) {
  const auto it = ds.data.find(var);
  if (it == ds.data.end()) throw py::key_error(var);
  std::vector<py::ssize_t> shape = {ds.nt};
  for (int n : ds.grid.shape) shape.push_back(n);
  py::array_t<double> out(shape);
  std::copy(it->second.begin(), it->second.end(), out.mutable_data());
  return out;
}

void dataset_set_array(FieldDataset& ds, const std::string& var, py::array_t<double> arr) {
  auto buf = arr.request();
  const std::int64_t want = static_cast<std::int64_t>(ds.nt) * ds.frame_size();
  if (buf.size != want) throw py::value_error("array size does not match the dataset shape");
  auto c = py::array_t<double, py::array::c_style | py::array::forcecast>::ensure(arr);
  const double* p = c.data();
  ds.data[var].assign(p, p + want);
  if (std::find(ds.var_names.begin(), ds.var_names.end(), var) == ds.var_names.end())
    ds.var_names.push_back(var);
}

std::map<std::string, double> equation_rhs(const DiscoveredPde& pde, const std::string& var) {
  std::map<std::string, double> out;
  for (const auto& eq : pde.equations) {
    if (eq.target_var != var) continue;
    for (const auto& [t, c] : eq.rhs) out[term_to_string(t, pde.vars)] = c;
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_icnet, m) {
  m.doc() = "PDE discovery from gridded field data";

  // term algebra
  py::enum_<VarKind>(m, "VarKind")
      .value("Velocity", VarKind::Velocity)
      .value("Pressure", VarKind::Pressure)
      .value("Scalar", VarKind::Scalar);

  py::class_<FieldVar>(m, "FieldVar")
      .def(py::init<>())
      .def_readwrite("id", &FieldVar::id)
      .def_readwrite("name", &FieldVar::name)
      .def_readwrite("kind", &FieldVar::kind)
      .def("__repr__", [](const FieldVar& v) { return "FieldVar(" + v.name + ")"; });

  py::class_<Term>(m, "Term")
      .def("degree", &Term::degree)
      .def("deriv_order", &Term::deriv_order)
      .def(py::self == py::self);

  py::enum_<LibraryMode>(m, "LibraryMode")
      .value("Galilean", LibraryMode::Galilean)
      .value("Lorentz", LibraryMode::Lorentz)
      .value("Overcomplete", LibraryMode::Overcomplete);

  py::enum_<TargetKind>(m, "TargetKind")
      .value("FirstTimeDerivative", TargetKind::FirstTimeDerivative)
      .value("SecondTimeDerivative", TargetKind::SecondTimeDerivative);

  py::class_<Library>(m, "Library")
      .def_readonly("terms", &Library::terms)
      .def_readonly("pinned", &Library::pinned)
      .def_readonly("mode", &Library::mode)
      .def_readonly("target", &Library::target)
      .def_readonly("vars", &Library::vars)
      .def("term_names",
           [](const Library& lib) {
             std::vector<std::string> out;
             for (const auto& t : lib.terms) out.push_back(term_to_string(t, lib.vars));
             return out;
           })
      .def("pinned_names",
           [](const Library& lib) {
             std::vector<std::string> out;
             for (const auto& t : lib.pinned) out.push_back(term_to_string(t, lib.vars));
             return out;
           })
      .def("to_json", &library_to_json)
      .def_static("from_json", &library_from_json);

  m.def("make_velocity_vars", &make_velocity_vars, py::arg("d"), py::arg("with_pressure") = false);
  m.def("make_scalar_vars", &make_scalar_vars);
  m.def("enumerate_candidates", &enumerate_candidates);
  m.def("galilean_filter", &galilean_filter, py::arg("candidates"), py::arg("vars"),
        py::arg("include_pressure_gradient") = true);
  m.def("lorentz_filter", &lorentz_filter);
  m.def("term_to_string", &term_to_string);
  m.def("string_to_term", &string_to_term);

  // datasets
  py::class_<Grid>(m, "Grid")
      .def(py::init<>())
      .def_readwrite("shape", &Grid::shape)
      .def_readwrite("mins", &Grid::mins)
      .def_readwrite("maxs", &Grid::maxs)
      .def_readwrite("periodic", &Grid::periodic)
      .def("dim", &Grid::dim)
      .def("points", &Grid::points)
      .def("spacing", &Grid::spacing);

  py::class_<FieldDataset>(m, "FieldDataset")
      .def(py::init<>())
      .def_readwrite("grid", &FieldDataset::grid)
      .def_readwrite("t0", &FieldDataset::t0)
      .def_readwrite("dt", &FieldDataset::dt)
      .def_readwrite("nt", &FieldDataset::nt)
      .def_readonly("var_names", &FieldDataset::var_names)
      .def_readwrite("provenance", &FieldDataset::provenance)
      .def("array", &dataset_array, py::arg("var"),
           "Copy of one variable, shaped (nt, nx, ny[, nz]).")
      .def("set_array", &dataset_set_array, py::arg("var"), py::arg("values"))
      .def("validate", &FieldDataset::validate)
      .def("time", &FieldDataset::time);

  m.def("save_dataset", &save_dataset);
  m.def("load_dataset", &load_dataset);
  m.def("downsample", &downsample);

  py::class_<NoiseSpec>(m, "NoiseSpec")
      .def(py::init<>())
      .def_readwrite("level", &NoiseSpec::level)
      .def_readwrite("seed", &NoiseSpec::seed)
      .def_readwrite("convention", &NoiseSpec::convention);
  m.def("add_noise", &add_noise);

  py::enum_<SnapshotMode>(m, "SnapshotMode")
      .value("RandomFromRange", SnapshotMode::RandomFromRange)
      .value("Contiguous", SnapshotMode::Contiguous);

  py::class_<SampleSpec>(m, "SampleSpec")
      .def(py::init<>())
      .def_readwrite("n_snapshots", &SampleSpec::n_snapshots)
      .def_readwrite("snapshot_mode", &SampleSpec::snapshot_mode)
      .def_readwrite("snapshot_range", &SampleSpec::snapshot_range)
      .def_readwrite("n_spatial_points", &SampleSpec::n_spatial_points)
      .def_readwrite("seed", &SampleSpec::seed);

  py::class_<TrainingSet>(m, "TrainingSet")
      .def_readonly("dim", &TrainingSet::dim)
      .def_readonly("var_names", &TrainingSet::var_names)
      .def("n_points", &TrainingSet::n_points);
  m.def("sample_points", &sample_points);

  // reference solvers
  py::enum_<PdeKind>(m, "PdeKind")
      .value("Burgers2D", PdeKind::Burgers2D)
      .value("KleinGordon", PdeKind::KleinGordon)
      .value("CoupledKleinGordon", PdeKind::CoupledKleinGordon)
      .value("TaylorGreenNS", PdeKind::TaylorGreenNS);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("pde", &SolverConfig::pde)
      .def_readwrite("nx", &SolverConfig::nx)
      .def_readwrite("ny", &SolverConfig::ny)
      .def_readwrite("xmin", &SolverConfig::xmin)
      .def_readwrite("xmax", &SolverConfig::xmax)
      .def_readwrite("ymin", &SolverConfig::ymin)
      .def_readwrite("ymax", &SolverConfig::ymax)
      .def_readwrite("dt_output", &SolverConfig::dt_output)
      .def_readwrite("t_end", &SolverConfig::t_end)
      .def_readwrite("substeps", &SolverConfig::substeps)
      .def_readwrite("nu", &SolverConfig::nu)
      .def_readwrite("ic_a1", &SolverConfig::ic_a1)
      .def_readwrite("ic_b1", &SolverConfig::ic_b1)
      .def_readwrite("ic_c1", &SolverConfig::ic_c1)
      .def_readwrite("ic_d1", &SolverConfig::ic_d1)
      .def_readwrite("kg_a1", &SolverConfig::kg_a1)
      .def_readwrite("kg_b1", &SolverConfig::kg_b1)
      .def_readwrite("kg_d1", &SolverConfig::kg_d1)
      .def_readwrite("kg_a2", &SolverConfig::kg_a2)
      .def_readwrite("kg_b2", &SolverConfig::kg_b2)
      .def_readwrite("kg_c2", &SolverConfig::kg_c2)
      .def_readwrite("re", &SolverConfig::re)
      .def_readwrite("drift_u", &SolverConfig::drift_u)
      .def_readwrite("drift_v", &SolverConfig::drift_v);

  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);
  m.def("generate", &generate, py::call_guard<py::gil_scoped_release>());
  m.def("solve_burgers2d", &solve_burgers2d, py::call_guard<py::gil_scoped_release>());
  m.def("solve_klein_gordon", &solve_klein_gordon, py::call_guard<py::gil_scoped_release>());
  m.def("solve_coupled_kg", &solve_coupled_kg, py::call_guard<py::gil_scoped_release>());
  m.def("taylor_green_ns", &taylor_green_ns, py::call_guard<py::gil_scoped_release>());

  py::class_<SimulateConfig>(m, "SimulateConfig")
      .def(py::init<>())
      .def_readwrite("t_end", &SimulateConfig::t_end)
      .def_readwrite("dt_output", &SimulateConfig::dt_output)
      .def_readwrite("substeps", &SimulateConfig::substeps);
  m.def("simulate_discovered", &simulate_discovered, py::arg("pde"), py::arg("ic"),
        py::arg("it0") = 0, py::arg("cfg") = SimulateConfig{},
        py::call_guard<py::gil_scoped_release>());

  // surrogate
  py::class_<MlpSpec>(m, "MlpSpec")
      .def(py::init<>())
      .def_readwrite("n_inputs", &MlpSpec::n_inputs)
      .def_readwrite("n_outputs", &MlpSpec::n_outputs)
      .def_readwrite("hidden", &MlpSpec::hidden)
      .def_readwrite("seed", &MlpSpec::seed);

  py::class_<Surrogate>(m, "Surrogate")
      .def(py::init<const MlpSpec&>())
      .def("n_params", &Surrogate::n_params)
      .def("get_params", &Surrogate::get_params)
      .def("set_params", &Surrogate::set_params)
      .def("calibrate", &Surrogate::calibrate)
      .def("values", &Surrogate::values, py::arg("coords"),
           "Network outputs at physical coordinates (rows of [t, x, y...]).");

  // sparse regression
  py::class_<SparseSolution>(m, "SparseSolution")
      .def_readonly("coefficients", &SparseSolution::coefficients)
      .def_readonly("support", &SparseSolution::support)
      .def_readonly("tol_used", &SparseSolution::tol_used)
      .def_readonly("score", &SparseSolution::score)
      .def_readonly("rank_deficient", &SparseSolution::rank_deficient);

  m.def("ridge", &ridge);
  m.def(
      "stridge",
      [](const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda, double tol,
         int max_iter) { return stridge(theta, y, lambda, tol, max_iter); },
      py::arg("theta"), py::arg("y"), py::arg("lambda_"), py::arg("tol"),
      py::arg("max_iter") = 50);

  py::class_<TrainStridgeConfig>(m, "TrainStridgeConfig")
      .def(py::init<>())
      .def_readwrite("lambda_", &TrainStridgeConfig::lambda)
      .def_readwrite("eta", &TrainStridgeConfig::eta)
      .def_readwrite("n_grid", &TrainStridgeConfig::n_grid)
      .def_readwrite("max_iter", &TrainStridgeConfig::max_iter)
      .def_readwrite("trace_csv", &TrainStridgeConfig::trace_csv);
  m.def("train_stridge", &train_stridge, py::arg("theta"), py::arg("y"),
        py::arg("cfg") = TrainStridgeConfig{});

  // discovery
  py::class_<DiscoveredPde>(m, "DiscoveredPde")
      .def_readonly("vars", &DiscoveredPde::vars)
      .def_readonly("spatial_dim", &DiscoveredPde::spatial_dim)
      .def_readonly("target", &DiscoveredPde::target)
      .def_readonly("provenance", &DiscoveredPde::provenance)
      .def("rhs", &equation_rhs, py::arg("var"),
           "Right-hand side of one equation as {term name: coefficient}.")
      .def("text", &pde_to_text)
      .def("to_json", &pde_to_json)
      .def_static("from_json", &pde_from_json)
      .def("__repr__", &pde_to_text);

  py::enum_<StageOpt>(m, "StageOpt").value("Adam", StageOpt::Adam).value("Lbfgs", StageOpt::Lbfgs);

  py::class_<StageSpec>(m, "StageSpec")
      .def(py::init<>())
      .def_readwrite("opt", &StageSpec::opt)
      .def_readwrite("iters", &StageSpec::iters)
      .def_readwrite("beta", &StageSpec::beta)
      .def_readwrite("batch", &StageSpec::batch);

  py::class_<DiscoveryConfig>(m, "DiscoveryConfig")
      .def(py::init<>())
      .def_readwrite("alpha", &DiscoveryConfig::alpha)
      .def_readwrite("stages", &DiscoveryConfig::stages)
      .def_readwrite("prune", &DiscoveryConfig::prune)
      .def_readwrite("stable_needed", &DiscoveryConfig::stable_needed)
      .def_readwrite("max_extra_rounds", &DiscoveryConfig::max_extra_rounds)
      .def_readwrite("eta", &DiscoveryConfig::eta)
      .def_readwrite("ridge_lambda", &DiscoveryConfig::ridge_lambda)
      .def_readwrite("seed", &DiscoveryConfig::seed)
      .def_readwrite("trace_csv", &DiscoveryConfig::trace_csv)
      .def_readwrite("verbose", &DiscoveryConfig::verbose);

  py::class_<LossParts>(m, "LossParts")
      .def_readonly("data", &LossParts::data)
      .def_readonly("physics", &LossParts::physics)
      .def_readonly("l1", &LossParts::l1)
      .def_readonly("total", &LossParts::total);

  py::class_<PruneRecord>(m, "PruneRecord")
      .def_readonly("round", &PruneRecord::round)
      .def_readonly("loss", &PruneRecord::loss)
      .def_readonly("support_sizes", &PruneRecord::support_sizes)
      .def_readonly("changed", &PruneRecord::changed);

  py::class_<DiscoveryRun>(m, "DiscoveryRun")
      .def_readonly("pde", &DiscoveryRun::pde)
      .def_readonly("history", &DiscoveryRun::history)
      .def_readonly("final_loss", &DiscoveryRun::final_loss)
      .def_readonly("support_stable", &DiscoveryRun::support_stable);

  m.def("discover", &discover, py::arg("lib"), py::arg("ts"), py::arg("net"),
        py::arg("cfg") = DiscoveryConfig{}, py::call_guard<py::gil_scoped_release>());

  py::enum_<BaselineDerivs>(m, "BaselineDerivs")
      .value("Spectral", BaselineDerivs::Spectral)
      .value("Polynomial", BaselineDerivs::Polynomial);

  py::class_<BaselineConfig>(m, "BaselineConfig")
      .def(py::init<>())
      .def_readwrite("n_snapshots", &BaselineConfig::n_snapshots)
      .def_readwrite("snapshot_range", &BaselineConfig::snapshot_range)
      .def_readwrite("seed", &BaselineConfig::seed)
      .def_readwrite("eta", &BaselineConfig::eta)
      .def_readwrite("ridge_lambda", &BaselineConfig::ridge_lambda)
      .def_readwrite("derivs", &BaselineConfig::derivs)
      .def_readwrite("poly_halfwidth", &BaselineConfig::poly_halfwidth)
      .def_readwrite("poly_degree", &BaselineConfig::poly_degree);

  m.def("discover_baseline", &discover_baseline, py::arg("lib"), py::arg("ds"),
        py::arg("cfg") = BaselineConfig{}, py::call_guard<py::gil_scoped_release>());

  // evaluation
  py::class_<EvalReport>(m, "EvalReport")
      .def_readonly("per_time", &EvalReport::per_time)
      .def_readonly("mean", &EvalReport::mean)
      .def_readonly("max", &EvalReport::max);
  m.def("relative_error", &relative_error);
  m.def("equation_residual_rms", &equation_residual_rms, py::arg("pde"), py::arg("ds"),
        py::arg("skip_edges") = 2);

  py::class_<CoefficientMatch>(m, "CoefficientMatch")
      .def_readonly("var", &CoefficientMatch::var)
      .def_readonly("term", &CoefficientMatch::term)
      .def_readonly("expected", &CoefficientMatch::expected)
      .def_readonly("found", &CoefficientMatch::found);

  py::class_<CoefficientReport>(m, "CoefficientReport")
      .def_readonly("matched", &CoefficientReport::matched)
      .def_readonly("missing", &CoefficientReport::missing)
      .def_readonly("spurious", &CoefficientReport::spurious)
      .def_readonly("precision", &CoefficientReport::precision)
      .def_readonly("recall", &CoefficientReport::recall)
      .def_readonly("max_rel_error", &CoefficientReport::max_rel_error)
      .def_readonly("exact_support", &CoefficientReport::exact_support);
  m.def("coefficient_report", &coefficient_report);

  py::class_<BoostSpec>(m, "BoostSpec")
      .def(py::init<>())
      .def_readwrite("mode", &BoostSpec::mode)
      .def_readwrite("velocity", &BoostSpec::velocity);

  py::class_<InvarianceReport>(m, "InvarianceReport")
      .def_readonly("term_errors", &InvarianceReport::term_errors)
      .def_readonly("combined_errors", &InvarianceReport::combined_errors)
      .def_readonly("max_error", &InvarianceReport::max_error);
  m.def("certify_invariance", &certify_invariance, py::arg("lib"), py::arg("spec"),
        py::arg("n_trials") = 50, py::arg("seed") = 0);
  m.def("term_invariance_error", &term_invariance_error, py::arg("term"), py::arg("vars"),
        py::arg("spatial_dim"), py::arg("spec"), py::arg("n_trials") = 50, py::arg("seed") = 0);
}
