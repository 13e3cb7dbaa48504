#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "icnet/dataset.hpp"

using namespace icnet;
namespace fs = std::filesystem;

namespace {

FieldDataset make_test_dataset(int nt = 5, int nx = 16, int ny = 16) {
  FieldDataset ds;
  ds.grid = make_grid2d(nx, ny);
  ds.t0 = 0.0;
  ds.dt = 0.1;
  ds.nt = nt;
  ds.var_names = {"u", "v"};
  for (const auto& name : ds.var_names) {
    auto& d = ds.data[name];
    d.resize(static_cast<std::size_t>(nt) * nx * ny);
    for (std::size_t i = 0; i < d.size(); ++i)
      d[i] = std::sin(0.01 * static_cast<double>(i) + (name == "v" ? 1.0 : 0.0));
  }
  return ds;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("icnet_test_" + std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("grid geometry") {
  const Grid g = make_grid2d(16, 8);
  CHECK(g.points() == 128);
  CHECK(g.spacing(0) == doctest::Approx(2.0 * 3.14159265358979323846 / 16));
  CHECK(g.coord(0, 0) == doctest::Approx(-3.14159265358979323846));
  // periodic grids stop one spacing short of the right edge
  CHECK(g.coord(0, 15) == doctest::Approx(3.14159265358979323846 - g.spacing(0)));
}

TEST_CASE("save and load round trip is bit exact") {
  TempDir tmp;
  const FieldDataset ds = make_test_dataset();
  save_dataset(ds, tmp.path.string());
  const FieldDataset back = load_dataset(tmp.path.string());
  CHECK(back.nt == ds.nt);
  CHECK(back.dt == ds.dt);
  CHECK(back.grid.shape == ds.grid.shape);
  CHECK(back.var_names == ds.var_names);
  for (const auto& name : ds.var_names) CHECK(back.data.at(name) == ds.data.at(name));
}

TEST_CASE("load rejects missing and truncated files") {
  TempDir tmp;
  CHECK_THROWS(load_dataset(tmp.path.string()));

  const FieldDataset ds = make_test_dataset();
  save_dataset(ds, tmp.path.string());
  fs::remove(tmp.path / "v.f64");
  CHECK_THROWS_WITH_AS(load_dataset(tmp.path.string()), doctest::Contains("v.f64"),
                       std::runtime_error);

  save_dataset(ds, tmp.path.string());
  fs::resize_file(tmp.path / "u.f64", 17);
  CHECK_THROWS_WITH_AS(load_dataset(tmp.path.string()), doctest::Contains("bytes"),
                       std::runtime_error);
}

TEST_CASE("downsample keeps the origin sample and strides") {
  const FieldDataset ds = make_test_dataset(6, 16, 8);
  const FieldDataset half = downsample(ds, {2, 2});
  CHECK(half.grid.shape == std::vector<int>{8, 4});
  CHECK(half.nt == ds.nt);
  CHECK(half.at("u", 3, 0) == ds.at("u", 3, 0));
  CHECK(half.at("u", 2, 1 /* (0,1) coarse */) == ds.at("u", 2, 2 /* (0,2) fine */));
  CHECK(half.at("u", 2, 4 /* (1,0) coarse */) == ds.at("u", 2, 16 /* (2,0) fine */));

  const FieldDataset t2 = downsample(ds, {2, 1, 1});
  CHECK(t2.nt == 3);
  CHECK(t2.dt == doctest::Approx(2 * ds.dt));
  CHECK(t2.at("v", 1, 7) == ds.at("v", 2, 7));

  CHECK_THROWS(downsample(ds, {3, 3}));
  CHECK_THROWS(downsample(ds, {2}));
}

TEST_CASE("noise level scales with each variable's standard deviation") {
  FieldDataset ds = make_test_dataset(8, 32, 32);
  for (auto& [name, d] : ds.data)
    for (std::size_t i = 0; i < d.size(); ++i) d[i] *= (name == "v" ? 10.0 : 1.0);

  NoiseSpec spec;
  spec.level = 0.5;
  spec.seed = 7;
  const FieldDataset noisy = add_noise(ds, spec);

  for (const auto& name : ds.var_names) {
    const auto& clean = ds.data.at(name);
    double mean = 0.0, var = 0.0;
    for (double x : clean) mean += x;
    mean /= static_cast<double>(clean.size());
    for (double x : clean) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(clean.size()));

    double nvar = 0.0;
    const auto& pert = noisy.data.at(name);
    for (std::size_t i = 0; i < pert.size(); ++i) {
      const double d = pert[i] - clean[i];
      nvar += d * d;
    }
    const double nsd = std::sqrt(nvar / static_cast<double>(pert.size()));
    CHECK(nsd == doctest::Approx(0.5 * sd).epsilon(0.05));
  }
}

TEST_CASE("noise is deterministic in the seed and zero level is the identity") {
  const FieldDataset ds = make_test_dataset();
  NoiseSpec spec;
  spec.level = 0.3;
  spec.seed = 42;
  const FieldDataset a = add_noise(ds, spec);
  const FieldDataset b = add_noise(ds, spec);
  CHECK(a.data.at("u") == b.data.at("u"));

  spec.seed = 43;
  const FieldDataset c = add_noise(ds, spec);
  CHECK(a.data.at("u") != c.data.at("u"));

  spec.level = 0.0;
  const FieldDataset d = add_noise(ds, spec);
  CHECK(d.data.at("u") == ds.data.at("u"));

  spec.level = -0.1;
  CHECK_THROWS(add_noise(ds, spec));
}

TEST_CASE("point sampling is deterministic and consistent across variables") {
  const FieldDataset ds = make_test_dataset(10, 16, 16);
  SampleSpec spec;
  spec.n_snapshots = 4;
  spec.snapshot_range = 8;
  spec.n_spatial_points = 50;
  spec.seed = 3;

  const TrainingSet a = sample_points(ds, spec);
  const TrainingSet b = sample_points(ds, spec);
  CHECK(a.coords == b.coords);
  CHECK(a.values == b.values);
  CHECK(a.n_points() == 4 * 50);
  CHECK(a.snapshot_indices.size() == 4);
  for (auto s : a.snapshot_indices) CHECK(s < 8);

  // values line up with coordinates
  const int nc = a.dim + 1;
  for (std::int64_t p = 0; p < a.n_points(); ++p) {
    const double t = a.coords[p * nc];
    const int it = static_cast<int>(std::lround((t - ds.t0) / ds.dt));
    const std::int64_t cell = a.spatial_indices[p % 50];
    CHECK(a.values[p * 2 + 0] == ds.at("u", it, cell));
    CHECK(a.values[p * 2 + 1] == ds.at("v", it, cell));
  }

  spec.n_spatial_points = 16 * 16 + 1;
  CHECK_THROWS(sample_points(ds, spec));
}

TEST_CASE("validate flags inconsistent datasets") {
  FieldDataset ds = make_test_dataset();
  ds.data["u"].pop_back();
  CHECK_THROWS(ds.validate());
  ds = make_test_dataset();
  ds.data["v"][3] = std::nan("");
  CHECK_THROWS(ds.validate());
}
