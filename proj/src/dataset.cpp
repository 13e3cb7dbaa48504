#include "icnet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "icnet/rng.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace icnet {

std::int64_t Grid::points() const {
  std::int64_t n = 1;
  for (int s : shape) n *= s;
  return n;
}

double Grid::spacing(int axis) const {
  // periodic grids exclude the duplicate right endpoint
  const int denom = periodic ? shape[axis] : shape[axis] - 1;
  return (maxs[axis] - mins[axis]) / denom;
}

Grid make_grid2d(int nx, int ny, double xmin, double xmax, double ymin, double ymax) {
  Grid g;
  g.shape = {nx, ny};
  g.mins = {xmin, ymin};
  g.maxs = {xmax, ymax};
  return g;
}

double& FieldDataset::at(const std::string& var, int it, std::int64_t flat_spatial) {
  return data.at(var)[static_cast<std::size_t>(it) * frame_size() + flat_spatial];
}

double FieldDataset::at(const std::string& var, int it, std::int64_t flat_spatial) const {
  return data.at(var)[static_cast<std::size_t>(it) * frame_size() + flat_spatial];
}

void FieldDataset::validate() const {
  if (nt <= 0 || dt <= 0.0) throw std::runtime_error("dataset: nt and dt must be positive");
  const std::size_t expect = static_cast<std::size_t>(nt) * frame_size();
  for (const auto& name : var_names) {
    const auto it = data.find(name);
    if (it == data.end()) throw std::runtime_error("dataset: missing data for variable " + name);
    if (it->second.size() != expect)
      throw std::runtime_error("dataset: variable " + name + " has " +
                               std::to_string(it->second.size()) + " values, expected " +
                               std::to_string(expect));
    for (double v : it->second)
      if (!std::isfinite(v)) throw std::runtime_error("dataset: non-finite value in " + name);
  }
}

void save_dataset(const FieldDataset& ds, const std::string& dir) {
  ds.validate();
  fs::create_directories(dir);
  nlohmann::json meta;
  meta["format_version"] = 1;
  meta["vars"] = ds.var_names;
  nlohmann::json shape = nlohmann::json::array();
  shape.push_back(ds.nt);
  for (int s : ds.grid.shape) shape.push_back(s);
  meta["shape"] = shape;
  meta["domain"] = {{"mins", ds.grid.mins}, {"maxs", ds.grid.maxs}};
  meta["dt"] = ds.dt;
  meta["t0"] = ds.t0;
  meta["periodic"] = ds.grid.periodic;
  meta["ordering"] = "row-major, t slowest, then x, then y(, then z)";
  meta["provenance"] = ds.provenance.empty()
                           ? nlohmann::json(nullptr)
                           : nlohmann::json::parse(ds.provenance, nullptr, false);
  std::ofstream mf(fs::path(dir) / "meta.json");
  mf << meta.dump(2) << "\n";
  if (!mf) throw std::runtime_error("save_dataset: cannot write meta.json in " + dir);

  for (const auto& name : ds.var_names) {
    std::ofstream f(fs::path(dir) / (name + ".f64"), std::ios::binary);
    const auto& v = ds.data.at(name);
    f.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (!f) throw std::runtime_error("save_dataset: cannot write " + name + ".f64");
  }
}

FieldDataset load_dataset(const std::string& dir) {
  std::ifstream mf(fs::path(dir) / "meta.json");
  if (!mf) throw std::runtime_error("load_dataset: no meta.json in " + dir);
  nlohmann::json meta;
  mf >> meta;
  if (meta.at("format_version").get<int>() != 1)
    throw std::runtime_error("load_dataset: unsupported format_version");

  FieldDataset ds;
  const auto shape = meta.at("shape").get<std::vector<int>>();
  if (shape.size() < 3 || shape.size() > 4)
    throw std::runtime_error("load_dataset: shape must be [nt,nx,ny(,nz)]");
  ds.nt = shape[0];
  ds.grid.shape.assign(shape.begin() + 1, shape.end());
  ds.grid.mins = meta.at("domain").at("mins").get<std::vector<double>>();
  ds.grid.maxs = meta.at("domain").at("maxs").get<std::vector<double>>();
  ds.grid.periodic = meta.value("periodic", true);
  ds.dt = meta.at("dt");
  ds.t0 = meta.at("t0");
  ds.var_names = meta.at("vars").get<std::vector<std::string>>();
  if (!meta.at("provenance").is_null()) ds.provenance = meta.at("provenance").dump();

  const std::size_t expect = static_cast<std::size_t>(ds.nt) * ds.grid.points();
  for (const auto& name : ds.var_names) {
    const fs::path p = fs::path(dir) / (name + ".f64");
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("load_dataset: meta lists variable '" + name +
                                     "' but file " + p.string() + " is missing");
    f.seekg(0, std::ios::end);
    const std::size_t bytes = static_cast<std::size_t>(f.tellg());
    if (bytes != expect * sizeof(double))
      throw std::runtime_error("load_dataset: " + p.string() + " has " + std::to_string(bytes) +
                               " bytes, expected " + std::to_string(expect * sizeof(double)));
    f.seekg(0);
    std::vector<double> v(expect);
    f.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(bytes));
    ds.data[name] = std::move(v);
  }
  ds.validate();
  return ds;
}

FieldDataset downsample(const FieldDataset& ds, const std::vector<int>& factors) {
  // factors are per spatial axis, optionally preceded by a time factor
  const int dim = ds.grid.dim();
  int tfac = 1;
  std::vector<int> sfac = factors;
  if (static_cast<int>(factors.size()) == dim + 1) {
    tfac = factors[0];
    sfac.assign(factors.begin() + 1, factors.end());
  } else if (static_cast<int>(factors.size()) != dim) {
    throw std::invalid_argument("downsample: one factor per axis required");
  }
  if (tfac < 1) throw std::invalid_argument("downsample: time factor must be >= 1");
  for (int a = 0; a < dim; ++a) {
    if (sfac[a] < 1 || ds.grid.shape[a] % sfac[a] != 0)
      throw std::invalid_argument("downsample: grid size " + std::to_string(ds.grid.shape[a]) +
                                  " not divisible by factor " + std::to_string(sfac[a]));
  }
  FieldDataset out = ds;
  out.data.clear();
  for (int a = 0; a < dim; ++a) out.grid.shape[a] = ds.grid.shape[a] / sfac[a];
  out.nt = (ds.nt + tfac - 1) / tfac;
  out.dt = ds.dt * tfac;

  const std::int64_t out_frame = out.grid.points();
  for (const auto& name : ds.var_names) {
    std::vector<double> v(static_cast<std::size_t>(out.nt) * out_frame);
    for (int it = 0; it < out.nt; ++it) {
      for (std::int64_t q = 0; q < out_frame; ++q) {
        // unflatten q in the coarse grid, stride into the fine grid
        std::int64_t rem = q, src = 0;
        for (int a = 0; a < dim; ++a) {
          std::int64_t stride = 1;
          for (int b = a + 1; b < dim; ++b) stride *= out.grid.shape[b];
          const std::int64_t idx = rem / stride;
          rem %= stride;
          std::int64_t fine_stride = 1;
          for (int b = a + 1; b < dim; ++b) fine_stride *= ds.grid.shape[b];
          src += idx * sfac[a] * fine_stride;
        }
        v[static_cast<std::size_t>(it) * out_frame + q] = ds.at(name, it * tfac, src);
      }
    }
    out.data[name] = std::move(v);
  }
  return out;
}

FieldDataset add_noise(const FieldDataset& ds, const NoiseSpec& spec) {
  if (spec.level < 0.0) throw std::invalid_argument("noise level must be >= 0");
  FieldDataset out = ds;
  if (spec.level == 0.0) return out;
  for (std::size_t vi = 0; vi < ds.var_names.size(); ++vi) {
    const auto& name = ds.var_names[vi];
    const auto& clean = ds.data.at(name);
    double mean = 0.0;
    for (double x : clean) mean += x;
    mean /= static_cast<double>(clean.size());
    double var = 0.0;
    for (double x : clean) var += (x - mean) * (x - mean);
    const double sd = std::sqrt(var / static_cast<double>(clean.size()));

    const std::uint64_t k = rng::key(spec.seed, vi);
    auto& noisy = out.data.at(name);
    for (std::size_t i = 0; i < noisy.size(); ++i)
      noisy[i] = clean[i] + spec.level * sd * rng::normal(k, i);
  }
  return out;
}

/// Seeded partial Fisher-Yates: first `k` entries of a shuffled 0..n-1.
static std::vector<std::int64_t> choose_without_replacement(std::int64_t n, std::int64_t k,
                                                            std::uint64_t key) {
  std::vector<std::int64_t> idx(n);
  for (std::int64_t i = 0; i < n; ++i) idx[i] = i;
  for (std::int64_t i = 0; i < k; ++i) {
    const std::int64_t j =
        i + static_cast<std::int64_t>(rng::uniform(key, static_cast<std::uint64_t>(i)) *
                                      static_cast<double>(n - i));
    std::swap(idx[i], idx[std::min(j, n - 1)]);
  }
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

TrainingSet sample_points(const FieldDataset& ds, const SampleSpec& spec) {
  const int range = spec.snapshot_range > 0 ? spec.snapshot_range : ds.nt;
  if (range > ds.nt) throw std::invalid_argument("sample_points: snapshot range exceeds dataset");
  const int want = spec.n_snapshots > 0 ? spec.n_snapshots : range;
  if (want > range) throw std::invalid_argument("sample_points: more snapshots requested than available");

  std::vector<std::int64_t> snaps;
  if (spec.snapshot_mode == SnapshotMode::Contiguous) {
    for (int i = 0; i < want; ++i) snaps.push_back(i);
  } else {
    snaps = choose_without_replacement(range, want, rng::key(spec.seed, 0x5eed5));
  }

  const std::int64_t frame = ds.frame_size();
  std::vector<std::int64_t> cells;
  if (spec.n_spatial_points > 0) {
    if (spec.n_spatial_points > frame)
      throw std::invalid_argument("sample_points: more spatial points requested than grid has");
    cells = choose_without_replacement(frame, spec.n_spatial_points, rng::key(spec.seed, 0x5eed6));
  } else {
    cells.resize(frame);
    for (std::int64_t i = 0; i < frame; ++i) cells[i] = i;
  }

  TrainingSet ts;
  ts.dim = ds.grid.dim();
  ts.var_names = ds.var_names;
  ts.snapshot_indices.assign(snaps.begin(), snaps.end());
  ts.spatial_indices = cells;
  const int nc = ts.dim + 1;
  ts.coords.reserve(snaps.size() * cells.size() * nc);
  ts.values.reserve(snaps.size() * cells.size() * ds.var_names.size());

  for (std::int64_t it : snaps) {
    for (std::int64_t q : cells) {
      ts.coords.push_back(ds.time(static_cast<int>(it)));
      std::int64_t rem = q;
      for (int a = 0; a < ts.dim; ++a) {
        std::int64_t stride = 1;
        for (int b = a + 1; b < ts.dim; ++b) stride *= ds.grid.shape[b];
        ts.coords.push_back(ds.grid.coord(a, static_cast<int>(rem / stride)));
        rem %= stride;
      }
      for (const auto& name : ds.var_names) ts.values.push_back(ds.at(name, static_cast<int>(it), q));
    }
  }
  return ts;
}

}  // namespace icnet
