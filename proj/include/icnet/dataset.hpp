#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace icnet {

/// Uniform periodic grid over a box, 2 or 3 spatial dimensions.
struct Grid {
  std::vector<int> shape;     // nx, ny(, nz)
  std::vector<double> mins;   // per-axis domain minimum
  std::vector<double> maxs;   // per-axis domain maximum
  bool periodic = true;

  int dim() const { return static_cast<int>(shape.size()); }
  std::int64_t points() const;
  double spacing(int axis) const;  // (max-min)/n for periodic grids
  double coord(int axis, int index) const { return mins[axis] + spacing(axis) * index; }
};

Grid make_grid2d(int nx, int ny, double xmin = -3.14159265358979323846,
                 double xmax = 3.14159265358979323846, double ymin = -3.14159265358979323846,
                 double ymax = 3.14159265358979323846);

/// Gridded spacetime samples of one or more field components.
/// Storage is row-major with t slowest, then x, then y(, then z).
struct FieldDataset {
  Grid grid;
  double t0 = 0.0;
  double dt = 0.0;
  int nt = 0;
  std::vector<std::string> var_names;
  std::map<std::string, std::vector<double>> data;
  std::string provenance;  // free-form JSON record

  std::int64_t frame_size() const { return grid.points(); }
  double time(int it) const { return t0 + dt * it; }
  double& at(const std::string& var, int it, std::int64_t flat_spatial);
  double at(const std::string& var, int it, std::int64_t flat_spatial) const;
  void validate() const;  // shapes consistent, finite, dt > 0
};

void save_dataset(const FieldDataset& ds, const std::string& dir);
FieldDataset load_dataset(const std::string& dir);

FieldDataset downsample(const FieldDataset& ds, const std::vector<int>& factors);

struct NoiseSpec {
  double level = 0.0;           // fraction of per-variable global std
  std::uint64_t seed = 0;
  std::string convention = "per-var-global-std";
};

FieldDataset add_noise(const FieldDataset& ds, const NoiseSpec& spec);

enum class SnapshotMode { RandomFromRange, Contiguous };

struct SampleSpec {
  int n_snapshots = 0;                       // 0 = all
  SnapshotMode snapshot_mode = SnapshotMode::RandomFromRange;
  int snapshot_range = 0;                    // choose from first `range` steps; 0 = all
  int n_spatial_points = 0;                  // 0 = full grid
  std::uint64_t seed = 0;
};

/// Flattened training points: coordinates (t, x, y[, z]) and per-variable
/// target values, identical spatial subsample across variables.
struct TrainingSet {
  int dim = 0;
  std::vector<std::string> var_names;
  std::vector<double> coords;   // n_points * (dim + 1), t first
  std::vector<double> values;   // n_points * n_vars, var-major per point
  std::vector<int> snapshot_indices;
  std::vector<std::int64_t> spatial_indices;

  std::int64_t n_points() const {
    return static_cast<std::int64_t>(coords.size()) / (dim + 1);
  }
};

TrainingSet sample_points(const FieldDataset& ds, const SampleSpec& spec);

}  // namespace icnet
