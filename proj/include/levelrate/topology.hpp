#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "levelrate/errors.hpp"
#include "levelrate/landscape.hpp"
#include "levelrate/loss.hpp"
#include "levelrate/param_vector.hpp"

namespace levelrate {

struct Box2 {
  double x_lo = -kDefaultBoxHalfWidth;
  double x_hi = kDefaultBoxHalfWidth;
  double y_lo = -kDefaultBoxHalfWidth;
  double y_hi = kDefaultBoxHalfWidth;

  void validate() const {
    if (!(x_hi > x_lo) || !(y_hi > y_lo) || !std::isfinite(x_lo) || !std::isfinite(x_hi) ||
        !std::isfinite(y_lo) || !std::isfinite(y_hi)) {
      throw ParameterError("Box2 must be finite and non-degenerate");
    }
  }
};

/// Scalar field sampled at cell centers of an nx-by-ny grid. Cell (i, j)
/// sits at x index i, y index j and is stored at values[i * ny + j].
struct GridField {
  Box2 box;
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<double> values;

  double x_center(std::size_t i) const noexcept {
    return box.x_lo + (static_cast<double>(i) + 0.5) * (box.x_hi - box.x_lo) / static_cast<double>(nx);
  }
  double y_center(std::size_t j) const noexcept {
    return box.y_lo + (static_cast<double>(j) + 0.5) * (box.y_hi - box.y_lo) / static_cast<double>(ny);
  }
  double at(std::size_t i, std::size_t j) const noexcept { return values[i * ny + j]; }

  double min() const { return *std::min_element(values.begin(), values.end()); }
  double max() const { return *std::max_element(values.begin(), values.end()); }
};

/// Evaluates a 2-D objective at every cell center. Rows are split across
/// worker threads for large grids; the result does not depend on the split.
inline GridField sample_grid(const Objective& obj, const Box2& box, std::size_t nx, std::size_t ny,
                             unsigned threads = 0) {
  box.validate();
  if (nx < 2 || ny < 2) throw ParameterError("sample_grid: nx and ny must be >= 2");
  if (obj.dim != 2) throw DimensionError("sample_grid: objective '" + obj.name + "' is not 2-D");
  GridField f{box, nx, ny, std::vector<double>(nx * ny)};

  auto fill_rows = [&](std::size_t i0, std::size_t i1) {
    ParamVector p(2);
    for (std::size_t i = i0; i < i1; ++i) {
      p[0] = f.x_center(i);
      for (std::size_t j = 0; j < ny; ++j) {
        p[1] = f.y_center(j);
        f.values[i * ny + j] = obj.eval(p);
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  if (nx * ny < 4096) threads = 1;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, nx));
  if (threads <= 1) {
    fill_rows(0, nx);
  } else {
    std::vector<std::jthread> workers;
    const std::size_t chunk = (nx + threads - 1) / threads;
    for (std::size_t i0 = 0; i0 < nx; i0 += chunk) {
      workers.emplace_back(fill_rows, i0, std::min(nx, i0 + chunk));
    }
  }

  std::string bad;
  std::size_t bad_count = 0;
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (std::isfinite(f.at(i, j))) continue;
      if (bad_count++ < 5) {
        bad += " (" + std::to_string(i) + "," + std::to_string(j) + ")";
      }
    }
  }
  if (bad_count > 0) {
    throw SamplingError("sample_grid: " + std::to_string(bad_count) + " non-finite value(s) for '" + obj.name +
                        "' at cells" + bad);
  }
  return f;
}

/// Writes `x,y,value` rows with 17 significant digits.
inline void write_grid_csv(std::ostream& out, const GridField& f) {
  const auto old_prec = out.precision(17);
  out << "x,y,value\n";
  for (std::size_t i = 0; i < f.nx; ++i) {
    for (std::size_t j = 0; j < f.ny; ++j) {
      out << f.x_center(i) << ',' << f.y_center(j) << ',' << f.at(i, j) << '\n';
    }
  }
  out.precision(old_prec);
}

// ---------------------------------------------------------------------------
// Thresholding.

enum class Direction { Super, Sub };

inline const char* to_string(Direction d) noexcept { return d == Direction::Super ? "super" : "sub"; }

struct Mask {
  std::size_t nx = 0;
  std::size_t ny = 0;
  std::vector<std::uint8_t> cells;  // same indexing as GridField

  bool at(std::size_t i, std::size_t j) const noexcept { return cells[i * ny + j] != 0; }
  std::size_t count() const noexcept { return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), 1)); }
};

/// Super: value >= lambda. Sub: value <= lambda. A cell equal to lambda is in
/// both masks.
inline Mask threshold_mask(const GridField& f, double lambda, Direction dir) {
  Mask m{f.nx, f.ny, std::vector<std::uint8_t>(f.values.size())};
  for (std::size_t k = 0; k < f.values.size(); ++k) {
    const double v = f.values[k];
    m.cells[k] = static_cast<std::uint8_t>(dir == Direction::Super ? v >= lambda : v <= lambda);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Union-find labeling.

/// Disjoint-set forest with union by size and path halving.
class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), size_(n, 1) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t a) noexcept {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }

  bool unite(std::size_t a, std::size_t b) noexcept {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (size_[a] < size_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::size_t> size_;
};

enum class Adjacency { Four = 4, Eight = 8 };

struct Labeling {
  std::size_t count = 0;
  std::vector<std::int32_t> labels;  // 0 for cells outside the mask, else 1..count
};

/// Connected components of the true cells. Labels are assigned 1..count in
/// raster order of each component's first cell.
inline Labeling connected_components(const Mask& mask, Adjacency adj = Adjacency::Eight) {
  const std::size_t nx = mask.nx, ny = mask.ny;
  DisjointSet ds(nx * ny);
  for (std::size_t i = 0; i < nx; ++i) {
    for (std::size_t j = 0; j < ny; ++j) {
      if (!mask.at(i, j)) continue;
      const std::size_t k = i * ny + j;
      if (j > 0 && mask.at(i, j - 1)) ds.unite(k, k - 1);
      if (i > 0) {
        if (mask.at(i - 1, j)) ds.unite(k, k - ny);
        if (adj == Adjacency::Eight) {
          if (j > 0 && mask.at(i - 1, j - 1)) ds.unite(k, k - ny - 1);
          if (j + 1 < ny && mask.at(i - 1, j + 1)) ds.unite(k, k - ny + 1);
        }
      }
    }
  }

  Labeling out;
  out.labels.assign(nx * ny, 0);
  std::vector<std::int32_t> root_label(nx * ny, 0);
  for (std::size_t k = 0; k < nx * ny; ++k) {
    if (mask.cells[k] == 0) continue;
    const std::size_t r = ds.find(k);
    if (root_label[r] == 0) root_label[r] = static_cast<std::int32_t>(++out.count);
    out.labels[k] = root_label[r];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Threshold sweeps.

struct ConnectivityEntry {
  double lambda = 0.0;
  Direction direction = Direction::Super;
  std::size_t component_count = 0;
  bool connected = true;  // component_count <= 1
  double occupied_fraction = 0.0;
};

struct ConnectivityReport {
  Adjacency adjacency = Adjacency::Eight;
  std::vector<ConnectivityEntry> entries;

  bool all_connected() const noexcept {
    return std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.connected; });
  }
};

inline ConnectivityEntry connectivity_at(const GridField& f, double lambda, Direction dir, Adjacency adj) {
  const Mask m = threshold_mask(f, lambda, dir);
  const std::size_t count = connected_components(m, adj).count;
  return {lambda, dir, count, count <= 1, static_cast<double>(m.count()) / static_cast<double>(m.cells.size())};
}

/// One entry per lambda, sorted ascending.
inline ConnectivityReport lambda_sweep(const GridField& f, std::vector<double> lambdas, Direction dir,
                                       Adjacency adj = Adjacency::Eight) {
  if (lambdas.empty()) throw InputError("lambda_sweep: empty lambda list");
  std::sort(lambdas.begin(), lambdas.end());
  ConnectivityReport report{adj, {}};
  report.entries.reserve(lambdas.size());
  for (double lambda : lambdas) report.entries.push_back(connectivity_at(f, lambda, dir, adj));
  return report;
}

/// `count` evenly spaced values strictly inside (lo, hi).
inline std::vector<double> interior_levels(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = lo + (hi - lo) * static_cast<double>(k + 1) / static_cast<double>(count + 1);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component counts under the temporal modulation gamma(t).

struct EquiconnectednessEntry {
  double t = 0.0;
  double gamma = 1.0;
  double lambda = 0.0;
  Direction direction = Direction::Super;
  std::size_t dynamic_count = 0;  // gamma(t) J_reg at lambda
  std::size_t scaled_count = 0;   // J_reg at lambda / gamma(t)
};

struct EquiconnectednessReport {
  std::vector<EquiconnectednessEntry> entries;
  std::vector<EquiconnectednessEntry> mismatches;
};

struct GridSpec {
  Box2 box{};
  std::size_t nx = 101;
  std::size_t ny = 101;
  Adjacency adjacency = Adjacency::Eight;
};

/// For every t and lambda, compares the component count of the modulated
/// cost gamma(t) J_reg at level lambda against J_reg at level lambda / gamma(t).
/// The modulated field is produced by `dynamic_at(t)`, which should return
/// the 2-D cost at epoch t sampled over the same grid.
inline EquiconnectednessReport equiconnectedness_check(const Objective& reg, double kappa, double delta,
                                                       const std::vector<double>& t_list,
                                                       const std::vector<double>& lambdas, const GridSpec& grid,
                                                       const std::vector<Direction>& directions,
                                                       const std::function<Objective(double)>& dynamic_at = {}) {
  if (t_list.empty() || lambdas.empty()) throw InputError("equiconnectedness_check: empty t or lambda list");
  const GridField base = sample_grid(reg, grid.box, grid.nx, grid.ny);
  EquiconnectednessReport report;
  for (double t : t_list) {
    const double gamma = temporal_modulation(t, kappa, delta);
    const Objective dyn = dynamic_at ? dynamic_at(t) : scaled(reg, gamma);
    const GridField dyn_field = sample_grid(dyn, grid.box, grid.nx, grid.ny);
    for (Direction dir : directions) {
      for (double lambda : lambdas) {
        EquiconnectednessEntry e{t, gamma, lambda, dir, 0, 0};
        e.dynamic_count = connected_components(threshold_mask(dyn_field, lambda, dir), grid.adjacency).count;
        e.scaled_count = connected_components(threshold_mask(base, lambda / gamma, dir), grid.adjacency).count;
        report.entries.push_back(e);
        if (e.dynamic_count != e.scaled_count) report.mismatches.push_back(e);
      }
    }
  }
  return report;
}

inline EquiconnectednessReport equiconnectedness_check(const Objective& reg, double kappa, double delta,
                                                       const std::vector<double>& t_list,
                                                       const std::vector<double>& lambdas, const GridSpec& grid) {
  return equiconnectedness_check(reg, kappa, delta, t_list, lambdas, grid, {Direction::Super, Direction::Sub});
}

}  // namespace levelrate
