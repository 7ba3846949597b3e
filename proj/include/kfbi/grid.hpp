#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/fft.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/parallel.hpp"

namespace kfbi {

/// Square bounding box [xlo, xhi] x [ylo, yhi].
struct Box {
  double xlo = -1.0, xhi = 1.0, ylo = -1.0, yhi = 1.0;

  static Box square(double lo, double hi) { return {lo, hi, lo, hi}; }
  double width() const { return xhi - xlo; }
};

/// Uniform node lattice p_ij = (xlo + i h, ylo + j h), i, j = 0..M, stored
/// row-major with flat index i + j (M + 1).
struct CartesianGrid {
  double xlo = 0.0;
  double ylo = 0.0;
  double h = 1.0;
  int intervals = 1;  ///< M

  CartesianGrid() = default;
  CartesianGrid(const Box& box, int m) : xlo(box.xlo), ylo(box.ylo), intervals(m) {
    if (m < 2) throw ConfigError("grid needs at least 2 intervals");
    if (!(box.width() > 0.0)) throw ConfigError("bounding box must have positive width");
    if (std::abs(box.width() - (box.yhi - box.ylo)) > 1e-14 * std::max(1.0, box.width())) {
      throw ConfigError("bounding box must be square");
    }
    h = box.width() / m;
  }

  int side() const noexcept { return intervals + 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(side()) * side(); }
  std::size_t index(int i, int j) const noexcept {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(j) * static_cast<std::size_t>(side());
  }
  int column(std::size_t k) const noexcept { return static_cast<int>(k % static_cast<std::size_t>(side())); }
  int row(std::size_t k) const noexcept { return static_cast<int>(k / static_cast<std::size_t>(side())); }
  double x(int i) const noexcept { return xlo + i * h; }
  double y(int j) const noexcept { return ylo + j * h; }
  Vec2 node(int i, int j) const noexcept { return {x(i), y(j)}; }
  Vec2 node(std::size_t k) const noexcept { return node(column(k), row(k)); }
  bool on_box_edge(int i, int j) const noexcept {
    return i == 0 || j == 0 || i == intervals || j == intervals;
  }
};

/// Scalar field on all grid nodes.
template <class T>
class GridField {
 public:
  GridField() = default;
  explicit GridField(const CartesianGrid& grid, T value = T{}) : grid_(grid), values_(grid.size(), value) {}

  const CartesianGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  T& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  const T& operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  T& operator[](std::size_t k) { return values_[k]; }
  const T& operator[](std::size_t k) const { return values_[k]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  void fill(T value) { std::fill(values_.begin(), values_.end(), value); }

 private:
  CartesianGrid grid_;
  std::vector<T> values_;
};

enum class Arm : std::uint8_t { east, west, north, south };

struct NodeIndex {
  int i = 0;
  int j = 0;
  friend bool operator==(NodeIndex, NodeIndex) = default;
};

/// East, west, north and south neighbors of an interior lattice node.
inline std::array<NodeIndex, 4> neighbors(const CartesianGrid& grid, int i, int j) {
  if (i <= 0 || j <= 0 || i >= grid.intervals || j >= grid.intervals) {
    throw ConfigError("neighbors: node (" + std::to_string(i) + ", " + std::to_string(j) +
                      ") is not strictly inside the lattice");
  }
  return {NodeIndex{i + 1, j}, NodeIndex{i - 1, j}, NodeIndex{i, j + 1}, NodeIndex{i, j - 1}};
}

enum class Axis : std::uint8_t { x, y };

/// Crossing of the boundary with one grid edge. `lower` is the west (x axis)
/// or south (y axis) endpoint.
struct Intersection {
  Vec2 point;
  double theta = 0.0;
  Axis axis = Axis::x;
  std::size_t lower = 0;
  std::size_t upper = 0;
};

/// An irregular node's view of one crossed stencil arm.
struct IntersectionRecord {
  std::size_t node = 0;
  Arm arm = Arm::east;
  std::size_t intersection = 0;
};

/// Grid plus node classification and per-node intersection records.
struct EmbeddedGrid {
  CartesianGrid grid;
  std::vector<Region> side;
  std::vector<std::uint8_t> irregular;
  std::vector<Intersection> intersections;
  /// Irregular nodes in increasing flat index; records of irregular_nodes[k]
  /// are records[record_offsets[k] .. record_offsets[k + 1]).
  std::vector<std::size_t> irregular_nodes;
  std::vector<std::size_t> record_offsets;
  std::vector<IntersectionRecord> records;
  std::size_t interior_count = 0;
  std::size_t irregular_interior_count = 0;

  bool is_interior(std::size_t k) const { return side[k] == Region::interior; }
};

namespace detail {

inline void check_clearance(const Curve& curve, const Box& box, double h) {
  constexpr int samples = 4096;
  double clearance = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const Vec2 p = curve.position(two_pi * s / samples);
    clearance = std::min({clearance, p.x - box.xlo, box.xhi - p.x, p.y - box.ylo, box.yhi - p.y});
  }
  if (clearance < 2.0 * h) {
    throw GeometryError("boundary curve is closer than 2h to the bounding box (clearance " +
                        std::to_string(clearance) + ", h " + std::to_string(h) + ")");
  }
}

inline int crossing_count(const Curve& curve, Vec2 a, Vec2 b) {
  constexpr int samples = 16;
  int count = 0;
  Region prev = classify_point(curve, a);
  for (int s = 1; s <= samples; ++s) {
    const Region r = classify_point(curve, a + (static_cast<double>(s) / samples) * (b - a));
    if (r != prev) ++count;
    prev = r;
  }
  return count;
}

}  // namespace detail

/// Builds the lattice on `box`, classifies every node against `curve` and
/// computes one intersection per sign-changing grid edge, recorded on both
/// of its endpoint nodes.
inline EmbeddedGrid build_grid(const Box& box, int m, const Curve& curve, Executor& exec) {
  if (m < 16 || !is_power_of_two(static_cast<std::size_t>(m))) {
    throw ConfigError("grid size M must be a power of two and at least 16 (got " + std::to_string(m) + ")");
  }
  EmbeddedGrid eg;
  eg.grid = CartesianGrid(box, m);
  const CartesianGrid& g = eg.grid;
  detail::check_clearance(curve, box, g.h);

  const std::size_t n = g.size();
  eg.side.assign(n, Region::exterior);
  exec.dispatch(kernels::classify_nodes, n, [&](std::size_t k) {
    const int i = g.column(k), j = g.row(k);
    eg.side[k] = g.on_box_edge(i, j) ? Region::exterior : classify_point(curve, g.node(i, j));
  });

  // Sign-changing edges in a fixed (deterministic) order: x edges then y edges.
  for (int j = 0; j <= m; ++j) {
    for (int i = 0; i < m; ++i) {
      const std::size_t a = g.index(i, j), b = g.index(i + 1, j);
      if (eg.side[a] != eg.side[b]) eg.intersections.push_back({{}, 0.0, Axis::x, a, b});
    }
  }
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i <= m; ++i) {
      const std::size_t a = g.index(i, j), b = g.index(i, j + 1);
      if (eg.side[a] != eg.side[b]) eg.intersections.push_back({{}, 0.0, Axis::y, a, b});
    }
  }
  // Failures are recorded per edge and raised as geometry errors afterwards.
  std::vector<std::uint8_t> failed(eg.intersections.size(), 0);
  exec.dispatch(kernels::edge_intersections, eg.intersections.size(), [&](std::size_t e) {
    Intersection& x = eg.intersections[e];
    const Vec2 a = g.node(x.lower), b = g.node(x.upper);
    if (detail::crossing_count(curve, a, b) > 1) {
      failed[e] = 1;
      return;
    }
    try {
      const EdgeCrossing c = edge_intersection(curve, a, b, g.h);
      x.point = c.point;
      x.theta = c.theta;
    } catch (const GeometryError&) {
      failed[e] = 2;
    }
  });
  for (std::size_t e = 0; e < failed.size(); ++e) {
    if (failed[e] == 0) continue;
    const Vec2 a = g.node(eg.intersections[e].lower);
    const std::string where = " near (" + std::to_string(a.x) + ", " + std::to_string(a.y) + ")";
    if (failed[e] == 1) throw GeometryError("grid edge crossed more than once by the boundary" + where + "; increase M");
    throw GeometryError("edge intersection failed" + where);
  }

  eg.irregular.assign(n, 0);
  for (const auto& x : eg.intersections) {
    eg.irregular[x.lower] = 1;
    eg.irregular[x.upper] = 1;
  }
  // Per-node record lists (decoupled strategy: each node owns its arms).
  std::vector<std::array<long, 4>> arms(n, {-1, -1, -1, -1});
  for (std::size_t e = 0; e < eg.intersections.size(); ++e) {
    const auto& x = eg.intersections[e];
    if (x.axis == Axis::x) {
      arms[x.lower][static_cast<int>(Arm::east)] = static_cast<long>(e);
      arms[x.upper][static_cast<int>(Arm::west)] = static_cast<long>(e);
    } else {
      arms[x.lower][static_cast<int>(Arm::north)] = static_cast<long>(e);
      arms[x.upper][static_cast<int>(Arm::south)] = static_cast<long>(e);
    }
  }
  eg.record_offsets.push_back(0);
  for (std::size_t k = 0; k < n; ++k) {
    if (eg.side[k] == Region::interior) ++eg.interior_count;
    if (!eg.irregular[k]) continue;
    if (eg.side[k] == Region::interior) ++eg.irregular_interior_count;
    eg.irregular_nodes.push_back(k);
    for (int a = 0; a < 4; ++a) {
      if (arms[k][a] >= 0) {
        eg.records.push_back({k, static_cast<Arm>(a), static_cast<std::size_t>(arms[k][a])});
      }
    }
    eg.record_offsets.push_back(eg.records.size());
  }
  return eg;
}

}  // namespace kfbi
