#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/fast_solver.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/interface.hpp"
#include "kfbi/parallel.hpp"

namespace kfbi {

/// One-sided (interior) limits of u and its gradient at a control point.
template <class T>
struct Trace {
  T u{}, ux{}, uy{};

  T normal_derivative(Vec2 n) const { return ux * n.x + uy * n.y; }
};

/// Six-node interpolation stencil around a control point. `weights[r]` maps
/// the six nodal values to the r-th Taylor coefficient (u, h u_x, h u_y).
struct TraceStencil {
  std::array<std::size_t, 6> nodes{};
  std::array<Vec2, 6> offsets{};  ///< node - z, unscaled
  std::array<std::array<double, 6>, 3> weights{};
  double condition = 0.0;
};

inline constexpr double max_stencil_condition = 1e12;

namespace detail {

// Inverse of a 6x6 matrix by Gauss-Jordan elimination with column pivoting
// (row exchanges chosen by the largest entry in the pivot column).
inline std::array<std::array<double, 6>, 6> invert6(std::array<std::array<double, 6>, 6> a) {
  std::array<std::array<double, 6>, 6> inv{};
  for (int i = 0; i < 6; ++i) inv[i][i] = 1.0;
  for (int c = 0; c < 6; ++c) {
    int piv = c;
    for (int r = c + 1; r < 6; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) piv = r;
    }
    if (a[piv][c] == 0.0) throw SolverError("trace stencil matrix is singular");
    std::swap(a[c], a[piv]);
    std::swap(inv[c], inv[piv]);
    const double p = a[c][c];
    for (int k = 0; k < 6; ++k) {
      a[c][k] /= p;
      inv[c][k] /= p;
    }
    for (int r = 0; r < 6; ++r) {
      if (r == c || a[r][c] == 0.0) continue;
      const double f = a[r][c];
      for (int k = 0; k < 6; ++k) {
        a[r][k] -= f * a[c][k];
        inv[r][k] -= f * inv[c][k];
      }
    }
  }
  return inv;
}

inline double norm_inf6(const std::array<std::array<double, 6>, 6>& a) {
  double m = 0.0;
  for (const auto& row : a) {
    double s = 0.0;
    for (double v : row) s += std::abs(v);
    m = std::max(m, s);
  }
  return m;
}

}  // namespace detail

/// Builds the stencil for z: the four corners of the cell containing z plus
/// the two outward axis neighbors of the corner nearest z (ties go to the
/// lower/left corner).
inline TraceStencil make_trace_stencil(const CartesianGrid& g, Vec2 z) {
  const double sx = (z.x - g.xlo) / g.h, sy = (z.y - g.ylo) / g.h;
  const int i0 = static_cast<int>(std::floor(sx)), j0 = static_cast<int>(std::floor(sy));
  if (i0 < 1 || j0 < 1 || i0 + 2 > g.intervals || j0 + 2 > g.intervals) {
    throw GeometryError("control point too close to the bounding box for the trace stencil");
  }
  const bool left = sx - i0 <= 0.5, low = sy - j0 <= 0.5;
  const int ci = left ? i0 : i0 + 1, cj = low ? j0 : j0 + 1;
  const int ox = left ? i0 - 1 : i0 + 2, oy = low ? j0 - 1 : j0 + 2;
  const std::array<NodeIndex, 6> idx{NodeIndex{i0, j0}, NodeIndex{i0 + 1, j0}, NodeIndex{i0, j0 + 1},
                                     NodeIndex{i0 + 1, j0 + 1}, NodeIndex{ox, cj}, NodeIndex{ci, oy}};
  TraceStencil st;
  std::array<std::array<double, 6>, 6> a{};
  for (int r = 0; r < 6; ++r) {
    st.nodes[r] = g.index(idx[r].i, idx[r].j);
    st.offsets[r] = g.node(idx[r].i, idx[r].j) - z;
    const double xi = st.offsets[r].x / g.h, eta = st.offsets[r].y / g.h;
    a[r] = {1.0, xi, eta, 0.5 * xi * xi, xi * eta, 0.5 * eta * eta};
  }
  const auto inv = detail::invert6(a);
  st.condition = detail::norm_inf6(a) * detail::norm_inf6(inv);
  if (!(st.condition <= max_stencil_condition)) {
    throw SolverError("trace stencil is ill-conditioned (condition " + std::to_string(st.condition) + ")");
  }
  for (int r = 0; r < 3; ++r) st.weights[r] = inv[r];
  return st;
}

/// Value of the extended jump at offset (xi, eta) from the control point.
template <class T>
T jump_taylor(const Jump<T>& j, Vec2 d) {
  return j.u + j.ux * d.x + j.uy * d.y + 0.5 * j.uxx * (d.x * d.x) + j.uxy * (d.x * d.y) +
         0.5 * j.uyy * (d.y * d.y);
}

/// Precomputed stencils for every control point.
class TraceExtractor {
 public:
  TraceExtractor() = default;
  TraceExtractor(const EmbeddedGrid& eg, const ControlPoints& points) : grid_(eg.grid) {
    stencils_.reserve(points.size());
    exterior_.reserve(points.size());
    for (const ControlPoint& z : points) {
      stencils_.push_back(make_trace_stencil(eg.grid, z.position));
      std::array<bool, 6> ext{};
      for (int r = 0; r < 6; ++r) ext[r] = !eg.is_interior(stencils_.back().nodes[r]);
      exterior_.push_back(ext);
    }
  }

  std::size_t size() const noexcept { return stencils_.size(); }
  const TraceStencil& stencil(std::size_t i) const { return stencils_[i]; }

  /// Interior traces at control point i. Exterior stencil values are shifted
  /// to the interior side by the Taylor-extended jump at z.
  template <class T>
  Trace<T> extract(const GridField<T>& u, const Jump<T>& jump, std::size_t i) const {
    const TraceStencil& st = stencils_[i];
    std::array<T, 6> v;
    for (int r = 0; r < 6; ++r) {
      v[r] = u[st.nodes[r]];
      if (exterior_[i][r]) v[r] += jump_taylor(jump, st.offsets[r]);
    }
    std::array<T, 3> c{};
    for (int q = 0; q < 3; ++q) {
      T acc{};
      for (int r = 0; r < 6; ++r) acc += st.weights[q][r] * v[r];
      c[q] = acc;
    }
    return {c[0], c[1] / grid_.h, c[2] / grid_.h};
  }

  template <class T>
  std::vector<Trace<T>> extract_all(const GridField<T>& u, const JumpSet<T>& jumps, Executor& exec) const {
    if (jumps.size() != stencils_.size()) throw ConfigError("jump set does not match the control points");
    std::vector<Trace<T>> out(stencils_.size());
    exec.dispatch(kernels::extract_traces, out.size(), [&](std::size_t i) { out[i] = extract(u, jumps[i], i); });
    return out;
  }

 private:
  CartesianGrid grid_;
  std::vector<TraceStencil> stencils_;
  std::vector<std::array<bool, 6>> exterior_;
};

/// Traces (u+, u_x+, u_y+) at control point z, with `jumps` evaluated at z.
template <class T>
Trace<T> extract_trace(const GridField<T>& u, const Jump<T>& jumps, const ControlPoint& z, const EmbeddedGrid& eg) {
  const TraceStencil st = make_trace_stencil(eg.grid, z.position);
  std::array<T, 6> v;
  for (int r = 0; r < 6; ++r) {
    v[r] = u[st.nodes[r]];
    if (!eg.is_interior(st.nodes[r])) v[r] += jump_taylor(jumps, st.offsets[r]);
  }
  std::array<T, 3> c{};
  for (int q = 0; q < 3; ++q) {
    for (int r = 0; r < 6; ++r) c[q] += st.weights[q][r] * v[r];
  }
  return {c[0], c[1] / eg.grid.h, c[2] / eg.grid.h};
}

/// Everything that depends only on the geometry and grid: curve, control
/// points, embedded grid, box solver and trace stencils. Built once per run.
struct Domain {
  Curve curve;
  ControlPoints points;
  EmbeddedGrid grid;
  BoxSolver box;
  TraceExtractor traces;

  Domain(Curve c, const Box& bounds, int m, BoxBoundary box_bc, Executor& exec)
      : curve(std::move(c)),
        points(curve, static_cast<std::size_t>(m)),
        grid(build_grid(bounds, m, curve, exec)),
        box(grid.grid, box_bc),
        traces(grid, points) {}

  const CartesianGrid& lattice() const noexcept { return grid.grid; }
};

enum class BoundaryKind { dirichlet, neumann };

inline std::string to_string(BoundaryKind k) { return k == BoundaryKind::dirichlet ? "dirichlet" : "neumann"; }

/// Interior BVP  Lap u - kappa u = f in Omega, with u = g (Dirichlet) or
/// du/dn = g (Neumann) on Gamma.
template <class T>
struct BvpProblem {
  T kappa{};
  GridField<T> source;      ///< f on the grid; values outside Omega are ignored
  std::vector<T> f_gamma;   ///< interior limit of f at the control points
  BoundaryKind kind = BoundaryKind::dirichlet;
  std::vector<T> data;      ///< g at the control points
  double gamma = 0.8;
  double tolerance = 1e-8;
  int max_iterations = 200;
  std::vector<T> initial_density;  ///< empty means zero

  void validate(std::size_t points) const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("Richardson parameter gamma must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw ConfigError("Richardson tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("Richardson max_iterations must be at least 1");
    if (data.size() != points) throw ConfigError("boundary data length does not match the control points");
    if (f_gamma.size() != points) throw ConfigError("boundary source length does not match the control points");
    if (!initial_density.empty() && initial_density.size() != points) {
      throw ConfigError("initial density length does not match the control points");
    }
  }
};

template <class T>
struct BvpSolution {
  GridField<T> u;                  ///< solution on interior nodes, zero outside
  std::vector<T> density;          ///< phi (Dirichlet) or psi (Neumann)
  std::vector<T> trace;            ///< u+ at the control points
  std::vector<T> normal_trace;     ///< du+/dn at the control points
  int iterations = 0;
  double residual = 0.0;           ///< max-norm of the last density update
  std::vector<double> history;     ///< residual per iteration
};

namespace detail {
template <class T>
double magnitude(T v) {
  return std::abs(v);
}
}  // namespace detail

/// Richardson iteration on the second-kind boundary integral equation. Each
/// iteration solves one interface problem and extracts the interior trace:
///   Dirichlet: phi <- phi + gamma (g - u+),      Phi = phi, Psi = 0
///   Neumann:   psi <- psi + gamma (g - du+/dn),  Phi = 0,   Psi = psi
/// Stops when the max-norm of the update is at most tolerance * max(1, |u|_inf),
/// which is the plain absolute test whenever the solution is O(1).
template <class T>
BvpSolution<T> richardson_solve(const BvpProblem<T>& problem, const Domain& domain, Executor& exec) {
  const std::size_t n = domain.points.size();
  problem.validate(n);
  if (problem.source.size() != domain.lattice().size()) throw ConfigError("BVP source has the wrong size");

  InterfaceData<T> data;
  data.kappa = problem.kappa;
  data.source = problem.source;
  data.f_gamma = problem.f_gamma;
  std::vector<T> density = problem.initial_density.empty() ? std::vector<T>(n, T{}) : problem.initial_density;
  const std::vector<T> zero(n, T{});
  const bool dirichlet = problem.kind == BoundaryKind::dirichlet;

  BvpSolution<T> sol;
  std::vector<Trace<T>> traces;
  InterfaceSolution<T> is;
  for (int it = 1;; ++it) {
    data.phi = dirichlet ? density : zero;
    data.psi = dirichlet ? zero : density;
    is = solve_interface(data, domain.points, domain.grid, domain.box, exec);
    traces = domain.traces.extract_all(is.u, is.jumps, exec);

    std::vector<double> change(n);
    exec.dispatch(kernels::density_update, n, [&](std::size_t i) {
      const T observed = dirichlet ? traces[i].u : traces[i].normal_derivative(domain.points[i].normal);
      const T delta = problem.gamma * (problem.data[i] - observed);
      density[i] += delta;
      change[i] = detail::magnitude(delta);
    });
    const double residual = *std::max_element(change.begin(), change.end());
    double scale = 1.0;
    for (std::size_t k = 0; k < is.u.size(); ++k) scale = std::max(scale, detail::magnitude(is.u[k]));
    sol.history.push_back(residual);
    sol.iterations = it;
    sol.residual = residual;
    if (!std::isfinite(residual)) {
      throw ConvergenceError("Richardson iteration diverged (non-finite update)", it, residual);
    }
    if (residual <= problem.tolerance * scale) break;
    if (it >= problem.max_iterations) {
      throw ConvergenceError("Richardson iteration did not converge in " + std::to_string(it) +
                                 " iterations (last update " + std::to_string(residual) + ")",
                             it, residual);
    }
  }
  // The returned field and traces belong to the last solve, whose density
  // differs from the converged one by at most the tolerance.
  sol.u = std::move(is.u);
  for (std::size_t k = 0; k < sol.u.size(); ++k) {
    if (!domain.grid.is_interior(k)) sol.u[k] = T{};
  }
  sol.density = std::move(density);
  sol.trace.resize(n);
  sol.normal_trace.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    sol.trace[i] = traces[i].u;
    sol.normal_trace[i] = traces[i].normal_derivative(domain.points[i].normal);
  }
  return sol;
}

}  // namespace kfbi
