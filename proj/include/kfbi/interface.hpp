#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/fast_solver.hpp"
#include "kfbi/fft.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/parallel.hpp"

namespace kfbi {

/// Jumps [.] = (interior limit) - (exterior limit) of u and its derivatives.
template <class T>
struct Jump {
  T u{}, ux{}, uy{}, uxx{}, uxy{}, uyy{};
};

/// Jump values at every control point.
template <class T>
struct JumpSet {
  std::vector<Jump<T>> values;

  std::size_t size() const noexcept { return values.size(); }
  const Jump<T>& operator[](std::size_t i) const { return values[i]; }
};

/// Right-hand side data of the interface problem
///   Lap u - kappa u = F~ in B \ Gamma,  [u] = Phi,  [u_n] = Psi on Gamma.
/// `source` may hold any values outside the domain; they are ignored.
template <class T>
struct InterfaceData {
  T kappa{};
  GridField<T> source;
  std::vector<T> phi;      ///< [u] at the control points
  std::vector<T> psi;      ///< [u_n] at the control points
  std::vector<T> f_gamma;  ///< interior limit of the source at the control points
};

namespace detail {

// Solves A x = b for a 3x3 system by Cramer's rule.
template <class T>
std::array<T, 3> solve3(const std::array<std::array<double, 3>, 3>& a, const std::array<T, 3>& b) {
  auto det = [](const std::array<std::array<double, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
  };
  const double d = det(a);
  if (!(std::abs(d) > 1e-12)) throw SolverError("jump system is singular (determinant " + std::to_string(d) + ")");
  std::array<T, 3> x{};
  for (int c = 0; c < 3; ++c) {
    // Column c replaced by b, expanded along that column (cyclic cofactors carry the sign).
    T acc{};
    for (int r = 0; r < 3; ++r) {
      const int r1 = (r + 1) % 3, r2 = (r + 2) % 3;
      const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
      acc += b[r] * (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]);
    }
    x[c] = acc / d;
  }
  return x;
}

}  // namespace detail

/// Jumps of u and its first and second derivatives at each control point,
/// from [u] = Phi, [u_n] = Psi and the jump of the PDE,
/// [u_xx] + [u_yy] = f_Gamma + kappa Phi.
template <class T>
JumpSet<T> compute_jumps(const InterfaceData<T>& data, const ControlPoints& points, Executor& exec) {
  const std::size_t n = points.size();
  if (data.phi.size() != n || data.psi.size() != n || data.f_gamma.size() != n) {
    throw ConfigError("interface densities do not match the control points");
  }
  const auto dphi = differentiate_density<T>(data.phi, points);
  const auto dpsi = differentiate_density<T>(data.psi, points);
  JumpSet<T> out;
  out.values.resize(n);
  exec.dispatch(kernels::jumps_and_corrections, n, [&](std::size_t i) {
    const ControlPoint& z = points[i];
    const double t1 = z.tangent.x, t2 = z.tangent.y;
    const double d1 = z.dtangent_ds.x, d2 = z.dtangent_ds.y;
    Jump<T>& j = out.values[i];
    j.u = data.phi[i];
    // tau1 [u_x] + tau2 [u_y] = Phi_s and tau2 [u_x] - tau1 [u_y] = Psi.
    j.ux = t1 * dphi.ds[i] + t2 * data.psi[i];
    j.uy = t2 * dphi.ds[i] - t1 * data.psi[i];
    const std::array<std::array<double, 3>, 3> a{{
        {t1 * t1, 2.0 * t1 * t2, t2 * t2},
        {t1 * t2, t2 * t2 - t1 * t1, -t1 * t2},
        {1.0, 0.0, 1.0},
    }};
    const std::array<T, 3> b{dphi.dss[i] - d1 * j.ux - d2 * j.uy, dpsi.ds[i] - d2 * j.ux + d1 * j.uy,
                             data.f_gamma[i] + data.kappa * data.phi[i]};
    const auto x = detail::solve3(a, b);
    j.uxx = x[0];
    j.uxy = x[1];
    j.uyy = x[2];
  });
  return out;
}

/// Periodic interpolation of jump values from the control points to an
/// arbitrary curve parameter. Trigonometric for 32 or more points, cubic
/// Lagrange on the four nearest points otherwise.
template <class T>
class JumpInterpolant {
 public:
  using complex = std::complex<double>;
  static constexpr std::size_t trigonometric_threshold = 32;
  static constexpr int fields = 6;

  explicit JumpInterpolant(const JumpSet<T>& jumps) : jumps_(&jumps), n_(jumps.size()) {
    if (n_ < 4) throw ConfigError("jump interpolation needs at least 4 control points");
    dtheta_ = two_pi / static_cast<double>(n_);
    if (n_ >= trigonometric_threshold) build_coefficients();
  }

  std::size_t size() const noexcept { return n_; }

  Jump<T> operator()(double theta) const {
    theta = wrap_angle(theta);
    if (const auto k = exact_node(theta)) return (*jumps_)[*k];
    std::array<T, fields> v{};
    evaluate(theta, {0, 1, 2, 3, 4, 5}, 6, v);
    return {v[0], v[1], v[2], v[3], v[4], v[5]};
  }

  /// ([u], [u_x], [u_xx]) for an x-axis crossing or ([u], [u_y], [u_yy]) for a y-axis one.
  std::array<T, 3> along(Axis axis, double theta) const {
    theta = wrap_angle(theta);
    if (const auto k = exact_node(theta)) {
      const Jump<T>& j = (*jumps_)[*k];
      return axis == Axis::x ? std::array<T, 3>{j.u, j.ux, j.uxx} : std::array<T, 3>{j.u, j.uy, j.uyy};
    }
    std::array<T, fields> v{};
    if (axis == Axis::x) {
      evaluate(theta, {0, 1, 3}, 3, v);
    } else {
      evaluate(theta, {0, 2, 5}, 3, v);
    }
    return {v[0], v[1], v[2]};
  }

 private:
  static T field(const Jump<T>& j, int f) {
    switch (f) {
      case 0: return j.u;
      case 1: return j.ux;
      case 2: return j.uy;
      case 3: return j.uxx;
      case 4: return j.uxy;
      default: return j.uyy;
    }
  }

  std::optional<std::size_t> exact_node(double theta) const {
    const double r = theta / dtheta_;
    const double k = std::round(r);
    if (std::abs(r - k) * dtheta_ < 1e-14) return static_cast<std::size_t>(k) % n_;
    return std::nullopt;
  }

  void build_coefficients() {
    const Fft fft(n_);
    coefficients_.assign(fields, std::vector<complex>(n_));
    for (int f = 0; f < fields; ++f) {
      std::vector<complex> c(n_);
      for (std::size_t j = 0; j < n_; ++j) c[j] = to_complex(field((*jumps_)[j], f));
      fft.forward(c);
      for (auto& x : c) x /= static_cast<double>(n_);
      coefficients_[f] = std::move(c);
    }
  }

  static complex to_complex(T v) {
    if constexpr (is_complex_v<T>) return complex(v.real(), v.imag());
    else return complex(v, 0.0);
  }

  static T from_complex(complex v) {
    if constexpr (is_complex_v<T>) return T(v.real(), v.imag());
    else return v.real();
  }

  void evaluate(double theta, std::array<int, fields> which, int count, std::array<T, fields>& out) const {
    if (n_ < trigonometric_threshold) {
      const double r = theta / dtheta_;
      const long base = static_cast<long>(std::floor(r));
      const double s = r - static_cast<double>(base);
      // Lagrange weights on nodes base-1 .. base+2.
      const std::array<double, 4> w{-s * (s - 1.0) * (s - 2.0) / 6.0, (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
                                    -(s + 1.0) * s * (s - 2.0) / 2.0, (s + 1.0) * s * (s - 1.0) / 6.0};
      const long n = static_cast<long>(n_);
      for (int q = 0; q < count; ++q) {
        T acc{};
        for (int m = 0; m < 4; ++m) {
          const std::size_t k = static_cast<std::size_t>(((base - 1 + m) % n + n) % n);
          acc += w[m] * field((*jumps_)[k], which[q]);
        }
        out[q] = acc;
      }
      return;
    }
    const std::size_t half = n_ / 2;
    const complex w(std::cos(theta), std::sin(theta));
    std::array<complex, fields> acc{};
    complex e(1.0, 0.0);  // e^{ik theta}
    for (std::size_t k = 0; k < half; ++k) {
      const complex ec = std::conj(e);
      for (int q = 0; q < count; ++q) {
        const auto& c = coefficients_[which[q]];
        acc[q] += c[k] * e;
        if (k > 0) acc[q] += c[n_ - k] * ec;
      }
      e *= w;
    }
    // Nyquist mode split evenly between +n/2 and -n/2.
    const double nyquist = std::cos(static_cast<double>(half) * theta);
    for (int q = 0; q < count; ++q) out[q] = from_complex(acc[q] + coefficients_[which[q]][half] * nyquist);
  }

  const JumpSet<T>* jumps_;
  std::size_t n_;
  double dtheta_ = 0.0;
  std::vector<std::vector<complex>> coefficients_;
};

/// Interpolated jump tuple at curve parameter theta.
template <class T>
Jump<T> jump_at_point(const JumpSet<T>& jumps, double theta) {
  return JumpInterpolant<T>(jumps)(theta);
}

/// Taylor correction term for one crossed arm: the jump extended from the
/// crossing to the neighbor, J = [u] + [u_d] d + 1/2 [u_dd] d^2.
template <class T>
T arm_jump(const std::array<T, 3>& j, double d) {
  return j[0] + j[1] * d + 0.5 * j[2] * (d * d);
}

/// Per-node correction values, aligned with EmbeddedGrid::irregular_nodes.
template <class T>
struct Corrections {
  std::vector<T> values;
};

/// Corrections C at every irregular node: for each crossed arm toward
/// neighbor q through crossing xi, C -= J/h^2 at an interior node and
/// C += J/h^2 at an exterior node, with d = coord(q) - xi.
template <class T>
Corrections<T> corrections(const JumpSet<T>& jumps, const EmbeddedGrid& eg, Executor& exec) {
  const JumpInterpolant<T> interp(jumps);
  const CartesianGrid& g = eg.grid;
  std::vector<std::array<T, 3>> at(eg.intersections.size());
  exec.dispatch(kernels::jumps_and_corrections, at.size(), [&](std::size_t e) {
    const Intersection& x = eg.intersections[e];
    at[e] = interp.along(x.axis, x.theta);
  });
  Corrections<T> out;
  out.values.assign(eg.irregular_nodes.size(), T{});
  const double inv_h2 = 1.0 / (g.h * g.h);
  exec.dispatch(kernels::jumps_and_corrections, eg.irregular_nodes.size(), [&](std::size_t k) {
    const std::size_t node = eg.irregular_nodes[k];
    const double sign = eg.is_interior(node) ? -1.0 : 1.0;
    T c{};
    for (std::size_t r = eg.record_offsets[k]; r < eg.record_offsets[k + 1]; ++r) {
      const IntersectionRecord& rec = eg.records[r];
      const Intersection& x = eg.intersections[rec.intersection];
      const std::size_t q = x.lower == node ? x.upper : x.lower;
      const Vec2 pq = g.node(q);
      const double d = x.axis == Axis::x ? pq.x - x.point.x : pq.y - x.point.y;
      c += (sign * inv_h2) * arm_jump(at[rec.intersection], d);
    }
    out.values[k] = c;
  });
  return out;
}

template <class T>
struct InterfaceSolution {
  GridField<T> u;
  JumpSet<T> jumps;
};

/// Corrected right-hand side F~ + C (F~ is the source masked to the domain).
template <class T>
GridField<T> corrected_rhs(const InterfaceData<T>& data, const JumpSet<T>& jumps, const EmbeddedGrid& eg,
                           Executor& exec) {
  if (data.source.size() != eg.grid.size()) throw ConfigError("interface source has the wrong size");
  GridField<T> rhs(eg.grid);
  exec.dispatch(kernels::rhs_update, rhs.size(), [&](std::size_t k) {
    rhs[k] = eg.is_interior(k) ? data.source[k] : T{};
  });
  const Corrections<T> c = corrections(jumps, eg, exec);
  for (std::size_t k = 0; k < eg.irregular_nodes.size(); ++k) rhs[eg.irregular_nodes[k]] += c.values[k];
  return rhs;
}

/// Solves the interface problem on the box: U = solve_box(F~ + C).
template <class T>
InterfaceSolution<T> solve_interface(const InterfaceData<T>& data, const ControlPoints& points,
                                     const EmbeddedGrid& eg, const BoxSolver& box, Executor& exec) {
  InterfaceSolution<T> out;
  out.jumps = compute_jumps(data, points, exec);
  const GridField<T> rhs = corrected_rhs(data, out.jumps, eg, exec);
  out.u = GridField<T>(eg.grid);
  box.solve(data.kappa, rhs, out.u, exec);
  return out;
}

}  // namespace kfbi
