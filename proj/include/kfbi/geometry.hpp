#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "kfbi/errors.hpp"

namespace kfbi {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend constexpr Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend constexpr Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend constexpr Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(Vec2, Vec2) = default;
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

/// Wraps an angle into [0, 2pi).
inline double wrap_angle(double theta) {
  double t = std::fmod(theta, two_pi);
  if (t < 0.0) t += two_pi;
  if (t >= two_pi) t -= two_pi;
  return t;
}

/// Differential geometry of the boundary at one parameter value.
///
/// The curve is oriented counter-clockwise, so the outward normal is the
/// tangent rotated clockwise: n = (t_y, -t_x).
struct CurvePoint {
  Vec2 position;
  Vec2 tangent;
  Vec2 normal;
  Vec2 dtangent_ds;  ///< (tau1', tau2') with respect to arc length
  double speed = 0.0;   ///< ds/dtheta
  double dspeed = 0.0;  ///< d(ds/dtheta)/dtheta
};

enum class CurveKind { circle, ellipse, star, spline };

inline std::string to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::circle: return "circle";
    case CurveKind::ellipse: return "ellipse";
    case CurveKind::star: return "star";
    case CurveKind::spline: return "spline";
  }
  return "unknown";
}

namespace detail {

struct Derivs {
  Vec2 r, dr, ddr;
};

// x = center + rho(theta) (cos theta, sin theta), rho = scale [(1 - c) + c cos(k theta)]
struct PolarShape {
  double scale = 1.0;
  double c = 0.0;
  int lobes = 0;
  Vec2 center;

  double radius(double theta) const {
    return scale * ((1.0 - c) + c * std::cos(lobes * theta));
  }

  Derivs derivs(double theta) const {
    const double k = lobes;
    const double rho = radius(theta);
    const double drho = -scale * c * k * std::sin(k * theta);
    const double ddrho = -scale * c * k * k * std::cos(k * theta);
    const double cs = std::cos(theta), sn = std::sin(theta);
    return {center + Vec2{rho * cs, rho * sn},
            {drho * cs - rho * sn, drho * sn + rho * cs},
            {ddrho * cs - 2.0 * drho * sn - rho * cs, ddrho * sn + 2.0 * drho * cs - rho * sn}};
  }

  double level_set(Vec2 p) const {
    const Vec2 d = p - center;
    const double r = norm(d);
    if (r == 0.0) return -radius(0.0);
    return r - radius(std::atan2(d.y, d.x));
  }

  Vec2 gradient(Vec2 p) const {
    const Vec2 d = p - center;
    const double r2 = dot(d, d);
    if (r2 == 0.0) return {0.0, 0.0};
    const double r = std::sqrt(r2);
    const double theta = std::atan2(d.y, d.x);
    const double drho = -scale * c * lobes * std::sin(lobes * theta);
    // grad(theta) = (-y, x) / r^2
    return {d.x / r + drho * d.y / r2, d.y / r - drho * d.x / r2};
  }

  double parameter_of(Vec2 p) const {
    const Vec2 d = p - center;
    return wrap_angle(std::atan2(d.y, d.x));
  }
};

struct EllipseShape {
  double a = 1.0;
  double b = 1.0;
  Vec2 center;

  Derivs derivs(double theta) const {
    const double cs = std::cos(theta), sn = std::sin(theta);
    return {center + Vec2{a * cs, b * sn}, {-a * sn, b * cs}, {-a * cs, -b * sn}};
  }

  double level_set(Vec2 p) const {
    const Vec2 d = p - center;
    return (d.x / a) * (d.x / a) + (d.y / b) * (d.y / b) - 1.0;
  }

  Vec2 gradient(Vec2 p) const {
    const Vec2 d = p - center;
    return {2.0 * d.x / (a * a), 2.0 * d.y / (b * b)};
  }

  double parameter_of(Vec2 p) const {
    const Vec2 d = p - center;
    return wrap_angle(std::atan2(d.y / b, d.x / a));
  }
};

// Periodic C2 cubic spline through points at equispaced parameters 2 pi i / n.
struct SplineShape {
  std::vector<Vec2> points;
  std::vector<Vec2> second;  // second derivatives at the knots
  std::vector<Vec2> polyline;  // dense samples for inside tests and projection
  std::vector<double> polyline_theta;
  static constexpr int samples_per_segment = 16;

  double spacing() const { return two_pi / static_cast<double>(points.size()); }

  Derivs derivs(double theta) const {
    const std::size_t n = points.size();
    const double d = spacing();
    theta = wrap_angle(theta);
    std::size_t i = std::min(static_cast<std::size_t>(theta / d), n - 1);
    const std::size_t j = (i + 1) % n;
    const double a = (static_cast<double>(i) + 1.0) * d - theta;  // distance to right knot
    const double b = theta - static_cast<double>(i) * d;          // distance to left knot
    auto eval = [&](double pi, double pj, double mi, double mj) {
      const double ci = pi / d - mi * d / 6.0;
      const double cj = pj / d - mj * d / 6.0;
      const double v = mi * a * a * a / (6.0 * d) + mj * b * b * b / (6.0 * d) + ci * a + cj * b;
      const double dv = -mi * a * a / (2.0 * d) + mj * b * b / (2.0 * d) - ci + cj;
      const double ddv = mi * a / d + mj * b / d;
      return std::array<double, 3>{v, dv, ddv};
    };
    const auto x = eval(points[i].x, points[j].x, second[i].x, second[j].x);
    const auto y = eval(points[i].y, points[j].y, second[i].y, second[j].y);
    return {{x[0], y[0]}, {x[1], y[1]}, {x[2], y[2]}};
  }

  bool inside(Vec2 p) const {
    bool in = false;
    const std::size_t n = polyline.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const Vec2 a = polyline[i], b = polyline[j];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double xc = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
        if (p.x < xc) in = !in;
      }
    }
    return in;
  }

  double parameter_of(Vec2 p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < polyline.size(); ++i) {
      const Vec2 d = polyline[i] - p;
      const double dd = dot(d, d);
      if (dd < best_d) {
        best_d = dd;
        best = i;
      }
    }
    double theta = polyline_theta[best];
    const double step = spacing() / samples_per_segment;
    // Newton on g(theta) = (S(theta) - p) . S'(theta), kept within one sample.
    for (int it = 0; it < 30; ++it) {
      const Derivs s = derivs(theta);
      const Vec2 d = s.r - p;
      const double g = dot(d, s.dr);
      const double dg = dot(s.dr, s.dr) + dot(d, s.ddr);
      if (dg <= 0.0) break;
      const double delta = std::clamp(g / dg, -step, step);
      theta -= delta;
      if (std::abs(delta) < 1e-15) break;
    }
    return wrap_angle(theta);
  }

  /// Signed distance to the foot point. Near the curve the sign comes from the
  /// outward normal there, since the polyline chords cut inside the spline.
  double level_set(Vec2 p) const {
    const Derivs s = derivs(parameter_of(p));
    const Vec2 d = p - s.r;
    const double dist = norm(d);
    const double chord = norm(polyline[1] - polyline[0]);
    if (dist < chord) return cross(s.dr, d) < 0.0 ? dist : -dist;
    return inside(p) ? -dist : dist;
  }

  Vec2 gradient(Vec2 p) const {
    const double e = 1e-7;
    return {(level_set(p + Vec2{e, 0}) - level_set(p - Vec2{e, 0})) / (2 * e),
            (level_set(p + Vec2{0, e}) - level_set(p - Vec2{0, e})) / (2 * e)};
  }
};

inline std::vector<double> solve_periodic_spline_system(std::span<const double> values) {
  // m_{i-1} + 4 m_i + m_{i+1} = 6 (v_{i+1} - 2 v_i + v_{i-1}) / d^2 is circulant:
  // diagonalize with a direct DFT (n is small for user-supplied control polygons).
  const std::size_t n = values.size();
  const double d = two_pi / static_cast<double>(n);
  std::vector<std::complex<double>> rhs_hat(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = 6.0 * (values[(i + 1) % n] - 2.0 * values[i] + values[(i + n - 1) % n]) / (d * d);
      acc += r * std::polar(1.0, -two_pi * static_cast<double>(k * i % n) / static_cast<double>(n));
    }
    rhs_hat[k] = acc / (4.0 + 2.0 * std::cos(two_pi * static_cast<double>(k) / static_cast<double>(n)));
  }
  std::vector<double> m(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::complex<double> acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += rhs_hat[k] * std::polar(1.0, two_pi * static_cast<double>(k * i % n) / static_cast<double>(n));
    }
    m[i] = acc.real() / static_cast<double>(n);
  }
  return m;
}

}  // namespace detail

/// Closed C2 boundary curve with a parametric view theta -> x(theta) on
/// [0, 2pi) and an implicit view phi(x) < 0 inside. Immutable; all queries are
/// thread-safe.
class Curve {
 public:
  static Curve circle(double radius, Vec2 center = {}) {
    if (!(radius > 0.0)) throw GeometryError("circle radius must be positive");
    return Curve(CurveKind::circle, detail::PolarShape{radius, 0.0, 0, center});
  }

  static Curve ellipse(double a, double b, Vec2 center = {}) {
    if (!(a > 0.0 && b > 0.0)) throw GeometryError("ellipse semi-axes must be positive");
    return Curve(CurveKind::ellipse, detail::EllipseShape{a, b, center});
  }

  /// r(theta) = scale [(1 - c) + c cos(lobes theta)].
  static Curve star(double scale, double c, int lobes, Vec2 center = {}) {
    if (!(scale > 0.0)) throw GeometryError("star scale must be positive");
    if (!(c >= 0.0 && c < 0.5)) throw GeometryError("star parameter c must lie in [0, 0.5)");
    if (lobes < 1) throw GeometryError("star lobe count must be positive");
    return Curve(CurveKind::star, detail::PolarShape{scale, c, lobes, center});
  }

  /// Periodic cubic spline through the given points (at least 4). The point
  /// order is reversed if needed so that the curve is counter-clockwise.
  static Curve spline(std::vector<Vec2> points) {
    if (points.size() < 4) throw GeometryError("spline curve needs at least 4 control points");
    double area = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      area += cross(points[i], points[(i + 1) % points.size()]);
    }
    if (area == 0.0) throw GeometryError("spline control polygon has zero area");
    if (area < 0.0) std::reverse(points.begin() + 1, points.end());

    detail::SplineShape s;
    s.points = std::move(points);
    const std::size_t n = s.points.size();
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = s.points[i].x;
      ys[i] = s.points[i].y;
    }
    const auto mx = detail::solve_periodic_spline_system(xs);
    const auto my = detail::solve_periodic_spline_system(ys);
    s.second.resize(n);
    for (std::size_t i = 0; i < n; ++i) s.second[i] = {mx[i], my[i]};
    const std::size_t samples = n * detail::SplineShape::samples_per_segment;
    s.polyline.resize(samples);
    s.polyline_theta.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const double theta = two_pi * static_cast<double>(i) / static_cast<double>(samples);
      s.polyline_theta[i] = theta;
      s.polyline[i] = s.derivs(theta).r;
    }
    return Curve(CurveKind::spline, std::move(s));
  }

  CurveKind kind() const noexcept { return kind_; }

  Vec2 position(double theta) const { return raw(theta).r; }

  /// Position, unit tangent, outward normal and the arc-length derivative of the tangent.
  CurvePoint evaluate(double theta) const {
    if (!std::isfinite(theta)) throw GeometryError("curve parameter must be finite");
    const auto d = raw(wrap_angle(theta));
    const double speed = norm(d.dr);
    if (speed < 1e-14) throw GeometryError("degenerate curve parametrization (|x'(theta)| ~ 0)");
    CurvePoint p;
    p.position = d.r;
    p.speed = speed;
    p.tangent = (1.0 / speed) * d.dr;
    p.normal = {p.tangent.y, -p.tangent.x};
    const double rr = dot(d.dr, d.ddr);
    p.dspeed = rr / speed;
    const Vec2 dt_dtheta = (1.0 / speed) * d.ddr - (rr / (speed * speed * speed)) * d.dr;
    p.dtangent_ds = (1.0 / speed) * dt_dtheta;
    return p;
  }

  /// Implicit function: negative inside, zero on the curve.
  double level_set(Vec2 p) const {
    return std::visit([&](const auto& s) { return s.level_set(p); }, shape_);
  }

  Vec2 level_set_gradient(Vec2 p) const {
    return std::visit([&](const auto& s) { return s.gradient(p); }, shape_);
  }

  /// Parameter of a point lying on the curve.
  double parameter_of(Vec2 p) const {
    return std::visit([&](const auto& s) { return s.parameter_of(p); }, shape_);
  }

 private:
  using Shape = std::variant<detail::PolarShape, detail::EllipseShape, detail::SplineShape>;

  Curve(CurveKind kind, Shape shape) : kind_(kind), shape_(std::move(shape)) {}

  detail::Derivs raw(double theta) const {
    return std::visit([&](const auto& s) { return s.derivs(theta); }, shape_);
  }

  CurveKind kind_;
  Shape shape_;
};

/// Level-set magnitude below which a point counts as lying on the curve.
inline constexpr double on_curve_tolerance = 1e-13;

enum class Region : unsigned char { interior, exterior };

/// Points on the curve (|phi| < 1e-13) are resolved to the interior.
inline Region classify_point(const Curve& curve, Vec2 p) {
  const double phi = curve.level_set(p);
  return (phi < 0.0 || std::abs(phi) < on_curve_tolerance) ? Region::interior : Region::exterior;
}

struct EdgeCrossing {
  Vec2 point;
  double theta = 0.0;     ///< curve parameter of the crossing
  double fraction = 0.0;  ///< position along [a, b], in (0, 1)
};

/// Intersection of the curve with the segment [a, b], whose endpoints lie on
/// opposite sides. Bracketed bisection to 1e-12 h, then two guarded Newton
/// steps on phi along the segment.
inline EdgeCrossing edge_intersection(const Curve& curve, Vec2 a, Vec2 b, double h) {
  const Region ra = classify_point(curve, a);
  const Region rb = classify_point(curve, b);
  if (ra == rb) throw GeometryError("edge_intersection: endpoints lie on the same side of the curve");
  const Vec2 dir = b - a;
  const double length = norm(dir);
  auto f = [&](double s) { return curve.level_set(a + s * dir); };
  auto inside = [&](double s) { return classify_point(curve, a + s * dir) == Region::interior; };

  // lo stays on a's side, hi on b's side.
  double lo = 0.0, hi = 1.0;
  const bool a_inside = ra == Region::interior;
  const double target = 1e-12 * h / length;
  int iterations = 0;
  while (hi - lo > target) {
    if (++iterations > 100) throw GeometryError("edge_intersection: bisection did not converge");
    const double mid = 0.5 * (lo + hi);
    if (inside(mid) == a_inside) lo = mid;
    else hi = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int k = 0; k < 2; ++k) {
    const double fs = f(s);
    const double slope = dot(curve.level_set_gradient(a + s * dir), dir);
    if (slope == 0.0 || fs == 0.0) break;
    const double next = s - fs / slope;
    if (next > 0.0 && next < 1.0 && std::abs(f(next)) <= std::abs(fs)) s = next;
  }
  EdgeCrossing out;
  out.fraction = s;
  out.point = a + s * dir;
  out.theta = curve.parameter_of(out.point);
  return out;
}

/// One of the quasi-uniform boundary discretization points z_i.
struct ControlPoint {
  std::size_t index = 0;
  double theta = 0.0;
  Vec2 position;
  Vec2 tangent;
  Vec2 normal;
  Vec2 dtangent_ds;
  double speed = 0.0;
  double dspeed = 0.0;
};

/// Control points at equispaced parameters theta_i = 2 pi i / M.
class ControlPoints {
 public:
  ControlPoints(const Curve& curve, std::size_t count) : dtheta_(two_pi / static_cast<double>(count)) {
    if (count < 8) throw ConfigError("at least 8 control points are required");
    points_.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double theta = dtheta_ * static_cast<double>(i);
      const CurvePoint p = curve.evaluate(theta);
      points_.push_back({i, theta, p.position, p.tangent, p.normal, p.dtangent_ds, p.speed, p.dspeed});
    }
  }

  std::size_t size() const noexcept { return points_.size(); }
  double spacing() const noexcept { return dtheta_; }
  const ControlPoint& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

 private:
  std::vector<ControlPoint> points_;
  double dtheta_;
};

template <class T>
struct DensityDerivatives {
  std::vector<T> ds;   ///< first arc-length derivative
  std::vector<T> dss;  ///< second arc-length derivative
};

/// Arc-length derivatives of a density sampled at the control points, by
/// fourth-order periodic central differences in theta and the chain rule
/// through ds/dtheta.
template <class T>
DensityDerivatives<T> differentiate_density(std::span<const T> values, const ControlPoints& points) {
  const std::size_t n = points.size();
  if (n < 8) throw ConfigError("density differentiation needs at least 8 control points");
  if (values.size() != n) throw ConfigError("density length does not match the control points");
  const double d = points.spacing();
  DensityDerivatives<T> out{std::vector<T>(n), std::vector<T>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const T f0 = values[i];
    const T fp1 = values[(i + 1) % n], fm1 = values[(i + n - 1) % n];
    const T fp2 = values[(i + 2) % n], fm2 = values[(i + n - 2) % n];
    // Differences against f0 so that constants differentiate to exactly zero.
    const T dtheta = ((fm2 - fp2) + 8.0 * (fp1 - fm1)) / (12.0 * d);
    const T ddtheta = (16.0 * ((fp1 - f0) + (fm1 - f0)) - ((fp2 - f0) + (fm2 - f0))) / (12.0 * d * d);
    const double speed = points[i].speed;
    const T ds = dtheta / speed;
    out.ds[i] = ds;
    out.dss[i] = (ddtheta - points[i].dspeed * ds) / (speed * speed);
  }
  return out;
}

}  // namespace kfbi
