#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "kfbi/errors.hpp"
#include "kfbi/geometry.hpp"
#include "kfbi/timestepping.hpp"

namespace kfbi {

template <class T>
struct Vec2Of {
  T x{}, y{};
};

/// Closed-form solution with the derivatives the steppers and error norms need.
template <class T>
struct ExactSolution {
  std::string id;
  bool has_exact = true;  ///< false: u is only meaningful at t = 0
  std::function<T(Vec2, double)> boundary;  ///< overrides the data derived from u when set
  std::function<T(Vec2, double)> u;
  std::function<Vec2Of<T>(Vec2, double)> grad;
  std::function<T(Vec2, double)> u_t;
  std::function<T(Vec2, double)> lap;
  std::function<T(Vec2, double)> lap_t;
};

namespace manufactured {

/// heat: u = exp(-t/c) sin(0.6x + 0.8y), which solves c u_t = Lap u.
inline ExactSolution<double> heat(double c = 1.0) {
  ExactSolution<double> s;
  s.id = "heat-plane-wave";
  s.u = [c](Vec2 p, double t) { return std::exp(-t / c) * std::sin(0.6 * p.x + 0.8 * p.y); };
  s.grad = [c](Vec2 p, double t) {
    const double a = std::exp(-t / c) * std::cos(0.6 * p.x + 0.8 * p.y);
    return Vec2Of<double>{0.6 * a, 0.8 * a};
  };
  s.u_t = [c](Vec2 p, double t) { return -std::exp(-t / c) * std::sin(0.6 * p.x + 0.8 * p.y) / c; };
  s.lap = [c](Vec2 p, double t) { return -std::exp(-t / c) * std::sin(0.6 * p.x + 0.8 * p.y); };
  s.lap_t = [c](Vec2 p, double t) { return std::exp(-t / c) * std::sin(0.6 * p.x + 0.8 * p.y) / c; };
  return s;
}

/// wave: standing wave u = cos(sqrt2 t) sin x sin y.
inline ExactSolution<double> standing_wave() {
  const double w = std::sqrt(2.0);
  ExactSolution<double> s;
  s.id = "wave-standing";
  s.u = [w](Vec2 p, double t) { return std::cos(w * t) * std::sin(p.x) * std::sin(p.y); };
  s.grad = [w](Vec2 p, double t) {
    const double c = std::cos(w * t);
    return Vec2Of<double>{c * std::cos(p.x) * std::sin(p.y), c * std::sin(p.x) * std::cos(p.y)};
  };
  s.u_t = [w](Vec2 p, double t) { return -w * std::sin(w * t) * std::sin(p.x) * std::sin(p.y); };
  s.lap = [w](Vec2 p, double t) { return -2.0 * std::cos(w * t) * std::sin(p.x) * std::sin(p.y); };
  s.lap_t = [w](Vec2 p, double t) { return 2.0 * w * std::sin(w * t) * std::sin(p.x) * std::sin(p.y); };
  return s;
}

/// Schrodinger: u = exp(it) cos x cos y with v = 1 - cos^2 x cos^2 y, w = 1.
inline ExactSolution<complex> schrodinger() {
  ExactSolution<complex> s;
  s.id = "schrodinger-plane";
  s.u = [](Vec2 p, double t) { return std::polar(1.0, t) * (std::cos(p.x) * std::cos(p.y)); };
  s.grad = [](Vec2 p, double t) {
    const complex e = std::polar(1.0, t);
    return Vec2Of<complex>{-e * (std::sin(p.x) * std::cos(p.y)), -e * (std::cos(p.x) * std::sin(p.y))};
  };
  s.u_t = [](Vec2 p, double t) { return complex(0.0, 1.0) * std::polar(1.0, t) * (std::cos(p.x) * std::cos(p.y)); };
  s.lap = [](Vec2 p, double t) { return -2.0 * std::polar(1.0, t) * (std::cos(p.x) * std::cos(p.y)); };
  s.lap_t = [](Vec2 p, double t) {
    return complex(0.0, -2.0) * std::polar(1.0, t) * (std::cos(p.x) * std::cos(p.y));
  };
  return s;
}

inline double schrodinger_potential(Vec2 p) {
  const double c = std::cos(p.x) * std::cos(p.y);
  return 1.0 - c * c;
}

/// Smoothed radial step u0 = 1/(1 + exp(20(r - 0.5))) at rest, for the wave
/// equation with u_n = 0. There is no closed-form solution for t > 0.
inline ExactSolution<double> wave_bump() {
  constexpr double k = 20.0, r0 = 0.5;
  ExactSolution<double> s;
  s.id = "wave-bump";
  s.has_exact = false;
  s.u = [](Vec2 p, double) { return 1.0 / (1.0 + std::exp(k * (norm(p) - r0))); };
  s.grad = [](Vec2 p, double) {
    const double r = norm(p);
    if (r < 1e-12) return Vec2Of<double>{0.0, 0.0};
    const double e = std::exp(k * (r - r0));
    const double fr = -k * e / ((1.0 + e) * (1.0 + e));
    return Vec2Of<double>{fr * p.x / r, fr * p.y / r};
  };
  s.u_t = [](Vec2, double) { return 0.0; };
  s.lap = [](Vec2 p, double) {
    const double r = norm(p);
    const double e = std::exp(k * (std::max(r, 0.0) - r0));
    const double frr = -k * k * e * (1.0 - e) / ((1.0 + e) * (1.0 + e) * (1.0 + e));
    if (r < 1e-12) return 2.0 * frr;
    const double fr = -k * e / ((1.0 + e) * (1.0 + e));
    return frr + fr / r;
  };
  s.lap_t = [](Vec2, double) { return 0.0; };
  s.boundary = [](Vec2, double) { return 0.0; };
  return s;
}

}  // namespace manufactured

/// Builds a time-dependent problem whose initial and boundary data come from
/// an exact solution. Equation parameters are left to the caller.
template <class T>
ProblemSpec<T> problem_from(const ExactSolution<T>& exact, Equation eq, BoundaryKind bc, const Curve& curve) {
  ProblemSpec<T> p;
  p.equation = eq;
  p.bc = bc;
  if (exact.boundary) {
    p.boundary = exact.boundary;
  } else if (bc == BoundaryKind::dirichlet) {
    p.boundary = exact.u;
  } else {
    // g_N = grad u . n with the outward normal at the curve point nearest x.
    p.boundary = [exact, curve](Vec2 x, double t) {
      const CurvePoint c = curve.evaluate(curve.parameter_of(x));
      const Vec2Of<T> g = exact.grad(x, t);
      return g.x * c.normal.x + g.y * c.normal.y;
    };
  }
  p.u0 = [exact](Vec2 x) { return exact.u(x, 0.0); };
  p.lap_u0 = [exact](Vec2 x) { return exact.lap(x, 0.0); };
  p.v0 = [exact](Vec2 x) { return exact.u_t(x, 0.0); };
  p.lap_v0 = [exact](Vec2 x) { return exact.lap_t(x, 0.0); };
  return p;
}

/// Registry ids accepted by configuration files.
inline std::vector<std::string> solution_ids() {
  return {"heat-plane-wave", "wave-standing", "schrodinger-plane", "wave-bump"};
}

}  // namespace kfbi
