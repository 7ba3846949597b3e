#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kfbi/boundary.hpp"
#include "kfbi/errors.hpp"
#include "kfbi/grid.hpp"
#include "kfbi/parallel.hpp"

namespace kfbi {

using complex = std::complex<double>;

enum class Equation { heat, wave, schrodinger };
enum class Splitting { strang, godunov };

inline std::string to_string(Equation e) {
  switch (e) {
    case Equation::heat: return "heat";
    case Equation::wave: return "wave";
    case Equation::schrodinger: return "schrodinger";
  }
  return "unknown";
}

inline std::string to_string(Splitting s) { return s == Splitting::strang ? "strang" : "godunov"; }

/// Solution norm above which a run is declared unstable.
inline constexpr double blowup_threshold = 1e10;

/// Time-dependent problem: the equation, its parameters, boundary data and
/// closed-form initial data. T is double for heat and wave, complex for
/// Schrodinger.
///   heat:         c u_t = Lap u
///   wave:         u_tt = Lap u              (theta scheme)
///   schrodinger:  i u_t = Lap u + (v + w |u|^2) u
template <class T>
struct ProblemSpec {
  Equation equation = Equation::heat;
  double heat_scale = 1.0;
  double theta = 0.25;
  bool allow_cfl_risk = false;
  double w = 0.0;
  std::function<double(Vec2)> potential;  ///< v(x); empty means zero
  Splitting splitting = Splitting::strang;

  BoundaryKind bc = BoundaryKind::dirichlet;
  std::function<T(Vec2, double)> boundary;  ///< g_D or g_N at (x, t)
  std::function<T(Vec2)> u0;
  std::function<T(Vec2)> lap_u0;
  std::function<T(Vec2)> v0;      ///< wave only: u_t at t = 0
  std::function<T(Vec2)> lap_v0;  ///< wave only

  double tau = 0.1;
  double final_time = 1.0;
  double gamma = 0.8;
  double tolerance = 1e-8;
  int max_iterations = 200;

  void validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("time step tau must be positive");
    if (!(final_time >= 0.0) || !std::isfinite(final_time)) throw ConfigError("final time T must be non-negative");
    if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw ConfigError("tolerance must be positive");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    if (!boundary) throw ConfigError("boundary data is missing");
    if (!u0 || !lap_u0) throw ConfigError("initial data u0 and its Laplacian are required");
    switch (equation) {
      case Equation::heat:
        if (!(heat_scale > 0.0)) throw ConfigError("heat scale c must be positive");
        break;
      case Equation::wave:
        if (!(theta > 0.0 && theta <= 0.5)) throw ConfigError("wave theta must lie in (0, 1/2]");
        if (theta < 0.25 && !allow_cfl_risk) {
          throw ConfigError("wave theta < 1/4 is only conditionally stable; set allow_cfl_risk to run it");
        }
        if (!v0 || !lap_v0) throw ConfigError("wave startup needs v0 and its Laplacian");
        break;
      case Equation::schrodinger:
        if (!(w >= 0.0)) throw ConfigError("Schrodinger coefficient w must be non-negative");
        break;
    }
  }

  /// Number of steps to reach final_time; final_time must be a multiple of tau.
  int step_count() const {
    const double n = std::round(final_time / tau);
    if (std::abs(n * tau - final_time) > 1e-9 * std::max(1.0, final_time)) {
      throw ConfigError("final time T must be an integer multiple of tau");
    }
    return static_cast<int>(n);
  }

  double potential_at(Vec2 p) const { return potential ? potential(p) : 0.0; }
};

/// State carried between steps. Grid fields hold values on interior nodes;
/// the matching `_gamma` vectors hold the same quantity at the control points.
template <class T>
struct TimeState {
  int step = 0;
  double time = 0.0;
  GridField<T> u;            ///< u^n
  std::vector<T> u_gamma;    ///< u^n on Gamma
  GridField<T> u_prev;       ///< wave: u^{n-1}
  std::vector<T> u_prev_gamma;
  GridField<T> f_next;       ///< heat, wave: F^{n+1}
  std::vector<T> f_next_gamma;
  GridField<T> f_curr;       ///< wave: F^n
  std::vector<T> f_curr_gamma;
  GridField<T> carry;        ///< Strang: u** of the previous step (empty on the first step)
  std::vector<T> carry_gamma;
  std::vector<T> density;    ///< Richardson warm start
  int iterations = 0;        ///< Richardson iterations of the last solve
};

// Pure recurrences. Each is applied identically on grid nodes and at control points.

/// Heat: F^{n+2} = (4c/tau) u^{n+1} - F^{n+1}.
template <class T>
T heat_next_f(T u_next, T f_next, double c, double tau) {
  return (4.0 * c / tau) * u_next - f_next;
}

/// Heat startup: F^1 = (2c/tau) u0 + Lap u0.
template <class T>
T heat_first_f(T u0, T lap_u0, double c, double tau) {
  return (2.0 * c / tau) * u0 + lap_u0;
}

/// Wave theta scheme: F^{n+2} from u^{n+1}, u^n, F^{n+1}, F^n with
/// Lap u^k replaced by u^k/(theta tau^2) - F^k.
template <class T>
T wave_next_f(T u_next, T u_curr, T f_next, T f_curr, double theta, double tau) {
  const double a = 1.0 / (theta * tau * tau);
  const double b = (1.0 - 2.0 * theta) / theta;
  return a * (2.0 * u_next - u_curr) + b * (a * u_next - f_next) + (a * u_curr - f_curr);
}

/// F^{n+1} = (2 u^n - u^{n-1})/(theta tau^2) + ((1-2theta)/theta) Lap u^n + Lap u^{n-1}.
template <class T>
T wave_f(T u_n, T u_nm1, T lap_n, T lap_nm1, double theta, double tau) {
  const double a = 1.0 / (theta * tau * tau);
  return a * (2.0 * u_n - u_nm1) + ((1.0 - 2.0 * theta) / theta) * lap_n + lap_nm1;
}

/// Strang elimination: u* = 2 u^n - u**_prev.
template <class T>
T strang_half_step(T u_n, T carry) {
  return 2.0 * u_n - carry;
}

/// Solves z + (i s)(v + w|z|^2) z = rhs for z by damped Newton on the real
/// and imaginary parts, starting from `guess`.
inline complex solve_nonlinear_node(complex rhs, complex guess, double s, double v, double w) {
  constexpr double tolerance = 1e-12;
  constexpr int max_iterations = 50;
  auto residual = [&](complex z) {
    const double q = v + w * std::norm(z);
    return z + complex(0.0, s * q) * z - rhs;
  };
  const double scale = std::max(1.0, std::abs(rhs));
  complex z = guess;
  complex g = residual(z);
  for (int it = 0; it < max_iterations; ++it) {
    if (std::abs(g) <= tolerance * scale) return z;
    const double a = z.real(), b = z.imag();
    const double q = v + w * (a * a + b * b);
    const double j11 = 1.0 - 2.0 * s * w * a * b;
    const double j12 = -s * q - 2.0 * s * w * b * b;
    const double j21 = s * q + 2.0 * s * w * a * a;
    const double j22 = 1.0 + 2.0 * s * w * a * b;
    const double det = j11 * j22 - j12 * j21;
    if (det == 0.0) break;
    const double da = (j22 * g.real() - j12 * g.imag()) / det;
    const double db = (-j21 * g.real() + j11 * g.imag()) / det;
    double lambda = 1.0;
    complex trial = z - complex(da, db);
    complex gt = residual(trial);
    while (std::abs(gt) > std::abs(g) && lambda > 1e-6) {
      lambda *= 0.5;
      trial = z - lambda * complex(da, db);
      gt = residual(trial);
    }
    z = trial;
    g = gt;
  }
  if (std::abs(g) <= tolerance * scale) return z;
  throw ConvergenceError("nonlinear Schrodinger node solve did not converge", max_iterations, std::abs(g));
}

/// Right side of the nonlinear sub-step: u* - (i s)(v + w|u*|^2) u*.
inline complex nonlinear_rhs(complex u, double s, double v, double w) {
  return u - complex(0.0, s * (v + w * std::norm(u))) * u;
}

namespace detail {

template <class T>
double max_abs_interior(const GridField<T>& u, const EmbeddedGrid& eg) {
  double m = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (eg.is_interior(k)) m = std::max(m, std::abs(u[k]));
  }
  return m;
}

template <class T>
GridField<T> sample(const Domain& d, const std::function<T(Vec2)>& f) {
  GridField<T> out(d.lattice());
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (d.grid.is_interior(k)) out[k] = f(d.lattice().node(k));
  }
  return out;
}

template <class T>
std::vector<T> sample_gamma(const Domain& d, const std::function<T(Vec2)>& f) {
  std::vector<T> out;
  out.reserve(d.points.size());
  for (const ControlPoint& z : d.points) out.push_back(f(z.position));
  return out;
}

template <class T>
std::vector<T> boundary_data(const Domain& d, const ProblemSpec<T>& spec, double t) {
  std::vector<T> out;
  out.reserve(d.points.size());
  for (const ControlPoint& z : d.points) out.push_back(spec.boundary(z.position, t));
  return out;
}

// Solves Lap u - kappa u = -scale * F with F given on the grid and on Gamma.
template <class T>
BvpSolution<T> solve_step(const Domain& d, const ProblemSpec<T>& spec, T kappa, const GridField<T>& f,
                          const std::vector<T>& f_gamma, T scale, double t_next, const std::vector<T>& warm,
                          Executor& exec) {
  BvpProblem<T> p;
  p.kappa = kappa;
  p.source = GridField<T>(d.lattice());
  exec.dispatch(kernels::rhs_update, f.size(), [&](std::size_t k) { p.source[k] = -scale * f[k]; });
  p.f_gamma.resize(f_gamma.size());
  for (std::size_t i = 0; i < f_gamma.size(); ++i) p.f_gamma[i] = -scale * f_gamma[i];
  p.kind = spec.bc;
  p.data = boundary_data(d, spec, t_next);
  p.gamma = spec.gamma;
  p.tolerance = spec.tolerance;
  p.max_iterations = spec.max_iterations;
  p.initial_density = warm;
  return richardson_solve(p, d, exec);
}

// u on Gamma after a solve: prescribed data for Dirichlet, extracted trace for Neumann.
template <class T>
std::vector<T> gamma_values(const Domain& d, const ProblemSpec<T>& spec, const BvpSolution<T>& sol, double t) {
  return spec.bc == BoundaryKind::dirichlet ? boundary_data(d, spec, t) : sol.trace;
}

template <class T>
void check_stability(const TimeState<T>& s, const EmbeddedGrid& eg) {
  const double norm = max_abs_interior(s.u, eg);
  if (!(norm <= blowup_threshold)) {
    throw InstabilityError("solution blew up at step " + std::to_string(s.step) + " (t = " + std::to_string(s.time) +
                               ", max |u| = " + std::to_string(norm) + ")",
                           s.step, s.time, norm);
  }
}

}  // namespace detail

/// State at t = 0 for the heat and Schrodinger equations, and at t = tau
/// (after the Taylor startup) for the wave equation.
template <class T>
TimeState<T> initial_state(const ProblemSpec<T>& spec, const Domain& d, Executor& exec);

/// Wave startup: u^1 = u^0 + tau v0 + tau^2/2 Lap u0, Lap u^1 ~ Lap u0 + tau Lap v0,
/// F^1 = u^1/(theta tau^2) - Lap u^1, F^2 from (u^1, u^0, Lap u^1, Lap u^0).
template <class T>
TimeState<T> wave_startup(const ProblemSpec<T>& spec, const Domain& d, Executor& exec) {
  if (!spec.v0 || !spec.lap_v0) throw ConfigError("wave startup needs v0 and its Laplacian");
  const double tau = spec.tau, theta = spec.theta;
  auto startup = [&](const std::vector<Vec2>& pts, auto&& assign) {
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const Vec2 p = pts[k];
      const T u0 = spec.u0(p), lap0 = spec.lap_u0(p);
      const T u1 = u0 + tau * spec.v0(p) + (0.5 * tau * tau) * lap0;
      const T lap1 = lap0 + tau * spec.lap_v0(p);
      const T f1 = u1 / (theta * tau * tau) - lap1;
      const T f2 = wave_f(u1, u0, lap1, lap0, theta, tau);
      assign(k, u0, u1, f1, f2);
    }
  };
  TimeState<T> s;
  s.step = 1;
  s.time = tau;
  const CartesianGrid& g = d.lattice();
  s.u = GridField<T>(g);
  s.u_prev = GridField<T>(g);
  s.f_next = GridField<T>(g);
  s.f_curr = GridField<T>(g);
  std::vector<Vec2> nodes;
  std::vector<std::size_t> ids;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (d.grid.is_interior(k)) {
      nodes.push_back(g.node(k));
      ids.push_back(k);
    }
  }
  startup(nodes, [&](std::size_t k, T u0, T u1, T f1, T f2) {
    s.u_prev[ids[k]] = u0;
    s.u[ids[k]] = u1;
    s.f_curr[ids[k]] = f1;
    s.f_next[ids[k]] = f2;
  });
  const std::size_t n = d.points.size();
  std::vector<Vec2> zs;
  for (const ControlPoint& z : d.points) zs.push_back(z.position);
  s.u_prev_gamma.resize(n);
  s.u_gamma.resize(n);
  s.f_curr_gamma.resize(n);
  s.f_next_gamma.resize(n);
  startup(zs, [&](std::size_t k, T u0, T u1, T f1, T f2) {
    s.u_prev_gamma[k] = u0;
    s.u_gamma[k] = u1;
    s.f_curr_gamma[k] = f1;
    s.f_next_gamma[k] = f2;
  });
  (void)exec;
  return s;
}

template <class T>
TimeState<T> initial_state(const ProblemSpec<T>& spec, const Domain& d, Executor& exec) {
  spec.validate();
  if (spec.equation == Equation::wave) return wave_startup(spec, d, exec);
  TimeState<T> s;
  s.u = detail::sample<T>(d, spec.u0);
  s.u_gamma = detail::sample_gamma<T>(d, spec.u0);
  if (spec.equation == Equation::heat) {
    const double c = spec.heat_scale, tau = spec.tau;
    const GridField<T> lap = detail::sample<T>(d, spec.lap_u0);
    const std::vector<T> lap_gamma = detail::sample_gamma<T>(d, spec.lap_u0);
    s.f_next = GridField<T>(d.lattice());
    for (std::size_t k = 0; k < s.u.size(); ++k) s.f_next[k] = heat_first_f(s.u[k], lap[k], c, tau);
    s.f_next_gamma.resize(s.u_gamma.size());
    for (std::size_t i = 0; i < s.u_gamma.size(); ++i) {
      s.f_next_gamma[i] = heat_first_f(s.u_gamma[i], lap_gamma[i], c, tau);
    }
  }
  return s;
}

/// Crank-Nicolson heat step: Lap u^{n+1} - (2c/tau) u^{n+1} = -F^{n+1}.
template <class T>
void heat_step(TimeState<T>& s, const ProblemSpec<T>& spec, const Domain& d, Executor& exec) {
  const double c = spec.heat_scale, tau = spec.tau;
  const double t_next = s.time + tau;
  const BvpSolution<T> sol =
      detail::solve_step(d, spec, T(2.0 * c / tau), s.f_next, s.f_next_gamma, T(1.0), t_next, s.density, exec);
  const std::vector<T> u_gamma = detail::gamma_values(d, spec, sol, t_next);
  exec.dispatch(kernels::rhs_update, s.f_next.size(), [&](std::size_t k) {
    s.f_next[k] = heat_next_f(sol.u[k], s.f_next[k], c, tau);
  });
  for (std::size_t i = 0; i < u_gamma.size(); ++i) {
    s.f_next_gamma[i] = heat_next_f(u_gamma[i], s.f_next_gamma[i], c, tau);
  }
  s.u = sol.u;
  s.u_gamma = u_gamma;
  s.density = sol.density;
  s.iterations = sol.iterations;
  s.time = t_next;
  ++s.step;
}

/// Theta-scheme wave step: Lap u^{n+1} - u^{n+1}/(theta tau^2) = -F^{n+1}.
template <class T>
void wave_step(TimeState<T>& s, const ProblemSpec<T>& spec, const Domain& d, Executor& exec) {
  const double theta = spec.theta, tau = spec.tau;
  const double t_next = s.time + tau;
  const BvpSolution<T> sol = detail::solve_step(d, spec, T(1.0 / (theta * tau * tau)), s.f_next, s.f_next_gamma,
                                                T(1.0), t_next, s.density, exec);
  const std::vector<T> u_gamma = detail::gamma_values(d, spec, sol, t_next);
  exec.dispatch(kernels::rhs_update, s.f_next.size(), [&](std::size_t k) {
    const T f2 = wave_next_f(sol.u[k], s.u[k], s.f_next[k], s.f_curr[k], theta, tau);
    s.f_curr[k] = s.f_next[k];
    s.f_next[k] = f2;
  });
  for (std::size_t i = 0; i < u_gamma.size(); ++i) {
    const T f2 = wave_next_f(u_gamma[i], s.u_gamma[i], s.f_next_gamma[i], s.f_curr_gamma[i], theta, tau);
    s.f_curr_gamma[i] = s.f_next_gamma[i];
    s.f_next_gamma[i] = f2;
  }
  s.u_prev = std::move(s.u);
  s.u_prev_gamma = std::move(s.u_gamma);
  s.u = sol.u;
  s.u_gamma = u_gamma;
  s.density = sol.density;
  s.iterations = sol.iterations;
  s.time = t_next;
  ++s.step;
  detail::check_stability(s, d.grid);
}

namespace detail {

// Nonlinear sub-step applied to `start` on interior nodes and at the control points.
inline void nonlinear_substep(const ProblemSpec<complex>& spec, const Domain& d, const GridField<complex>& start,
                              const std::vector<complex>& start_gamma, GridField<complex>& out,
                              std::vector<complex>& out_gamma, Executor& exec) {
  const double s = 0.5 * spec.tau, w = spec.w;
  const CartesianGrid& g = d.lattice();
  out = GridField<complex>(g);
  exec.dispatch(kernels::rhs_update, g.size(), [&](std::size_t k) {
    if (!d.grid.is_interior(k)) return;
    const double v = spec.potential_at(g.node(k));
    out[k] = solve_nonlinear_node(nonlinear_rhs(start[k], s, v, w), start[k], s, v, w);
  });
  out_gamma.resize(start_gamma.size());
  for (std::size_t i = 0; i < start_gamma.size(); ++i) {
    const double v = spec.potential_at(d.points[i].position);
    out_gamma[i] = solve_nonlinear_node(nonlinear_rhs(start_gamma[i], s, v, w), start_gamma[i], s, v, w);
  }
}

}  // namespace detail

/// Strang splitting step: explicit half step of the linear flow (by
/// elimination), Crank-Nicolson nonlinear step over tau, then the implicit
/// half step Lap u^{n+1} - (2i/tau) u^{n+1} = -(2i/tau) u**.
inline void schrodinger_step(TimeState<complex>& s, const ProblemSpec<complex>& spec, const Domain& d,
                             Executor& exec) {
  const double tau = spec.tau;
  const double t_next = s.time + tau;
  const CartesianGrid& g = d.lattice();
  GridField<complex> star(g);
  std::vector<complex> star_gamma(d.points.size());
  if (s.carry.size() == 0) {
    // First step: u* = u0 - i (tau/2) Lap u0.
    const complex half(0.0, 0.5 * tau);
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (d.grid.is_interior(k)) star[k] = s.u[k] - half * spec.lap_u0(g.node(k));
    }
    for (std::size_t i = 0; i < star_gamma.size(); ++i) {
      star_gamma[i] = s.u_gamma[i] - half * spec.lap_u0(d.points[i].position);
    }
  } else {
    exec.dispatch(kernels::rhs_update, g.size(), [&](std::size_t k) { star[k] = strang_half_step(s.u[k], s.carry[k]); });
    for (std::size_t i = 0; i < star_gamma.size(); ++i) star_gamma[i] = strang_half_step(s.u_gamma[i], s.carry_gamma[i]);
  }
  detail::nonlinear_substep(spec, d, star, star_gamma, s.carry, s.carry_gamma, exec);
  const complex kappa(0.0, 2.0 / tau);
  const BvpSolution<complex> sol =
      detail::solve_step(d, spec, kappa, s.carry, s.carry_gamma, kappa, t_next, s.density, exec);
  s.u = sol.u;
  s.u_gamma = detail::gamma_values(d, spec, sol, t_next);
  s.density = sol.density;
  s.iterations = sol.iterations;
  s.time = t_next;
  ++s.step;
  detail::check_stability(s, d.grid);
}

/// Godunov (sequential) splitting step: nonlinear step over tau, then one
/// backward Euler step Lap u^{n+1} - (i/tau) u^{n+1} = -(i/tau) u**.
inline void godunov_step(TimeState<complex>& s, const ProblemSpec<complex>& spec, const Domain& d, Executor& exec) {
  const double tau = spec.tau;
  const double t_next = s.time + tau;
  GridField<complex> mid;
  std::vector<complex> mid_gamma;
  detail::nonlinear_substep(spec, d, s.u, s.u_gamma, mid, mid_gamma, exec);
  const complex kappa(0.0, 1.0 / tau);
  const BvpSolution<complex> sol = detail::solve_step(d, spec, kappa, mid, mid_gamma, kappa, t_next, s.density, exec);
  s.u = sol.u;
  s.u_gamma = detail::gamma_values(d, spec, sol, t_next);
  s.density = sol.density;
  s.iterations = sol.iterations;
  s.time = t_next;
  ++s.step;
  detail::check_stability(s, d.grid);
}

template <class T>
void advance(TimeState<T>& s, const ProblemSpec<T>& spec, const Domain& d, Executor& exec) {
  if constexpr (is_complex_v<T>) {
    if (spec.equation != Equation::schrodinger) throw ConfigError("complex fields are only used by the Schrodinger equation");
    if (spec.splitting == Splitting::strang) schrodinger_step(s, spec, d, exec);
    else godunov_step(s, spec, d, exec);
  } else {
    switch (spec.equation) {
      case Equation::heat: heat_step(s, spec, d, exec); break;
      case Equation::wave: wave_step(s, spec, d, exec); break;
      case Equation::schrodinger: throw ConfigError("the Schrodinger equation needs complex fields");
    }
  }
}

template <class T>
struct Snapshot {
  double time = 0.0;
  GridField<T> u;
};

template <class T>
struct RunResult {
  TimeState<T> final_state;
  std::vector<int> iterations;       ///< Richardson iterations per solve
  std::vector<double> step_seconds;  ///< wall time per step
  double loop_seconds = 0.0;         ///< whole time loop, setup excluded
  std::vector<Snapshot<T>> snapshots;
  std::map<std::string, KernelTiming> kernel_timings;
};

struct RunOptions {
  std::vector<double> snapshot_times;
  std::function<void(int step, double time, int iterations)> on_step;
};

/// Steps from t = 0 to the final time, one BVP solve per step.
template <class T>
RunResult<T> run(const ProblemSpec<T>& spec, const Domain& d, Executor& exec, const RunOptions& options = {}) {
  spec.validate();
  const int steps = spec.step_count();
  RunResult<T> r;
  exec.reset_timings();
  const auto loop_start = std::chrono::steady_clock::now();
  std::vector<bool> taken(options.snapshot_times.size(), false);
  auto snap = [&](const TimeState<T>& s) {
    for (std::size_t k = 0; k < options.snapshot_times.size(); ++k) {
      if (!taken[k] && std::abs(s.time - options.snapshot_times[k]) <= 0.5 * spec.tau) {
        taken[k] = true;
        r.snapshots.push_back({s.time, s.u});
      }
    }
  };

  if (steps == 0) {
    // Initial data only.
    TimeState<T> s;
    s.u = detail::sample<T>(d, spec.u0);
    s.u_gamma = detail::sample_gamma<T>(d, spec.u0);
    snap(s);
    r.final_state = std::move(s);
    return r;
  }
  if (spec.equation == Equation::wave) {
    TimeState<T> s0;
    s0.u = detail::sample<T>(d, spec.u0);
    snap(s0);
  }
  TimeState<T> s = initial_state(spec, d, exec);
  snap(s);
  while (s.step < steps) {
    const auto t0 = std::chrono::steady_clock::now();
    advance(s, spec, d, exec);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    r.iterations.push_back(s.iterations);
    r.step_seconds.push_back(dt.count());
    if (options.on_step) options.on_step(s.step, s.time, s.iterations);
    snap(s);
  }
  const std::chrono::duration<double> loop = std::chrono::steady_clock::now() - loop_start;
  r.loop_seconds = loop.count();
  r.kernel_timings = exec.timings();
  r.final_state = std::move(s);
  return r;
}

}  // namespace kfbi
