#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfbi/boundary.hpp"
#include "kfbi/errors.hpp"
#include "kfbi/manufactured.hpp"
#include "kfbi/parallel.hpp"
#include "kfbi/timestepping.hpp"

namespace kfbi {

struct CurveConfig {
  CurveKind type = CurveKind::circle;
  double scale = 1.0;  ///< circle radius or star scale
  double c = 0.2;
  int lobes = 3;
  Vec2 center;
  double axis_a = 1.0, axis_b = 0.5;
  std::vector<Vec2> points;  ///< spline control points

  Curve build() const {
    switch (type) {
      case CurveKind::circle: return Curve::circle(scale, center);
      case CurveKind::ellipse: return Curve::ellipse(axis_a, axis_b, center);
      case CurveKind::star: return Curve::star(scale, c, lobes, center);
      case CurveKind::spline: {
        std::vector<Vec2> shifted = points;
        for (Vec2& p : shifted) p = p + center;
        return Curve::spline(std::move(shifted));
      }
    }
    throw ConfigError("unknown curve type");
  }
};

/// Everything a solve, convergence study or benchmark needs.
struct RunConfig {
  Equation equation = Equation::heat;
  std::string solution;  ///< manufactured-solution id; defaults by equation
  double heat_scale = 1.0;
  double theta = 0.25;
  bool allow_cfl_risk = false;
  double w = 1.0;
  std::string potential = "trap";  ///< "none" or "trap": v = 1 - cos^2 x cos^2 y
  Splitting scheme = Splitting::strang;
  BoundaryKind bc = BoundaryKind::dirichlet;
  BoxBoundary box_bc = BoxBoundary::dirichlet_zero;

  CurveConfig curve;
  Box box = Box::square(-1.5, 1.5);
  std::vector<int> grids{64};
  std::vector<double> taus{0.25};  ///< one per grid
  double final_time = 1.0;

  double gamma = 0.8;
  double tolerance = 1e-8;
  int max_iterations = 200;

  std::string backend = "serial";
  std::size_t chunk_size = default_chunk_size;
  std::vector<std::string> bench_backends{"serial", "workers:1"};
  std::vector<double> snapshots;
  std::string out_dir = "out";

  /// Throws ConfigError naming the offending key.
  void validate() const;
};

/// tau_k = tau0 * M_0 / M_k, so tau halves whenever M doubles.
inline std::vector<double> tau_schedule(const std::vector<int>& grids, double tau0) {
  std::vector<double> taus;
  taus.reserve(grids.size());
  for (int m : grids) taus.push_back(tau0 * static_cast<double>(grids.front()) / static_cast<double>(m));
  return taus;
}

inline std::string default_solution(Equation e) {
  switch (e) {
    case Equation::heat: return "heat-plane-wave";
    case Equation::wave: return "wave-standing";
    case Equation::schrodinger: return "schrodinger-plane";
  }
  return {};
}

inline Equation solution_equation(const std::string& id) {
  if (id == "heat-plane-wave") return Equation::heat;
  if (id == "wave-standing" || id == "wave-bump") return Equation::wave;
  if (id == "schrodinger-plane") return Equation::schrodinger;
  throw ConfigError("unknown solution '" + id + "'");
}

inline void RunConfig::validate() const {
  if (solution.empty()) throw ConfigError("solution: missing");
  if (solution_equation(solution) != equation) {
    throw ConfigError("solution '" + solution + "' does not solve the " + to_string(equation) + " equation");
  }
  if (grids.empty()) throw ConfigError("grid: at least one grid size is required");
  for (int m : grids) {
    if (m < 16 || !is_power_of_two(static_cast<std::size_t>(m))) {
      throw ConfigError("grid: M = " + std::to_string(m) + " must be a power of two of at least 16");
    }
  }
  if (taus.size() != grids.size()) throw ConfigError("tau: need one time step per grid size");
  for (double t : taus) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("tau: time steps must be positive");
    const double n = std::round(final_time / t);
    if (std::abs(n * t - final_time) > 1e-9 * std::max(1.0, final_time)) {
      throw ConfigError("T: final time " + std::to_string(final_time) + " is not a multiple of tau = " +
                        std::to_string(t));
    }
  }
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) throw ConfigError("T: must be non-negative");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma: must lie in (0, 1), got " + std::to_string(gamma));
  if (!(tolerance > 0.0)) throw ConfigError("tolerance: must be positive");
  if (max_iterations < 1) throw ConfigError("max_iterations: must be at least 1");
  if (!(heat_scale > 0.0)) throw ConfigError("heat_scale: must be positive");
  if (equation == Equation::wave) {
    if (!(theta > 0.0 && theta <= 0.5)) throw ConfigError("theta: must lie in (0, 1/2]");
    if (theta < 0.25 && !allow_cfl_risk) {
      throw ConfigError("theta: " + std::to_string(theta) +
                        " < 1/4 is only conditionally stable; set allow_cfl_risk = true to run it");
    }
  }
  if (equation == Equation::schrodinger) {
    if (!(w >= 0.0)) throw ConfigError("w: must be non-negative");
    if (potential != "none" && potential != "trap") throw ConfigError("potential: expected none or trap");
    if (solution == "schrodinger-plane" && (w != 1.0 || potential != "trap")) {
      throw ConfigError("solution 'schrodinger-plane' is exact only for w = 1 and potential = trap");
    }
  }
  if (chunk_size == 0) throw ConfigError("chunk_size: must be positive");
  BackendSpec::parse(backend);
  for (const auto& b : bench_backends) BackendSpec::parse(b);
  for (double t : snapshots) {
    if (!(t >= 0.0) || t > final_time + 1e-12) throw ConfigError("snapshots: times must lie in [0, T]");
  }
  curve.build();
}

namespace detail {

using json = nlohmann::json;

template <class V>
V get_as(const json& j, const std::string& key) {
  try {
    return j.get<V>();
  } catch (const json::exception& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

inline Vec2 get_vec2(const json& j, const std::string& key) {
  const auto v = get_as<std::vector<double>>(j, key);
  if (v.size() != 2) throw ConfigError(key + ": expected [x, y]");
  return {v[0], v[1]};
}

inline CurveKind parse_curve_kind(const std::string& s) {
  if (s == "circle") return CurveKind::circle;
  if (s == "ellipse") return CurveKind::ellipse;
  if (s == "star") return CurveKind::star;
  if (s == "spline") return CurveKind::spline;
  throw ConfigError("curve.type: expected circle, ellipse, star or spline, got '" + s + "'");
}

inline BoundaryKind parse_bc(const std::string& s, const std::string& key) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  throw ConfigError(key + ": expected dirichlet or neumann, got '" + s + "'");
}

}  // namespace detail

/// Parses a JSON run configuration; `//` and `/* */` comments are allowed.
///
///   { "equation": "heat", "curve": {"type": "circle", "scale": 1.0},
///     "box": [-1.5, 1.5], "grid": [64, 128], "tau0": 0.25, "T": 1.0 }
inline RunConfig parse_config(const std::string& text) {
  using detail::json;
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const std::vector<std::string> keys{
      "equation", "solution", "heat_scale", "theta", "allow_cfl_risk", "w", "potential", "scheme", "bc",
      "box_bc", "curve", "box", "grid", "tau", "tau0", "T", "gamma", "tolerance", "max_iterations", "backend",
      "chunk_size", "bench_backends", "snapshots", "out_dir"};
  for (const auto& [key, value] : j.items()) {
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) throw ConfigError("unknown key '" + key + "'");
  }

  RunConfig c;
  auto has = [&](const char* k) { return j.contains(k); };
  if (has("equation")) {
    const auto e = detail::get_as<std::string>(j["equation"], "equation");
    if (e == "heat") c.equation = Equation::heat;
    else if (e == "wave") c.equation = Equation::wave;
    else if (e == "schrodinger") c.equation = Equation::schrodinger;
    else throw ConfigError("equation: expected heat, wave or schrodinger, got '" + e + "'");
  }
  c.solution = has("solution") ? detail::get_as<std::string>(j["solution"], "solution") : default_solution(c.equation);
  if (has("heat_scale")) c.heat_scale = detail::get_as<double>(j["heat_scale"], "heat_scale");
  if (has("theta")) c.theta = detail::get_as<double>(j["theta"], "theta");
  if (has("allow_cfl_risk")) c.allow_cfl_risk = detail::get_as<bool>(j["allow_cfl_risk"], "allow_cfl_risk");
  if (has("w")) c.w = detail::get_as<double>(j["w"], "w");
  if (has("potential")) c.potential = detail::get_as<std::string>(j["potential"], "potential");
  if (has("scheme")) {
    const auto s = detail::get_as<std::string>(j["scheme"], "scheme");
    if (s == "strang") c.scheme = Splitting::strang;
    else if (s == "godunov") c.scheme = Splitting::godunov;
    else throw ConfigError("scheme: expected strang or godunov, got '" + s + "'");
  }
  if (has("bc")) c.bc = detail::parse_bc(detail::get_as<std::string>(j["bc"], "bc"), "bc");
  if (has("box_bc")) {
    c.box_bc = detail::parse_bc(detail::get_as<std::string>(j["box_bc"], "box_bc"), "box_bc") == BoundaryKind::dirichlet
                   ? BoxBoundary::dirichlet_zero
                   : BoxBoundary::neumann_zero;
  }

  if (has("curve")) {
    const json& cj = j["curve"];
    if (!cj.is_object()) throw ConfigError("curve: expected an object");
    for (const auto& [key, value] : cj.items()) {
      static const std::vector<std::string> curve_keys{"type", "scale", "c", "lobes", "center", "axes", "points"};
      if (std::find(curve_keys.begin(), curve_keys.end(), key) == curve_keys.end()) {
        throw ConfigError("unknown key 'curve." + key + "'");
      }
    }
    if (cj.contains("type")) c.curve.type = detail::parse_curve_kind(detail::get_as<std::string>(cj["type"], "curve.type"));
    if (cj.contains("scale")) c.curve.scale = detail::get_as<double>(cj["scale"], "curve.scale");
    if (cj.contains("c")) c.curve.c = detail::get_as<double>(cj["c"], "curve.c");
    if (cj.contains("lobes")) c.curve.lobes = detail::get_as<int>(cj["lobes"], "curve.lobes");
    if (cj.contains("center")) c.curve.center = detail::get_vec2(cj["center"], "curve.center");
    if (cj.contains("axes")) {
      const Vec2 ab = detail::get_vec2(cj["axes"], "curve.axes");
      c.curve.axis_a = ab.x;
      c.curve.axis_b = ab.y;
    }
    if (cj.contains("points")) {
      if (!cj["points"].is_array()) throw ConfigError("curve.points: expected a list of [x, y] pairs");
      for (const auto& p : cj["points"]) c.curve.points.push_back(detail::get_vec2(p, "curve.points"));
    }
  }
  if (has("box")) {
    const auto b = detail::get_as<std::vector<double>>(j["box"], "box");
    if (b.size() == 2) c.box = Box::square(b[0], b[1]);
    else if (b.size() == 4) c.box = Box{b[0], b[1], b[2], b[3]};
    else throw ConfigError("box: expected [lo, hi] or [xlo, xhi, ylo, yhi]");
  }

  if (has("grid")) {
    c.grids = j["grid"].is_array() ? detail::get_as<std::vector<int>>(j["grid"], "grid")
                                   : std::vector<int>{detail::get_as<int>(j["grid"], "grid")};
  }
  if (has("tau") && has("tau0")) throw ConfigError("tau and tau0 are mutually exclusive");
  if (has("tau")) {
    if (j["tau"].is_array()) {
      c.taus = detail::get_as<std::vector<double>>(j["tau"], "tau");
    } else {
      c.taus.assign(c.grids.size(), detail::get_as<double>(j["tau"], "tau"));
    }
  } else {
    const double tau0 = has("tau0") ? detail::get_as<double>(j["tau0"], "tau0") : 0.25;
    c.taus = tau_schedule(c.grids, tau0);
  }
  if (has("T")) c.final_time = detail::get_as<double>(j["T"], "T");
  if (has("gamma")) c.gamma = detail::get_as<double>(j["gamma"], "gamma");
  if (has("tolerance")) c.tolerance = detail::get_as<double>(j["tolerance"], "tolerance");
  if (has("max_iterations")) c.max_iterations = detail::get_as<int>(j["max_iterations"], "max_iterations");
  if (has("backend")) c.backend = detail::get_as<std::string>(j["backend"], "backend");
  if (has("chunk_size")) c.chunk_size = detail::get_as<std::size_t>(j["chunk_size"], "chunk_size");
  if (has("bench_backends")) c.bench_backends = detail::get_as<std::vector<std::string>>(j["bench_backends"], "bench_backends");
  if (has("snapshots")) c.snapshots = detail::get_as<std::vector<double>>(j["snapshots"], "snapshots");
  if (has("out_dir")) c.out_dir = detail::get_as<std::string>(j["out_dir"], "out_dir");
  c.validate();
  return c;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

/// Config echo for manifests.
inline nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json curve{{"type", to_string(c.curve.type)}, {"scale", c.curve.scale}, {"c", c.curve.c},
                       {"lobes", c.curve.lobes}, {"center", {c.curve.center.x, c.curve.center.y}},
                       {"axes", {c.curve.axis_a, c.curve.axis_b}}};
  if (!c.curve.points.empty()) {
    nlohmann::json pts = nlohmann::json::array();
    for (Vec2 p : c.curve.points) pts.push_back({p.x, p.y});
    curve["points"] = pts;
  }
  return {{"equation", to_string(c.equation)},
          {"solution", c.solution},
          {"heat_scale", c.heat_scale},
          {"theta", c.theta},
          {"allow_cfl_risk", c.allow_cfl_risk},
          {"w", c.w},
          {"potential", c.potential},
          {"scheme", to_string(c.scheme)},
          {"bc", to_string(c.bc)},
          {"box_bc", to_string(c.box_bc)},
          {"curve", curve},
          {"box", {c.box.xlo, c.box.xhi, c.box.ylo, c.box.yhi}},
          {"grid", c.grids},
          {"tau", c.taus},
          {"T", c.final_time},
          {"gamma", c.gamma},
          {"tolerance", c.tolerance},
          {"max_iterations", c.max_iterations},
          {"backend", c.backend},
          {"chunk_size", c.chunk_size},
          {"bench_backends", c.bench_backends},
          {"snapshots", c.snapshots},
          {"out_dir", c.out_dir}};
}

inline std::function<double(Vec2)> potential_function(const std::string& id) {
  if (id == "trap") return manufactured::schrodinger_potential;
  return {};
}

/// Registry entry named by the configuration.
template <class T>
ExactSolution<T> exact_solution(const RunConfig& c) {
  if constexpr (is_complex_v<T>) {
    if (c.solution == "schrodinger-plane") return manufactured::schrodinger();
    throw ConfigError("solution '" + c.solution + "' is real-valued");
  } else {
    if (c.solution == "heat-plane-wave") return manufactured::heat(c.heat_scale);
    if (c.solution == "wave-standing") return manufactured::standing_wave();
    if (c.solution == "wave-bump") return manufactured::wave_bump();
    throw ConfigError("solution '" + c.solution + "' is complex-valued");
  }
}

/// Problem for grid k of the configuration, with data from the registry.
template <class T>
ProblemSpec<T> make_problem(const RunConfig& c, const Curve& curve, std::size_t k) {
  ProblemSpec<T> p = problem_from(exact_solution<T>(c), c.equation, c.bc, curve);
  p.heat_scale = c.heat_scale;
  p.theta = c.theta;
  p.allow_cfl_risk = c.allow_cfl_risk;
  p.w = c.w;
  p.potential = potential_function(c.potential);
  p.splitting = c.scheme;
  p.tau = c.taus.at(k);
  p.final_time = c.final_time;
  p.gamma = c.gamma;
  p.tolerance = c.tolerance;
  p.max_iterations = c.max_iterations;
  return p;
}

}  // namespace kfbi
