#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kfbi/boundary.hpp"
#include "kfbi/config.hpp"
#include "kfbi/errors.hpp"
#include "kfbi/parallel.hpp"
#include "kfbi/timestepping.hpp"

namespace kfbi {

/// Max norm and scaled l2 norm over the N interior nodes, with the scaled
/// norm taken as sqrt(sum |e|^2 / N).
struct ErrorNorms {
  double inf = 0.0;
  double l2 = 0.0;
  std::size_t count = 0;
};

template <class T, class Exact>
ErrorNorms compute_errors(const GridField<T>& u, Exact&& exact, const EmbeddedGrid& eg) {
  if (u.size() != eg.grid.size()) throw ConfigError("compute_errors: field does not match the grid");
  ErrorNorms n;
  double sum = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!eg.is_interior(k)) continue;
    const double e = std::abs(u[k] - exact(eg.grid.node(k)));
    n.inf = std::max(n.inf, e);
    sum += e * e;
    ++n.count;
  }
  if (n.count > 0) n.l2 = std::sqrt(sum / static_cast<double>(n.count));
  return n;
}

/// log2(coarse / fine).
inline double observed_order(double coarse, double fine) { return std::log2(coarse / fine); }

/// Outcome of one (M, tau) run of a configuration.
struct RunSummary {
  int grid = 0;
  double tau = 0.0;
  double final_time = 0.0;
  bool has_exact = false;
  ErrorNorms errors;
  std::vector<int> iterations;
  double loop_seconds = 0.0;
  std::map<std::string, KernelTiming> kernel_timings;
  std::vector<complex> final_field;  ///< every lattice node, zero outside the domain
  std::vector<std::string> dumps;

  int max_iterations() const { return iterations.empty() ? 0 : *std::max_element(iterations.begin(), iterations.end()); }
  int min_iterations() const { return iterations.empty() ? 0 : *std::min_element(iterations.begin(), iterations.end()); }
  double mean_iterations() const {
    if (iterations.empty()) return 0.0;
    double s = 0.0;
    for (int i : iterations) s += i;
    return s / static_cast<double>(iterations.size());
  }
};

/// Parsed `# M=..,t=..,equation=..` header plus rows (x, y, re, im).
struct FieldDump {
  int grid = 0;
  double time = 0.0;
  std::string equation;
  bool is_complex = false;
  std::vector<std::array<double, 4>> rows;
};

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes interior-node values as CSV with 17 significant digits, so that
/// re-reading reproduces the doubles exactly.
template <class T>
void dump_field(const GridField<T>& u, const EmbeddedGrid& eg, const std::string& path, double time,
                const std::string& equation) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write field dump '" + path + "'");
  out << "# M=" << eg.grid.intervals << ",t=" << format_double(time) << ",equation=" << equation << "\n";
  out << (is_complex_v<T> ? "x,y,re,im\n" : "x,y,value\n");
  char line[160];
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (!eg.is_interior(k)) continue;
    const Vec2 p = eg.grid.node(k);
    if constexpr (is_complex_v<T>) {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", p.x, p.y, u[k].real(), u[k].imag());
    } else {
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", p.x, p.y, u[k]);
    }
    out << line;
  }
  if (!out) throw Error("failed while writing field dump '" + path + "'");
}

inline FieldDump read_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open field dump '" + path + "'");
  FieldDump d;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) throw Error("field dump '" + path + "' has no header");
  std::stringstream header(line.substr(2));
  std::string item;
  while (std::getline(header, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    if (key == "M") d.grid = std::stoi(value);
    else if (key == "t") d.time = std::strtod(value.c_str(), nullptr);
    else if (key == "equation") d.equation = value;
  }
  if (!std::getline(in, line)) throw Error("field dump '" + path + "' has no column header");
  d.is_complex = line == "x,y,re,im";
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 4> row{};
    const char* s = line.c_str();
    char* end = nullptr;
    const int cols = d.is_complex ? 4 : 3;
    for (int c = 0; c < cols; ++c) {
      row[static_cast<std::size_t>(c)] = std::strtod(s, &end);
      if (end == s) throw Error("field dump '" + path + "': malformed row '" + line + "'");
      s = (*end == ',') ? end + 1 : end;
    }
    d.rows.push_back(row);
  }
  return d;
}

namespace detail {

inline std::string dump_path(const RunConfig& c, int m, double t) {
  char name[96];
  std::snprintf(name, sizeof name, "field_%s_M%d_t%.6g.csv", to_string(c.equation).c_str(), m, t);
  return (std::filesystem::path(c.out_dir) / name).string();
}

template <class T>
RunSummary execute_typed(const RunConfig& c, std::size_t k, Executor& exec, bool write_dumps) {
  const Curve curve = c.curve.build();
  const int m = c.grids.at(k);
  const Domain d(curve, c.box, m, c.box_bc, exec);
  const ProblemSpec<T> spec = make_problem<T>(c, d.curve, k);
  RunOptions opts;
  if (write_dumps) opts.snapshot_times = c.snapshots;
  const RunResult<T> r = run(spec, d, exec, opts);

  RunSummary s;
  s.grid = m;
  s.tau = spec.tau;
  s.final_time = c.final_time;
  s.iterations = r.iterations;
  s.loop_seconds = r.loop_seconds;
  s.kernel_timings = r.kernel_timings;
  s.final_field.resize(r.final_state.u.size());
  for (std::size_t i = 0; i < s.final_field.size(); ++i) {
    s.final_field[i] = d.grid.is_interior(i) ? complex(r.final_state.u[i]) : complex{};
  }

  const ExactSolution<T> exact = exact_solution<T>(c);
  s.has_exact = exact.has_exact;
  if (s.has_exact) {
    s.errors = compute_errors(r.final_state.u, [&](Vec2 p) { return exact.u(p, c.final_time); }, d.grid);
  }
  if (write_dumps && !r.snapshots.empty()) {
    std::filesystem::create_directories(c.out_dir);
    for (const auto& snap : r.snapshots) {
      const std::string path = dump_path(c, m, snap.time);
      dump_field(snap.u, d.grid, path, snap.time, to_string(c.equation));
      s.dumps.push_back(path);
    }
  }
  return s;
}

}  // namespace detail

/// Runs grid k of the configuration. Snapshot fields are written to
/// `out_dir` when `write_dumps` is set.
inline RunSummary execute(const RunConfig& c, std::size_t k, Executor& exec, bool write_dumps = false) {
  if (c.equation == Equation::schrodinger) return detail::execute_typed<complex>(c, k, exec, write_dumps);
  return detail::execute_typed<double>(c, k, exec, write_dumps);
}

struct ConvergenceRow {
  RunSummary run;
  std::optional<double> order_inf;
  std::optional<double> order_l2;
};

struct ErrorReport {
  std::vector<ConvergenceRow> rows;
};

inline void write_table_header(std::ostream& out) { out << "M\ttau\terr_inf\terr_l2\torder_inf\torder_l2\n"; }

inline void write_table_row(std::ostream& out, const ConvergenceRow& r) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", v);
    return std::string(buf);
  };
  auto ord = [](const std::optional<double>& v) {
    if (!v) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *v);
    return std::string(buf);
  };
  out << r.run.grid << '\t' << r.run.tau << '\t' << num(r.run.errors.inf) << '\t' << num(r.run.errors.l2) << '\t'
      << ord(r.order_inf) << '\t' << ord(r.order_l2) << '\n';
}

/// Runs every (M, tau) pair in order, writing each table row as soon as it is
/// known. A failing run leaves the rows so far in `table` and rethrows.
inline ErrorReport convergence_study(const RunConfig& c, Executor& exec, std::ostream& table) {
  if (c.solution == "wave-bump") throw ConfigError("convergence study needs a solution with a closed form");
  ErrorReport report;
  write_table_header(table);
  table.flush();
  for (std::size_t k = 0; k < c.grids.size(); ++k) {
    ConvergenceRow row;
    row.run = execute(c, k, exec);
    if (!report.rows.empty()) {
      const ErrorNorms& prev = report.rows.back().run.errors;
      row.order_inf = observed_order(prev.inf, row.run.errors.inf);
      row.order_l2 = observed_order(prev.l2, row.run.errors.l2);
    }
    write_table_row(table, row);
    table.flush();
    report.rows.push_back(std::move(row));
  }
  return report;
}

struct BenchEntry {
  std::string backend;
  RunSummary run;
  double speedup = 1.0;     ///< first backend's loop time over this one's
  double max_difference = 0.0;  ///< max-norm distance to the first backend's field
};

struct BenchReport {
  std::vector<BenchEntry> entries;
};

/// Maximum tolerated difference between backends before a benchmark is rejected.
inline constexpr double backend_agreement_tolerance = 1e-12;

/// Times the first grid of the configuration on every backend in
/// `bench_backends`. Timing covers the time loop only; grid setup is excluded.
inline BenchReport bench(const RunConfig& c) {
  if (c.bench_backends.empty()) throw ConfigError("bench_backends: at least one backend is required");
  BenchReport report;
  for (const std::string& name : c.bench_backends) {
    Executor exec(BackendSpec::parse(name), c.chunk_size);
    BenchEntry e;
    e.backend = name;
    e.run = execute(c, 0, exec);
    if (!report.entries.empty()) {
      const BenchEntry& ref = report.entries.front();
      for (std::size_t i = 0; i < e.run.final_field.size(); ++i) {
        e.max_difference = std::max(e.max_difference, std::abs(e.run.final_field[i] - ref.run.final_field[i]));
      }
      if (!(e.max_difference <= backend_agreement_tolerance)) {
        throw Error("backend agreement failure: " + name + " differs from " + ref.backend + " by " +
                    format_double(e.max_difference));
      }
      e.speedup = ref.run.loop_seconds / e.run.loop_seconds;
    }
    report.entries.push_back(std::move(e));
  }
  return report;
}

inline void write_bench(std::ostream& out, const BenchReport& r) {
  out << "# wall time of the time loop; grid setup excluded\n";
  out << "backend\tloop_seconds\tspeedup\tmax_difference\tmean_iterations\n";
  for (const auto& e : r.entries) {
    char line[256];
    std::snprintf(line, sizeof line, "%s\t%.6f\t%.3f\t%.3e\t%.2f\n", e.backend.c_str(), e.run.loop_seconds, e.speedup,
                  e.max_difference, e.run.mean_iterations());
    out << line;
  }
  out << "\nbackend\tkernel\tcalls\tseconds\n";
  for (const auto& e : r.entries) {
    for (const auto& [kernel, t] : e.run.kernel_timings) {
      out << e.backend << '\t' << kernel << '\t' << t.calls << '\t' << t.seconds << '\n';
    }
  }
}

inline nlohmann::json to_json(const RunSummary& s) {
  nlohmann::json j{{"M", s.grid},
                   {"tau", s.tau},
                   {"T", s.final_time},
                   {"iterations", s.iterations},
                   {"loop_seconds", s.loop_seconds},
                   {"dumps", s.dumps}};
  if (s.has_exact) j["errors"] = {{"inf", s.errors.inf}, {"l2", s.errors.l2}, {"nodes", s.errors.count}};
  nlohmann::json kernels = nlohmann::json::object();
  for (const auto& [name, t] : s.kernel_timings) kernels[name] = {{"calls", t.calls}, {"seconds", t.seconds}};
  j["kernels"] = kernels;
  return j;
}

inline nlohmann::json to_json(const ErrorReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json j = to_json(row.run);
    if (row.order_inf) j["order_inf"] = *row.order_inf;
    if (row.order_l2) j["order_l2"] = *row.order_l2;
    rows.push_back(j);
  }
  return rows;
}

inline nlohmann::json to_json(const BenchReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : r.entries) {
    nlohmann::json j = to_json(e.run);
    j["backend"] = e.backend;
    j["speedup"] = e.speedup;
    j["max_difference"] = e.max_difference;
    rows.push_back(j);
  }
  return rows;
}

/// Writes {"config": ..., "results": ...} to `path`.
inline void write_manifest(const std::string& path, const RunConfig& c, const std::string& command,
                           const nlohmann::json& results) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot write manifest '" + path + "'");
  out << nlohmann::json{{"command", command}, {"config", to_json(c)}, {"results", results}}.dump(2) << '\n';
}

}  // namespace kfbi
