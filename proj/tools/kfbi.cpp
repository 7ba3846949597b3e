// Command-line driver: solve, converge and bench subcommands over a JSON run
// configuration.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kfbi/config.hpp"
#include "kfbi/errors.hpp"
#include "kfbi/report.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_failure = 1;
constexpr int exit_invalid = 2;
constexpr int exit_not_converged = 3;

struct Overrides {
  std::string backend;
  std::string out_dir;
  std::string snapshots;
};

std::vector<double> parse_times(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw kfbi::ConfigError("--snapshots: '" + item + "' is not a number");
    out.push_back(v);
  }
  return out;
}

kfbi::RunConfig load(const std::string& path, const Overrides& o) {
  kfbi::RunConfig c = kfbi::load_config(path);
  if (!o.backend.empty()) c.backend = o.backend;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (!o.snapshots.empty()) c.snapshots = parse_times(o.snapshots);
  c.validate();
  return c;
}

std::string out_path(const kfbi::RunConfig& c, const std::string& name) {
  std::filesystem::create_directories(c.out_dir);
  return (std::filesystem::path(c.out_dir) / name).string();
}

void print_summary(const kfbi::RunSummary& s) {
  std::printf("M=%d tau=%g T=%g steps=%zu iterations=%d..%d (mean %.1f) loop=%.3fs", s.grid, s.tau, s.final_time,
              s.iterations.size(), s.min_iterations(), s.max_iterations(), s.mean_iterations(), s.loop_seconds);
  if (s.has_exact) std::printf(" err_inf=%.6e err_l2=%.6e", s.errors.inf, s.errors.l2);
  std::printf("\n");
  for (const auto& d : s.dumps) std::printf("  wrote %s\n", d.c_str());
}

int cmd_solve(const std::string& path, const Overrides& o) {
  const kfbi::RunConfig c = load(path, o);
  kfbi::Executor exec(kfbi::BackendSpec::parse(c.backend), c.chunk_size);
  nlohmann::json results = nlohmann::json::array();
  for (std::size_t k = 0; k < c.grids.size(); ++k) {
    const kfbi::RunSummary s = kfbi::execute(c, k, exec, true);
    print_summary(s);
    results.push_back(kfbi::to_json(s));
  }
  kfbi::write_manifest(out_path(c, "manifest_solve.json"), c, "solve", results);
  return exit_ok;
}

int cmd_converge(const std::string& path, const Overrides& o) {
  const kfbi::RunConfig c = load(path, o);
  if (c.grids.size() < 2) std::fprintf(stderr, "note: a single grid gives no observed order\n");
  kfbi::Executor exec(kfbi::BackendSpec::parse(c.backend), c.chunk_size);
  const std::string table_path = out_path(c, "convergence.tsv");
  std::ofstream table(table_path);
  if (!table) throw kfbi::Error("cannot write '" + table_path + "'");
  const kfbi::ErrorReport report = kfbi::convergence_study(c, exec, table);
  kfbi::write_table_header(std::cout);
  for (const auto& row : report.rows) kfbi::write_table_row(std::cout, row);
  kfbi::write_manifest(out_path(c, "manifest_converge.json"), c, "converge", kfbi::to_json(report));
  std::printf("wrote %s\n", table_path.c_str());
  return exit_ok;
}

int cmd_bench(const std::string& path, const Overrides& o) {
  const kfbi::RunConfig c = load(path, o);
  const kfbi::BenchReport report = kfbi::bench(c);
  kfbi::write_bench(std::cout, report);
  const std::string bench_path = out_path(c, "bench.tsv");
  std::ofstream out(bench_path);
  kfbi::write_bench(out, report);
  kfbi::write_manifest(out_path(c, "manifest_bench.json"), c, "bench", kfbi::to_json(report));
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kernel-free boundary integral solver for heat, wave and Schrodinger equations"};
  app.require_subcommand(1);
  Overrides o;
  std::string config;
  app.add_option("--backend", o.backend, "serial or workers:N (overrides the config)");
  app.add_option("--out-dir", o.out_dir, "output directory (overrides the config)");
  app.add_option("--snapshots", o.snapshots, "comma-separated snapshot times, e.g. 0.5,1.0");

  auto* solve = app.add_subcommand("solve", "run each grid of the config and dump snapshots");
  auto* converge = app.add_subcommand("converge", "grid-refinement study with an error table");
  auto* bench = app.add_subcommand("bench", "time the first grid on every backend in bench_backends");
  for (auto* sub : {solve, converge, bench}) {
    sub->add_option("config", config, "JSON run configuration")->required();
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_invalid;
  }

  try {
    if (solve->parsed()) return cmd_solve(config, o);
    if (converge->parsed()) return cmd_converge(config, o);
    return cmd_bench(config, o);
  } catch (const kfbi::ConfigError& e) {
    std::fprintf(stderr, "invalid configuration: %s\n", e.what());
    return exit_invalid;
  } catch (const kfbi::GeometryError& e) {
    std::fprintf(stderr, "invalid geometry: %s\n", e.what());
    return exit_invalid;
  } catch (const kfbi::ConvergenceError& e) {
    std::fprintf(stderr, "not converged: %s\n", e.what());
    return exit_not_converged;
  } catch (const kfbi::InstabilityError& e) {
    std::fprintf(stderr, "unstable: %s\n", e.what());
    return exit_not_converged;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_failure;
  }
}
