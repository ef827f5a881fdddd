#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cpd/diagnostics.hpp"
#include "cpd/record.hpp"
#include "cpd/render.hpp"
#include "cpd/scenario.hpp"

namespace fs = std::filesystem;
using namespace cpd;

namespace {

fs::path output_root() {
  if (const char *env = std::getenv("CPD_OUTPUT_ROOT"); env && *env)
    return env;
  return "runs";
}

void print_reports(const std::vector<DiagnosticReport> &reports) {
  for (const auto &r : reports) {
    std::printf("%-22s %-7s measured=%-14s threshold=%-14s", r.name.c_str(), to_string(r.status),
                format_double(r.measured).c_str(), format_double(r.threshold).c_str());
    if (r.violations)
      std::printf(" violations=%zu", r.violations);
    if (r.frame)
      std::printf(" frame=%zu", *r.frame);
    if (r.particle)
      std::printf(" particle=%zu", *r.particle);
    if (!r.note.empty())
      std::printf(" (%s)", r.note.c_str());
    std::printf("\n");
  }
}

int cmd_list() {
  std::printf("%-20s %-6s %6s %8s %8s %s\n", "name", "scale", "n", "dt", "T", "scheme");
  for (const auto &c : builtin_scenarios()) {
    std::printf("%-20s %-6s %6zu %8g %8g %s%s\n", c.name.c_str(), c.scale.c_str(), c.n, c.integrator.dt, c.T,
                to_string(c.integrator.scheme), c.long_running ? "  [long-running]" : "");
  }
  return 0;
}

int cmd_run(const std::string &target, const std::string &out, std::optional<std::uint64_t> seed, bool desk) {
  ScenarioConfig config;
  if (auto builtin = find_builtin(target, desk))
    config = *builtin;
  else if (fs::exists(target))
    config = load_scenario(target);
  else
    throw ConfigError("'" + target + "' is neither a builtin scenario nor a config file");
  if (seed)
    config.initial.seed = *seed;
  config.output_dir = out.empty() ? (output_root() / (config.name + "_" + config.scale)).string() : out;
  config.validate();

  std::printf("running %s (%s, n=%zu, dt=%g, T=%g) -> %s\n", config.name.c_str(), config.scale.c_str(), config.n,
              config.integrator.dt, config.T, config.output_dir.c_str());
  const ScenarioRecord record = run_scenario(config);
  print_reports(record.diagnostics);
  return all_enabled_pass(record.diagnostics) ? 0 : 1;
}

int cmd_check(const std::string &path) {
  const ScenarioRecord record = read_record(path);
  const auto reports = run_diagnostics(record.config, record.trajectory);
  print_reports(reports);
  return all_enabled_pass(reports) ? 0 : 1;
}

int cmd_converge(const std::string &name, const std::vector<double> &ks, double dt) {
  const PenaltyBenchmark b = penalty_benchmark(name);
  const auto rows = penalty_convergence_study(b.domain, b.model, b.initial, ks, dt, b.T);
  std::printf("%12s %14s %14s\n", "k", "penalty_dt", "sup_distance");
  bool ok = true;
  bool strict = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::printf("%12g %14.6g %14.6e\n", rows[i].k, rows[i].penalty_dt, rows[i].sup_distance);
    if (!std::isfinite(rows[i].sup_distance))
      ok = false;
    if (i > 0) {
      ok = ok && rows[i].sup_distance <= rows[i - 1].sup_distance + 1e-12;
      strict = strict && rows[i].sup_distance < rows[i - 1].sup_distance;
    }
  }
  const double order = rows.size() >= 2 ? fitted_order(rows) : std::nan("");
  if (std::isfinite(order))
    std::printf("fitted order %.4f\n", order);
  else
    std::printf("fitted order n/a\n");
  std::printf("non-increasing: %s, strictly decreasing: %s\n", ok ? "yes" : "no", strict ? "yes" : "no");
  return ok ? 0 : 1;
}

int cmd_render(const std::string &path, std::size_t frame, const std::string &out) {
  const ScenarioRecord record = read_record(path);
  fs::path target = out;
  if (target.empty()) {
    const fs::path dir = fs::is_directory(path) ? fs::path(path) : fs::path(path).parent_path();
    target = dir / ("frame_" + std::to_string(frame) + ".svg");
  }
  render_frame(record, frame, target);
  std::printf("%s\n", target.string().c_str());
  return 0;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Constrained particle dynamics"};
  app.require_subcommand(1);

  app.add_subcommand("list", "Print the builtin scenarios");

  auto *run = app.add_subcommand("run", "Run a scenario from a config file or builtin name");
  std::string run_target, run_out;
  std::optional<std::uint64_t> run_seed;
  bool run_desk = false;
  run->add_option("scenario", run_target, "Config file or builtin name")->required();
  run->add_option("--out", run_out, "Output directory (default $CPD_OUTPUT_ROOT/<name>_<scale>, root defaults to runs)");
  run->add_option("--seed", run_seed, "Override the initial-condition seed");
  run->add_flag("--desk", run_desk, "Use the desk-scale variant of a builtin");

  auto *check = app.add_subcommand("check", "Run the diagnostics suite on a recorded trajectory");
  std::string check_path;
  check->add_option("trajectory", check_path, "Run directory or a file inside it")->required();

  auto *converge = app.add_subcommand("converge", "Penalty convergence study against the projected reference");
  std::string bench = "single_particle";
  std::vector<double> ks{10, 100, 1000};
  double ref_dt = 0.01;
  converge->add_option("benchmark", bench, "single_particle or interior")->required();
  converge->add_option("--ks", ks, "Penalty constants")->delimiter(',');
  converge->add_option("--dt", ref_dt, "Reference step");

  auto *render = app.add_subcommand("render", "Write an SVG of one frame");
  std::string render_path, render_out;
  std::size_t render_frame_index = 0;
  render->add_option("trajectory", render_path, "Run directory or a file inside it")->required();
  render->add_option("--frame", render_frame_index, "Frame index")->required();
  render->add_option("--out", render_out, "SVG path (default frame_<M>.svg next to the trajectory)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("list"))
      return cmd_list();
    if (app.got_subcommand(run))
      return cmd_run(run_target, run_out, run_seed, run_desk);
    if (app.got_subcommand(check))
      return cmd_check(check_path);
    if (app.got_subcommand(converge))
      return cmd_converge(bench, ks, ref_dt);
    if (app.got_subcommand(render))
      return cmd_render(render_path, render_frame_index, render_out);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
