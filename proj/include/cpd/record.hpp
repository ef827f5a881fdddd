#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cpd/diagnostics.hpp"
#include "cpd/dynamics.hpp"
#include "cpd/scenario.hpp"

namespace cpd {

/// One scenario run: the config it came from, its frames and the diagnostics.
struct ScenarioRecord {
  ScenarioConfig config;
  Trajectory trajectory;
  std::vector<DiagnosticReport> diagnostics;
};

/// The standard check suite for a trajectory of the given scenario. Checks
/// that do not apply are reported as skipped; statistics as info.
std::vector<DiagnosticReport> run_diagnostics(const ScenarioConfig &config, const Trajectory &trajectory);

bool all_enabled_pass(const std::vector<DiagnosticReport> &reports);

/// Samples X0, simulates, runs diagnostics and, when config.output_dir is
/// non-empty, writes the record there.
ScenarioRecord run_scenario(const ScenarioConfig &config);

/// Fraction of particles with |x - center| > radius in a frame.
double outer_fraction(const Frame &frame, Vec2 center, double radius);

/// Fraction of (red, blue) pairs whose order along the colour rule's
/// coordinate is reversed relative to the initial frame. Zero means the two
/// colours have not mixed.
double color_inversion_fraction(const Trajectory &trajectory, const ColorRule &rule);

/// Directory layout: config.json, trajectory.txt (frame t particle x y
/// on_boundary), summary.txt (frame t energy min_separation step max_force,
/// then one "# check" row per diagnostic) and diagnostics.txt (flat
/// key=value). Numbers use shortest round-trip formatting.
void write_record(const ScenarioRecord &record, const std::filesystem::path &dir);

/// Accepts the run directory or any file inside it.
ScenarioRecord read_record(const std::filesystem::path &path);

std::string format_double(double value);

} // namespace cpd
