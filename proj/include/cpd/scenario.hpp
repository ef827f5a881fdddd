#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpd/dynamics.hpp"
#include "cpd/energy.hpp"
#include "cpd/geometry.hpp"

namespace cpd {

/// Serializable description of a domain; mirrors the geometry constructors.
struct DomainSpec {
  enum class Shape { disk, strip, half_plane, unite, intersection, complement };

  Shape shape = Shape::disk;
  Vec2 center;
  double radius = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  Vec2 point;
  Vec2 normal{1.0, 0.0};
  std::vector<DomainSpec> parts; // two operands for composite shapes
  double blend_radius = kDefaultBlendRadius;
  std::optional<double> tube_width;

  static DomainSpec disk(Vec2 center, double radius);
  static DomainSpec strip(double y_min, double y_max);
  static DomainSpec half_plane(Vec2 point, Vec2 normal);
  static DomainSpec combine(Shape shape, DomainSpec a, DomainSpec b, double blend_radius = kDefaultBlendRadius);

  friend bool operator==(const DomainSpec &, const DomainSpec &) = default;
};

DomainGeometry build_domain(const DomainSpec &spec);

struct PotentialSpec {
  double exponent = 1.0;
  bool regularized = false;
  std::optional<double> cutoff;
  Vec2 external_coefficients; // zero means no external potential

  friend bool operator==(const PotentialSpec &, const PotentialSpec &) = default;
};

EnergyModel build_model(const PotentialSpec &spec);

/// Sampling region: a disk or an axis-aligned rectangle.
struct Region {
  enum class Shape { disk, rect };

  Shape shape = Shape::disk;
  Vec2 center;
  double radius = 1.0;
  Vec2 lo;
  Vec2 hi;

  static Region disk(Vec2 center, double radius);
  static Region rect(Vec2 lo, Vec2 hi);

  double area() const;
  bool contains(Vec2 x) const;

  friend bool operator==(const Region &, const Region &) = default;
};

struct InitialCondition {
  enum class Kind { uniform_rejection, grid };

  Kind kind = Kind::uniform_rejection;
  Region region;
  double min_separation = 0.025;
  std::uint64_t seed = 1;

  friend bool operator==(const InitialCondition &, const InitialCondition &) = default;
};

/// Two-colour rule for rendering, evaluated on initial positions: red when
/// |x - center| < radius (disk) or x.y > level (above).
struct ColorRule {
  enum class Kind { disk, above };

  Kind kind = Kind::disk;
  Vec2 center;
  double radius = 0.5;
  double level = 0.0;

  bool red(Vec2 x) const;
  /// Signed coordinate that is negative on the red side.
  double ordering(Vec2 x) const;

  friend bool operator==(const ColorRule &, const ColorRule &) = default;
};

struct ScenarioConfig {
  std::string name;
  std::string scale = "desk"; // "desk" or "full"
  bool long_running = false;
  DomainSpec domain;
  PotentialSpec potential;
  IntegratorConfig integrator;
  std::size_t n = 100;
  InitialCondition initial;
  double T = 1.0;
  ColorRule color;
  std::string output_dir;

  /// Throws ConfigError on inconsistent values.
  void validate() const;

  friend bool operator==(const ScenarioConfig &, const ScenarioConfig &) = default;
};

nlohmann::json to_json(const ScenarioConfig &config);
ScenarioConfig scenario_from_json(const nlohmann::json &j);
ScenarioConfig load_scenario(const std::string &path);
void save_scenario(const ScenarioConfig &config, const std::string &path);

/// n points uniform in the region, pairwise at least min_separation apart, by
/// sequential rejection with a seeded generator. Throws ConfigError when the
/// packing fraction n pi (sep/2)^2 / area reaches 0.55 or after 10^6 n draws.
Positions sample_initial_uniform(const Region &region, std::size_t n, double min_separation, std::uint64_t seed);

/// Cell centres of a rows x cols grid over the rectangle, rows =
/// max(1, round(sqrt(n h / w))), cols = ceil(n / rows), filled row by row from
/// the bottom-left; the last row may be partial.
Positions sample_initial_grid(Vec2 x_range, Vec2 y_range, std::size_t n);

Positions sample_initial(const ScenarioConfig &config);

/// All builtin scenarios, each at full size and as a small desk variant.
std::vector<ScenarioConfig> builtin_scenarios();
std::optional<ScenarioConfig> find_builtin(const std::string &name, bool desk);

/// Fixed benchmark problems for the penalty convergence study.
/// "single_particle": one particle at the origin of the unit disk pushed by the
/// constant force (0.5, 0); it reaches the wall at t = 2 and stays. "interior":
/// the same force over T = 1, so the wall is never reached.
struct PenaltyBenchmark {
  std::string name;
  DomainGeometry domain;
  EnergyModel model;
  Positions initial;
  double T = 0.0;
  double force = 0.0;
};

PenaltyBenchmark penalty_benchmark(const std::string &name);

DomainSpec dumbbell_spec();
DomainSpec channel_bump_spec();
DomainSpec channel_horseshoe_spec();

} // namespace cpd
