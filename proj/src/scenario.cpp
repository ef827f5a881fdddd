#include "cpd/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <unordered_map>

namespace cpd {

using nlohmann::json;

namespace {

json vec(Vec2 v) { return json::array({v.x, v.y}); }

Vec2 vec_from(const json &j, const char *what) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError(std::string(what) + " must be a two-element array");
  return {j[0].get<double>(), j[1].get<double>()};
}

template <class T> T field(const json &j, const char *key) {
  if (!j.contains(key))
    throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception &e) {
    throw ConfigError(std::string("bad field '") + key + "': " + e.what());
  }
}

template <class T> T field_or(const json &j, const char *key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null())
    return fallback;
  return field<T>(j, key);
}

const char *shape_name(DomainSpec::Shape s) {
  switch (s) {
  case DomainSpec::Shape::disk:
    return "disk";
  case DomainSpec::Shape::strip:
    return "strip";
  case DomainSpec::Shape::half_plane:
    return "half_plane";
  case DomainSpec::Shape::unite:
    return "union";
  case DomainSpec::Shape::intersection:
    return "intersection";
  case DomainSpec::Shape::complement:
    return "complement";
  }
  return "?";
}

json domain_to_json(const DomainSpec &d) {
  json j;
  j["shape"] = shape_name(d.shape);
  switch (d.shape) {
  case DomainSpec::Shape::disk:
    j["center"] = vec(d.center);
    j["radius"] = d.radius;
    break;
  case DomainSpec::Shape::strip:
    j["y_min"] = d.y_min;
    j["y_max"] = d.y_max;
    break;
  case DomainSpec::Shape::half_plane:
    j["point"] = vec(d.point);
    j["normal"] = vec(d.normal);
    break;
  default:
    j["a"] = domain_to_json(d.parts.at(0));
    j["b"] = domain_to_json(d.parts.at(1));
    j["blend_radius"] = d.blend_radius;
    break;
  }
  if (d.tube_width)
    j["tube_width"] = *d.tube_width;
  return j;
}

DomainSpec domain_from_json(const json &j) {
  const auto shape = field<std::string>(j, "shape");
  DomainSpec d;
  if (shape == "disk") {
    d = DomainSpec::disk(vec_from(field<json>(j, "center"), "center"), field<double>(j, "radius"));
  } else if (shape == "strip") {
    d = DomainSpec::strip(field<double>(j, "y_min"), field<double>(j, "y_max"));
  } else if (shape == "half_plane") {
    d = DomainSpec::half_plane(vec_from(field<json>(j, "point"), "point"),
                               vec_from(field<json>(j, "normal"), "normal"));
  } else {
    DomainSpec::Shape s;
    if (shape == "union")
      s = DomainSpec::Shape::unite;
    else if (shape == "intersection")
      s = DomainSpec::Shape::intersection;
    else if (shape == "complement")
      s = DomainSpec::Shape::complement;
    else
      throw ConfigError("unknown domain shape '" + shape + "'");
    d = DomainSpec::combine(s, domain_from_json(field<json>(j, "a")), domain_from_json(field<json>(j, "b")),
                            field_or<double>(j, "blend_radius", kDefaultBlendRadius));
  }
  if (j.contains("tube_width") && !j["tube_width"].is_null())
    d.tube_width = field<double>(j, "tube_width");
  return d;
}

json region_to_json(const Region &r) {
  if (r.shape == Region::Shape::disk)
    return {{"shape", "disk"}, {"center", vec(r.center)}, {"radius", r.radius}};
  return {{"shape", "rect"}, {"x", json::array({r.lo.x, r.hi.x})}, {"y", json::array({r.lo.y, r.hi.y})}};
}

Region region_from_json(const json &j) {
  const auto shape = field<std::string>(j, "shape");
  if (shape == "disk")
    return Region::disk(vec_from(field<json>(j, "center"), "center"), field<double>(j, "radius"));
  if (shape == "rect") {
    const Vec2 x = vec_from(field<json>(j, "x"), "x");
    const Vec2 y = vec_from(field<json>(j, "y"), "y");
    return Region::rect({x.x, y.x}, {x.y, y.y});
  }
  throw ConfigError("unknown region shape '" + shape + "'");
}

// Uniform hash grid with cell size >= separation for neighbour rejection.
class SeparationGrid {
public:
  explicit SeparationGrid(double cell) : cell_(cell) {}

  bool clear(Vec2 p, double sep) const {
    const auto [cx, cy] = cell_of(p);
    for (long dx = -1; dx <= 1; ++dx) {
      for (long dy = -1; dy <= 1; ++dy) {
        const auto it = cells_.find(key(cx + dx, cy + dy));
        if (it == cells_.end())
          continue;
        for (const Vec2 &q : it->second)
          if (norm2(p - q) < sep * sep)
            return false;
      }
    }
    return true;
  }

  void insert(Vec2 p) {
    const auto [cx, cy] = cell_of(p);
    cells_[key(cx, cy)].push_back(p);
  }

private:
  std::pair<long, long> cell_of(Vec2 p) const {
    return {static_cast<long>(std::floor(p.x / cell_)), static_cast<long>(std::floor(p.y / cell_))};
  }
  static std::uint64_t key(long x, long y) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) | static_cast<std::uint32_t>(y);
  }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<Vec2>> cells_;
};

constexpr double kChannelTop = 1.2;
constexpr double kChannelDrift = -0.002;

} // namespace

DomainSpec DomainSpec::disk(Vec2 center, double radius) {
  DomainSpec d;
  d.shape = Shape::disk;
  d.center = center;
  d.radius = radius;
  return d;
}

DomainSpec DomainSpec::strip(double y_min, double y_max) {
  DomainSpec d;
  d.shape = Shape::strip;
  d.y_min = y_min;
  d.y_max = y_max;
  return d;
}

DomainSpec DomainSpec::half_plane(Vec2 point, Vec2 normal) {
  DomainSpec d;
  d.shape = Shape::half_plane;
  d.point = point;
  d.normal = normal;
  return d;
}

DomainSpec DomainSpec::combine(Shape shape, DomainSpec a, DomainSpec b, double blend_radius) {
  DomainSpec d;
  d.shape = shape;
  d.parts = {std::move(a), std::move(b)};
  d.blend_radius = blend_radius;
  return d;
}

DomainGeometry build_domain(const DomainSpec &spec) {
  DomainGeometry g = [&] {
    try {
      switch (spec.shape) {
      case DomainSpec::Shape::disk:
        return make_disk(spec.center, spec.radius);
      case DomainSpec::Shape::strip:
        return make_strip(spec.y_min, spec.y_max);
      case DomainSpec::Shape::half_plane:
        return make_half_plane(spec.point, spec.normal);
      default:
        break;
      }
      if (spec.parts.size() != 2)
        throw ConfigError("composite domain needs exactly two parts");
      const DomainGeometry a = build_domain(spec.parts[0]);
      const DomainGeometry b = build_domain(spec.parts[1]);
      if (spec.shape == DomainSpec::Shape::unite)
        return smooth_union(a, b, spec.blend_radius);
      if (spec.shape == DomainSpec::Shape::intersection)
        return smooth_intersection(a, b, spec.blend_radius);
      return complement(a, b, spec.blend_radius);
    } catch (const GeometryError &e) {
      throw ConfigError(std::string("domain: ") + e.what());
    }
  }();
  if (spec.tube_width)
    g = g.with_tube_width(*spec.tube_width);
  return g;
}

EnergyModel build_model(const PotentialSpec &spec) {
  EnergyModel model;
  try {
    const InteractionPotential base(spec.exponent);
    if (spec.regularized) {
      if (!spec.cutoff)
        throw ConfigError("regularized interaction needs a cutoff");
      model.interaction = regularize(base, *spec.cutoff);
    } else {
      model.interaction = base;
    }
  } catch (const EnergyError &e) {
    throw ConfigError(std::string("potential: ") + e.what());
  }
  model.external = ExternalPotential::linear(spec.external_coefficients);
  return model;
}

Region Region::disk(Vec2 center, double radius) {
  Region r;
  r.shape = Shape::disk;
  r.center = center;
  r.radius = radius;
  return r;
}

Region Region::rect(Vec2 lo, Vec2 hi) {
  Region r;
  r.shape = Shape::rect;
  r.lo = lo;
  r.hi = hi;
  return r;
}

double Region::area() const {
  if (shape == Shape::disk)
    return std::numbers::pi * radius * radius;
  return (hi.x - lo.x) * (hi.y - lo.y);
}

bool Region::contains(Vec2 x) const {
  if (shape == Shape::disk)
    return norm2(x - center) < radius * radius;
  return x.x > lo.x && x.x < hi.x && x.y > lo.y && x.y < hi.y;
}

bool ColorRule::red(Vec2 x) const { return ordering(x) < 0.0; }

double ColorRule::ordering(Vec2 x) const {
  if (kind == Kind::disk)
    return norm(x - center) - radius;
  return level - x.y;
}

void ScenarioConfig::validate() const {
  integrator.validate();
  if (n == 0)
    throw ConfigError("n must be positive");
  if (!(T >= 0.0))
    throw ConfigError("T must be non-negative");
  if (initial.kind == InitialCondition::Kind::uniform_rejection) {
    if (!(initial.min_separation > 0.0))
      throw ConfigError("min_separation must be positive for uniform_rejection");
    if (!(initial.region.area() > 0.0))
      throw ConfigError("sampling region is empty");
  } else {
    if (initial.region.shape != Region::Shape::rect || !(initial.region.hi.x > initial.region.lo.x) ||
        !(initial.region.hi.y > initial.region.lo.y))
      throw ConfigError("grid initial condition needs a nonempty rectangle");
  }
  build_domain(domain);
  build_model(potential);
}

json to_json(const ScenarioConfig &c) {
  json j;
  j["name"] = c.name;
  j["scale"] = c.scale;
  j["long_running"] = c.long_running;
  j["domain"] = domain_to_json(c.domain);

  json interaction = {{"kind", "inverse_power"}, {"exponent", c.potential.exponent},
                      {"regularized", c.potential.regularized}};
  interaction["cutoff"] = c.potential.cutoff ? json(*c.potential.cutoff) : json(nullptr);
  json external;
  if (c.potential.external_coefficients == Vec2{})
    external = {{"kind", "none"}};
  else
    external = {{"kind", "linear"}, {"coefficients", vec(c.potential.external_coefficients)}};
  j["potential"] = {{"interaction", interaction}, {"external", external}};

  j["integrator"] = {{"scheme", to_string(c.integrator.scheme)},
                     {"dt", c.integrator.dt},
                     {"penalty_k", c.integrator.penalty_k},
                     {"record_every", c.integrator.record_every},
                     {"contact_tolerance", c.integrator.contact_tolerance},
                     {"stability_factor", c.integrator.stability_factor}};
  j["n"] = c.n;
  json ic;
  if (c.initial.kind == InitialCondition::Kind::uniform_rejection) {
    ic = {{"kind", "uniform_rejection"},
          {"region", region_to_json(c.initial.region)},
          {"min_separation", c.initial.min_separation},
          {"seed", c.initial.seed}};
  } else {
    ic = {{"kind", "grid"},
          {"x_range", json::array({c.initial.region.lo.x, c.initial.region.hi.x})},
          {"y_range", json::array({c.initial.region.lo.y, c.initial.region.hi.y})}};
  }
  j["initial_condition"] = ic;
  j["T"] = c.T;
  if (c.color.kind == ColorRule::Kind::disk)
    j["color_rule"] = {{"kind", "disk"}, {"center", vec(c.color.center)}, {"radius", c.color.radius}};
  else
    j["color_rule"] = {{"kind", "above"}, {"level", c.color.level}};
  j["output_dir"] = c.output_dir;
  return j;
}

ScenarioConfig scenario_from_json(const json &j) {
  ScenarioConfig c;
  try {
    c.name = field<std::string>(j, "name");
    c.scale = field_or<std::string>(j, "scale", "desk");
    c.long_running = field_or<bool>(j, "long_running", false);
    c.domain = domain_from_json(field<json>(j, "domain"));

    const json pot = field_or<json>(j, "potential", json::object());
    const json inter = field_or<json>(pot, "interaction", json::object());
    const auto kind = field_or<std::string>(inter, "kind", "inverse_power");
    if (kind != "inverse_power")
      throw ConfigError("unknown interaction kind '" + kind + "'");
    c.potential.exponent = field_or<double>(inter, "exponent", 1.0);
    c.potential.regularized = field_or<bool>(inter, "regularized", false);
    if (inter.contains("cutoff") && !inter["cutoff"].is_null())
      c.potential.cutoff = field<double>(inter, "cutoff");
    const json ext = field_or<json>(pot, "external", json{{"kind", "none"}});
    const auto ext_kind = field_or<std::string>(ext, "kind", "none");
    if (ext_kind == "linear")
      c.potential.external_coefficients = vec_from(field<json>(ext, "coefficients"), "coefficients");
    else if (ext_kind != "none")
      throw ConfigError("unknown external potential kind '" + ext_kind + "'");

    const json integ = field<json>(j, "integrator");
    c.integrator.scheme = scheme_from_string(field_or<std::string>(integ, "scheme", "projected_rk4"));
    c.integrator.dt = field<double>(integ, "dt");
    c.integrator.penalty_k = field_or<double>(integ, "penalty_k", 0.0);
    c.integrator.record_every = field_or<std::size_t>(integ, "record_every", 1);
    c.integrator.contact_tolerance = field_or<double>(integ, "contact_tolerance", kContactTolerance);
    c.integrator.stability_factor = field_or<double>(integ, "stability_factor", kPenaltyStabilityFactor);

    c.n = field<std::size_t>(j, "n");
    const json ic = field<json>(j, "initial_condition");
    const auto ic_kind = field<std::string>(ic, "kind");
    if (ic_kind == "uniform_rejection") {
      c.initial.kind = InitialCondition::Kind::uniform_rejection;
      c.initial.region = region_from_json(field<json>(ic, "region"));
      c.initial.min_separation = field<double>(ic, "min_separation");
      c.initial.seed = field_or<std::uint64_t>(ic, "seed", 1);
    } else if (ic_kind == "grid") {
      c.initial.kind = InitialCondition::Kind::grid;
      const Vec2 x = vec_from(field<json>(ic, "x_range"), "x_range");
      const Vec2 y = vec_from(field<json>(ic, "y_range"), "y_range");
      c.initial.region = Region::rect({x.x, y.x}, {x.y, y.y});
      c.initial.min_separation = 0.0;
      c.initial.seed = 0;
    } else {
      throw ConfigError("unknown initial condition kind '" + ic_kind + "'");
    }
    c.T = field<double>(j, "T");

    const json color = field_or<json>(j, "color_rule", json{{"kind", "disk"}, {"center", {0, 0}}, {"radius", 0.5}});
    const auto color_kind = field<std::string>(color, "kind");
    if (color_kind == "disk") {
      c.color.kind = ColorRule::Kind::disk;
      c.color.center = vec_from(field<json>(color, "center"), "center");
      c.color.radius = field<double>(color, "radius");
    } else if (color_kind == "above") {
      c.color.kind = ColorRule::Kind::above;
      c.color.level = field<double>(color, "level");
    } else {
      throw ConfigError("unknown color rule '" + color_kind + "'");
    }
    c.output_dir = field_or<std::string>(j, "output_dir", "");
  } catch (const json::exception &e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
  return c;
}

ScenarioConfig load_scenario(const std::string &path) {
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open scenario file " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception &e) {
    throw ConfigError("cannot parse " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

void save_scenario(const ScenarioConfig &config, const std::string &path) {
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path);
  out << to_json(config).dump(2) << '\n';
}

Positions sample_initial_uniform(const Region &region, std::size_t n, double min_separation, std::uint64_t seed) {
  if (!(min_separation > 0.0))
    throw ConfigError("min_separation must be positive");
  const double packing = static_cast<double>(n) * std::numbers::pi * 0.25 * min_separation * min_separation /
                         region.area();
  if (packing >= 0.55)
    throw ConfigError("packing fraction " + std::to_string(packing) +
                      " is too high for rejection sampling; reduce n or the separation");

  Vec2 lo = region.lo;
  Vec2 hi = region.hi;
  if (region.shape == Region::Shape::disk) {
    lo = region.center - Vec2{region.radius, region.radius};
    hi = region.center + Vec2{region.radius, region.radius};
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ux(lo.x, hi.x);
  std::uniform_real_distribution<double> uy(lo.y, hi.y);

  SeparationGrid grid(min_separation);
  Positions points;
  points.reserve(n);
  const std::uint64_t budget = 1'000'000ULL * std::max<std::uint64_t>(n, 1);
  std::uint64_t draws = 0;
  while (points.size() < n) {
    if (draws++ >= budget)
      throw ConfigError("rejection budget exhausted after " + std::to_string(points.size()) +
                        " points; use fewer particles or a smaller separation");
    const double x = ux(rng);
    const Vec2 p{x, uy(rng)};
    if (!region.contains(p) || !grid.clear(p, min_separation))
      continue;
    grid.insert(p);
    points.push_back(p);
  }
  return points;
}

Positions sample_initial_grid(Vec2 x_range, Vec2 y_range, std::size_t n) {
  const double w = x_range.y - x_range.x;
  const double h = y_range.y - y_range.x;
  if (!(w > 0.0) || !(h > 0.0))
    throw ConfigError("grid region must be nonempty");
  if (n == 0)
    return {};
  const auto rows = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(std::sqrt(n * h / w))));
  const std::size_t cols = (n + rows - 1) / rows;
  const double dx = w / static_cast<double>(cols);
  const double dy = h / static_cast<double>(rows);
  Positions points;
  points.reserve(n);
  for (std::size_t r = 0; r < rows && points.size() < n; ++r)
    for (std::size_t c = 0; c < cols && points.size() < n; ++c)
      points.push_back({x_range.x + (c + 0.5) * dx, y_range.x + (r + 0.5) * dy});
  return points;
}

Positions sample_initial(const ScenarioConfig &config) {
  const InitialCondition &ic = config.initial;
  if (ic.kind == InitialCondition::Kind::grid)
    return sample_initial_grid({ic.region.lo.x, ic.region.hi.x}, {ic.region.lo.y, ic.region.hi.y}, config.n);
  return sample_initial_uniform(ic.region, config.n, ic.min_separation, ic.seed);
}

PenaltyBenchmark penalty_benchmark(const std::string &name) {
  constexpr double push = 0.5;
  if (name != "single_particle" && name != "interior")
    throw ConfigError("unknown benchmark '" + name + "' (single_particle, interior)");
  PenaltyBenchmark b{name, make_disk({0.0, 0.0}, 1.0), EnergyModel{}, {{0.0, 0.0}}, 0.0, push};
  b.model.external = ExternalPotential::linear({-push, 0.0});
  b.T = name == "single_particle" ? 4.0 : 1.0;
  return b;
}

DomainSpec dumbbell_spec() {
  // Two half-radius lobes joined by a bar whose ends are buried in the lobes.
  const DomainSpec lobes = DomainSpec::combine(DomainSpec::Shape::unite, DomainSpec::disk({-0.5, 0.0}, 0.5),
                                               DomainSpec::disk({0.5, 0.0}, 0.5));
  const DomainSpec bar = DomainSpec::combine(DomainSpec::Shape::intersection, DomainSpec::strip(-0.15, 0.15),
                                             DomainSpec::disk({0.0, 0.0}, 0.45));
  return DomainSpec::combine(DomainSpec::Shape::unite, lobes, bar);
}

DomainSpec channel_bump_spec() {
  return DomainSpec::combine(DomainSpec::Shape::complement, DomainSpec::strip(0.0, kChannelTop),
                             DomainSpec::disk({4.0, -0.35}, 0.6));
}

DomainSpec channel_horseshoe_spec() {
  // Annulus cut to its right half: a cup opening upstream.
  const Vec2 c{4.3, 0.6};
  const DomainSpec ring = DomainSpec::combine(DomainSpec::Shape::complement, DomainSpec::disk(c, 0.45),
                                              DomainSpec::disk(c, 0.25));
  const DomainSpec cup =
      DomainSpec::combine(DomainSpec::Shape::intersection, ring, DomainSpec::half_plane(c, {-1.0, 0.0}));
  return DomainSpec::combine(DomainSpec::Shape::complement, DomainSpec::strip(0.0, kChannelTop), cup);
}

std::vector<ScenarioConfig> builtin_scenarios() {
  std::vector<ScenarioConfig> out;

  auto circle = [](std::string name, bool case2, double dt, bool desk) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.scale = desk ? "desk" : "full";
    c.long_running = !desk;
    c.domain = DomainSpec::disk({0.0, 0.0}, 1.0);
    c.integrator.dt = dt;
    c.integrator.record_every = desk ? 1 : 20;
    c.n = desk ? 100 : 3000;
    c.T = desk ? 300.0 : 3000.0;
    c.initial.kind = InitialCondition::Kind::uniform_rejection;
    c.initial.seed = desk ? 2 : 1;
    if (case2) {
      c.initial.region = Region::disk({0.5, 0.0}, 0.5);
      c.initial.min_separation = 0.012;
      c.color = {ColorRule::Kind::disk, {0.5, 0.0}, 0.25, 0.0};
    } else {
      c.initial.region = Region::disk({0.0, 0.0}, 1.0);
      c.initial.min_separation = 0.025;
      c.color = {ColorRule::Kind::disk, {0.0, 0.0}, 0.5, 0.0};
    }
    return c;
  };

  auto channel = [](std::string name, DomainSpec domain, bool desk) {
    ScenarioConfig c;
    c.name = std::move(name);
    c.scale = desk ? "desk" : "full";
    c.long_running = !desk;
    c.domain = std::move(domain);
    c.potential.external_coefficients = {kChannelDrift, 0.0};
    c.integrator.dt = 0.5;
    c.integrator.record_every = desk ? 1 : 20;
    c.n = desk ? 100 : 900;
    c.T = desk ? 2000.0 : 2400.0;
    c.initial.kind = InitialCondition::Kind::grid;
    c.initial.region = Region::rect({-1.7, 0.0}, {3.1, kChannelTop});
    c.initial.min_separation = 0.0;
    c.initial.seed = 0;
    c.color.kind = ColorRule::Kind::above;
    c.color.level = 0.5 * kChannelTop;
    return c;
  };

  for (bool desk : {false, true}) {
    out.push_back(circle("circle_case1", false, 0.5, desk));
    out.push_back(circle("circle_case2", true, 0.5, desk));
    out.push_back(circle("circle_case2_dt3", true, 3.0, desk));
    ScenarioConfig dumbbell = circle("dumbbell", true, 0.25, desk);
    dumbbell.domain = dumbbell_spec();
    if (!desk)
      dumbbell.T = 2000.0;
    out.push_back(dumbbell);
    out.push_back(channel("channel_plain", DomainSpec::strip(0.0, kChannelTop), desk));
    out.push_back(channel("channel_bump", channel_bump_spec(), desk));
    out.push_back(channel("channel_horseshoe", channel_horseshoe_spec(), desk));
  }
  return out;
}

std::optional<ScenarioConfig> find_builtin(const std::string &name, bool desk) {
  for (ScenarioConfig &c : builtin_scenarios())
    if (c.name == name && (c.scale == "desk") == desk)
      return c;
  return std::nullopt;
}

} // namespace cpd
