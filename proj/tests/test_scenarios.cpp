#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <set>

#include "cpd/record.hpp"
#include "cpd/render.hpp"
#include "cpd/scenario.hpp"

using namespace cpd;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
  const fs::path p = fs::temp_directory_path() / ("cpd_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  return p;
}

ScenarioConfig small_run() {
  ScenarioConfig c = *find_builtin("circle_case1", true);
  c.n = 12;
  c.T = 5.0;
  c.initial.seed = 77;
  return c;
}

std::size_t count(const std::string &s, const std::string &what) {
  std::size_t n = 0;
  for (auto p = s.find(what); p != std::string::npos; p = s.find(what, p + 1))
    ++n;
  return n;
}

} // namespace

TEST_CASE("uniform sampling") {
  const Region disk = Region::disk({0.5, 0}, 0.5);
  const Positions x = sample_initial_uniform(disk, 200, 0.02, 5);
  REQUIRE(x.size() == 200);
  double closest = INFINITY;
  for (std::size_t i = 0; i < x.size(); ++i) {
    CHECK(norm(x[i] - Vec2{0.5, 0}) <= 0.5);
    for (std::size_t j = 0; j < i; ++j)
      closest = std::min(closest, norm(x[i] - x[j]));
  }
  CHECK(closest >= 0.02);

  CHECK(sample_initial_uniform(disk, 200, 0.02, 5) == x);
  CHECK(sample_initial_uniform(disk, 200, 0.02, 6) != x);
  CHECK(sample_initial_uniform(disk, 1, 0.02, 5).size() == 1);
  CHECK(sample_initial_uniform(disk, 0, 0.02, 5).empty());

  const Region box = Region::rect({1, 2}, {3, 2.5});
  for (const Vec2 &p : sample_initial_uniform(box, 50, 0.05, 1))
    CHECK(box.contains(p));

  // 0.6 of the unit disk's area
  CHECK_THROWS_AS(sample_initial_uniform(Region::disk({0, 0}, 1), 2400, 0.04, 1), ConfigError);
  CHECK_THROWS_AS(sample_initial_uniform(disk, 10, 0.0, 1), ConfigError);
}

TEST_CASE("grid layout") {
  const Positions four = sample_initial_grid({0, 2}, {0, 1}, 4);
  CHECK(four == Positions{{0.25, 0.5}, {0.75, 0.5}, {1.25, 0.5}, {1.75, 0.5}});
  CHECK(sample_initial_grid({0, 2}, {0, 1}, 1) == Positions{{1.0, 0.5}});
  CHECK(sample_initial_grid({0, 2}, {0, 1}, 0).empty());

  // 15 rows of 60 with pitch 0.08
  const Positions g = sample_initial_grid({-1.7, 3.1}, {0, 1.2}, 900);
  REQUIRE(g.size() == 900);
  std::set<double> xs, ys;
  for (const Vec2 &p : g) {
    xs.insert(p.x);
    ys.insert(p.y);
  }
  CHECK(xs.size() == 60);
  CHECK(ys.size() == 15);
  CHECK(*xs.begin() == Approx(-1.66));
  CHECK(*xs.rbegin() == Approx(3.06));
  CHECK(*ys.begin() == Approx(0.04));
  CHECK(*ys.rbegin() == Approx(1.16));

  const Positions partial = sample_initial_grid({0, 1}, {0, 1}, 5);
  REQUIRE(partial.size() == 5);
  // 2 rows of 3; the fifth point is the middle of the top row
  CHECK(partial[4].x == Approx(0.5));
  CHECK(partial[4].y == Approx(0.75));
  CHECK_THROWS_AS(sample_initial_grid({1, 1}, {0, 1}, 3), ConfigError);
}

TEST_CASE("builtins") {
  const auto case1 = find_builtin("circle_case1", false);
  REQUIRE(case1);
  CHECK(case1->integrator.dt == 0.5);
  CHECK(case1->n == 3000);
  CHECK(case1->initial.min_separation == 0.025);
  CHECK(case1->color.red({0.3, 0.3}));
  CHECK_FALSE(case1->color.red({0.5, 0.0}));
  CHECK_FALSE(case1->color.red({0.0, -0.7}));

  const auto bump = find_builtin("channel_bump", true);
  REQUIRE(bump);
  CHECK(bump->n == 100);
  CHECK(bump->potential.external_coefficients == Vec2{-0.002, 0});
  CHECK(bump->initial.kind == InitialCondition::Kind::grid);

  CHECK(find_builtin("dumbbell", false)->integrator.dt == 0.25);
  CHECK(find_builtin("circle_case2_dt3", true)->integrator.dt == 3.0);
  CHECK_FALSE(find_builtin("nope", true));

  std::set<std::string> names;
  for (const ScenarioConfig &c : builtin_scenarios()) {
    CHECK_NOTHROW(c.validate());
    CHECK(c.long_running == (c.scale == "full"));
    names.insert(c.name);
    const DomainGeometry g = build_domain(c.domain);
    if (c.initial.kind == InitialCondition::Kind::uniform_rejection && c.scale == "desk")
      for (const Vec2 &p : sample_initial(c))
        CHECK(g.contains(p));
  }
  CHECK(names.size() == 7);
}

TEST_CASE("config JSON round trip") {
  for (const ScenarioConfig &c : builtin_scenarios()) {
    CHECK(scenario_from_json(to_json(c)) == c);
    CHECK(scenario_from_json(nlohmann::json::parse(to_json(c).dump())) == c);
  }

  ScenarioConfig c = small_run();
  c.potential.regularized = true;
  c.potential.cutoff = 0.01;
  c.domain.tube_width = 0.2;
  c.integrator.scheme = Scheme::penalty_euler;
  c.integrator.penalty_k = 50;
  c.integrator.dt = 0.005;
  CHECK(scenario_from_json(to_json(c)) == c);

  const fs::path dir = scratch("json");
  fs::create_directories(dir);
  save_scenario(c, (dir / "c.json").string());
  CHECK(load_scenario((dir / "c.json").string()) == c);
  fs::remove_all(dir);

  CHECK_THROWS_AS(load_scenario("/nonexistent/c.json"), ConfigError);
  nlohmann::json bad = to_json(c);
  bad["initial_condition"]["kind"] = "poisson";
  CHECK_THROWS_AS(scenario_from_json(bad), ConfigError);
}

TEST_CASE("record round trip") {
  ScenarioConfig c = small_run();
  const fs::path dir = scratch("record");
  c.output_dir = dir.string();
  const ScenarioRecord r = run_scenario(c);
  REQUIRE(fs::exists(dir / "trajectory.txt"));

  const ScenarioRecord back = read_record(dir / "trajectory.txt");
  CHECK(back.config == c);
  CHECK(back.diagnostics == r.diagnostics);
  CHECK(back.trajectory.completed == r.trajectory.completed);
  CHECK(back.trajectory.config.dt == r.trajectory.config.dt);
  REQUIRE(back.trajectory.frames.size() == r.trajectory.frames.size());
  for (std::size_t m = 0; m < r.trajectory.frames.size(); ++m) {
    const Frame &a = r.trajectory.frames[m], &b = back.trajectory.frames[m];
    CHECK(a.positions == b.positions);
    CHECK(a.on_boundary == b.on_boundary);
    CHECK(a.time == b.time);
    CHECK(a.energy == b.energy);
    CHECK(a.min_separation == b.min_separation);
    CHECK(a.step == b.step);
  }
  CHECK(run_diagnostics(back.config, back.trajectory) == r.diagnostics);
  fs::remove_all(dir);

  CHECK_THROWS_AS(read_record(scratch("missing")), ConfigError);
}

TEST_CASE("run_scenario is deterministic") {
  const ScenarioRecord a = run_scenario(small_run());
  const ScenarioRecord b = run_scenario(small_run());
  REQUIRE(a.trajectory.frames.size() == b.trajectory.frames.size());
  for (std::size_t m = 0; m < a.trajectory.frames.size(); ++m)
    CHECK(a.trajectory.frames[m].positions == b.trajectory.frames[m].positions);
  CHECK(a.diagnostics == b.diagnostics);
  CHECK(all_enabled_pass(a.diagnostics));
}

TEST_CASE("rendering") {
  const ScenarioRecord r = run_scenario(small_run());
  const std::string svg = render_frame_svg(r, 3);
  CHECK(svg == render_frame_svg(r, 3));
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(count(svg, "<circle") == 12);
  CHECK(count(svg, "<path") == 1);
  CHECK_THROWS_AS(render_frame_svg(r, r.trajectory.frames.size()), ConfigError);

  ScenarioRecord empty = r;
  for (Frame &f : empty.trajectory.frames) {
    f.positions.clear();
    f.on_boundary.clear();
  }
  const std::string outline = render_frame_svg(empty, 0);
  CHECK(count(outline, "<circle") == 0);
  CHECK(count(outline, "<path") == 1);
}

TEST_CASE("outer fraction and colour mixing") {
  Frame f;
  f.positions = {{0.1, 0}, {0.9, 0}, {0, -0.85}, {0.5, 0.5}};
  CHECK(outer_fraction(f, {0, 0}, 0.8) == 0.5);

  Trajectory t;
  t.frames.push_back(f);
  const ColorRule rule{ColorRule::Kind::above, {}, 0.0, 0.0};
  CHECK(color_inversion_fraction(t, rule) == 0.0);
}
