#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "cpd/diagnostics.hpp"
#include "cpd/scenario.hpp"

using namespace cpd;
using doctest::Approx;

namespace {

const DomainGeometry unit_disk = make_disk({0, 0}, 1.0);

Trajectory from_positions(const EnergyModel &model, const std::vector<Positions> &frames,
                          Scheme scheme = Scheme::projected_rk4) {
  Trajectory t;
  t.config.scheme = scheme;
  for (std::size_t m = 0; m < frames.size(); ++m) {
    SystemState s{double(m), frames[m], contact_flags(unit_disk, frames[m], kContactTolerance, scheme)};
    t.frames.push_back(make_frame(model, s, m));
  }
  return t;
}

Trajectory energies(std::initializer_list<double> values) {
  Trajectory t;
  std::size_t m = 0;
  for (double e : values) {
    Frame f;
    f.step = m;
    f.time = double(m++);
    f.energy = e;
    t.frames.push_back(f);
  }
  return t;
}

} // namespace

TEST_CASE("energy decay") {
  CHECK(check_energy_decay(energies({3, 2, 2, 1.5})).passed());
  CHECK(check_energy_decay(energies({3, 3 + 1e-10, 2})).passed());

  const auto r = check_energy_decay(energies({3, 2, 2.5, 1, 1.2}));
  CHECK(r.failed());
  CHECK(r.violations == 2);
  CHECK(r.frame == 2u);
  CHECK(r.measured == Approx(0.25));

  CHECK(check_energy_decay(energies({1, INFINITY})).failed());
  CHECK(check_energy_decay(energies({1})).passed());
}

TEST_CASE("separation") {
  const EnergyModel model;
  const Trajectory run = simulate(unit_disk, model, sample_initial_uniform(Region::disk({0, 0}, 1), 30, 0.02, 4),
                                  IntegratorConfig{}, 20.0);
  const auto r = check_separation(run, model);
  CHECK(r.passed());
  CHECK(r.measured >= 1.0);

  // A frame whose recorded energy understates the pair term must be caught.
  Trajectory bad = from_positions(model, {{{0, 0}, {0.1, 0}}});
  bad.frames[0].energy = 1.0;
  CHECK(check_separation(bad, model).failed());

  EnergyModel driven;
  driven.external = ExternalPotential::linear({-0.002, 0});
  const Trajectory t = from_positions(driven, {{{0.5, 0}, {-0.5, 0}}});
  CHECK(check_separation(t, driven).status == CheckStatus::skipped);
}

TEST_CASE("confinement") {
  const EnergyModel model;
  CHECK(check_confinement(from_positions(model, {{{0.3, 0}, {1, 0}}}), unit_disk).passed());
  const auto r = check_confinement(from_positions(model, {{{0.3, 0}}, {{1 + 1e-8, 0}}}), unit_disk);
  CHECK(r.failed());
  CHECK(r.frame == 1u);
  CHECK(r.particle == 0u);
  CHECK(check_confinement(from_positions(model, {{{1.01, 0}}}, Scheme::penalty_euler), unit_disk).status ==
        CheckStatus::skipped);
}

TEST_CASE("contact events") {
  EnergyModel model;
  model.external = ExternalPotential::linear({0, -1.0});
  // Particle 0 slides along the wall and leaves; particle 1 touches twice.
  const std::vector<Positions> frames = {{{0, 0.5}, {0, 0}},     {{0, 1}, {1, 0}},      {{0, 1}, {0.9, 0}},
                                         {{0, 0.8}, {1, 0}},     {{0, 0.7}, {0.5, 0}}};
  const Trajectory t = from_positions(model, frames);
  const auto events = detect_contact_events(t, unit_disk, model);

  std::map<std::size_t, std::vector<ContactEvent::Kind>> per;
  for (const auto &e : events)
    per[e.particle].push_back(e.kind);
  for (const auto &[i, kinds] : per)
    for (std::size_t k = 1; k < kinds.size(); ++k)
      CHECK(kinds[k] != kinds[k - 1]);
  CHECK(per[0] == std::vector{ContactEvent::Kind::attach, ContactEvent::Kind::detach});
  CHECK(per[1].size() == 4);

  for (const auto &e : events) {
    if (e.particle == 0 && e.kind == ContactEvent::Kind::detach) {
      CHECK(e.frame == 2);
      // -grad W / n plus the pair push from particle 1 at (0.9, 0)
      const Vec2 r{-0.9, 1.0};
      const Vec2 f = Vec2{0, 0.5} + 0.5 * r / std::pow(norm(r), 3);
      CHECK(e.normal_force == Approx(f.y));
      CHECK(e.force_norm == Approx(norm(f)));
    }
  }
  CHECK(check_detachment_tangency(events).failed());
}

TEST_CASE("detachment tangency") {
  using K = ContactEvent::Kind;
  CHECK(check_detachment_tangency({{0, 3, K::detach, 0.05, 1.0}, {1, 4, K::attach, 0.9, 1.0}}).passed());
  const auto r = check_detachment_tangency({{0, 3, K::detach, 0.05, 1.0}, {2, 7, K::detach, -0.5, 1.0}});
  CHECK(r.failed());
  CHECK(r.particle == 2u);
  CHECK(r.measured == Approx(0.5));
}

TEST_CASE("boundary sign") {
  EnergyModel outward;
  outward.external = ExternalPotential::linear({-1.0, 0});
  CHECK(check_boundary_sign(from_positions(outward, {{{1, 0}}, {{1, 0}}}), unit_disk, outward).passed());

  EnergyModel inward;
  inward.external = ExternalPotential::linear({1.0, 0});
  const auto r = check_boundary_sign(from_positions(inward, {{{1, 0}}, {{1, 0}}}), unit_disk, inward);
  CHECK(r.failed());
  CHECK(r.measured == Approx(-1.0));
}

TEST_CASE("penalty bounds on the benchmark") {
  const PenaltyBenchmark b = penalty_benchmark("single_particle");
  for (double k : {10.0, 100.0}) {
    IntegratorConfig cfg;
    cfg.scheme = Scheme::penalty_euler;
    cfg.penalty_k = k;
    cfg.dt = 0.1 / k;
    const Trajectory t = simulate(b.domain, b.model, b.initial, cfg, b.T);
    const auto pen = check_penetration_bound(t, b.domain);
    const auto vel = velocity_bound_check(t);
    CHECK(pen.passed());
    CHECK(pen.measured == Approx(b.force / k).epsilon(1e-6));
    CHECK(vel.passed());
    CHECK(vel.measured <= 2 * b.force);
  }

  const Trajectory projected = simulate(b.domain, b.model, b.initial, IntegratorConfig{}, 1.0);
  CHECK(velocity_bound_check(projected).status == CheckStatus::skipped);
  CHECK(check_penetration_bound(projected, b.domain).status == CheckStatus::skipped);

  IntegratorConfig zero;
  zero.scheme = Scheme::penalty_euler;
  zero.penalty_k = 10;
  zero.dt = 0.01;
  const Trajectory still = simulate(unit_disk, EnergyModel{}, {{0.2, 0.2}}, zero, 1.0);
  CHECK(velocity_bound_check(still).measured == 0.0);
}

TEST_CASE("penalty convergence study") {
  const PenaltyBenchmark b = penalty_benchmark("single_particle");
  const auto rows = penalty_convergence_study(b.domain, b.model, b.initial, {10, 20, 40, 80}, 0.01, b.T);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].sup_distance > 0.0);
    CHECK(std::isfinite(rows[i].sup_distance));
    CHECK(rows[i].penalty_dt * rows[i].k <= 0.1 + 1e-12);
    if (i > 0) {
      CHECK(rows[i].sup_distance < rows[i - 1].sup_distance);
      CHECK(std::log2(rows[i - 1].sup_distance / rows[i].sup_distance) == Approx(1.0).epsilon(0.1));
    }
  }
  CHECK(fitted_order(rows) == Approx(1.0).epsilon(0.05));

  const PenaltyBenchmark inner = penalty_benchmark("interior");
  const auto flat = penalty_convergence_study(inner.domain, inner.model, inner.initial, {10, 100, 1000}, 0.01, inner.T);
  for (const auto &row : flat)
    CHECK(row.sup_distance <= 1e-12);

  CHECK(fitted_order({{10, 0, 1.0}, {100, 0, 0.01}}) == Approx(2.0));
  CHECK_THROWS_AS(penalty_benchmark("nope"), ConfigError);
}

TEST_CASE("stability") {
  const EnergyModel model;
  const Positions x0 = sample_initial_uniform(Region::disk({0, 0}, 1), 10, 0.05, 3);
  IntegratorConfig cfg;
  cfg.dt = 0.05;

  const auto same = stability_check(unit_disk, model, x0, 0.0, cfg, 2.0);
  CHECK(same.max_distance == 0.0);
  CHECK(same.report.passed());

  const auto free = stability_check(unit_disk, EnergyModel{}, {{0.2, 0.1}}, 1e-6, cfg, 2.0);
  for (double d : free.distances)
    CHECK(d == Approx(1e-6).epsilon(1e-8));

  const auto s = stability_check(unit_disk, model, x0, 1e-6, cfg, 5.0);
  CHECK(s.report.passed());
  CHECK(s.max_distance <= 100e-6);
}

TEST_CASE("checks are pure") {
  const EnergyModel model;
  const Trajectory t = simulate(unit_disk, model, sample_initial_uniform(Region::disk({0, 0}, 1), 15, 0.05, 8),
                                IntegratorConfig{}, 10.0);
  CHECK(check_energy_decay(t) == check_energy_decay(t));
  CHECK(check_separation(t, model) == check_separation(t, model));
  CHECK(check_boundary_sign(t, unit_disk, model) == check_boundary_sign(t, unit_disk, model));
  CHECK(detect_contact_events(t, unit_disk, model) == detect_contact_events(t, unit_disk, model));
  CHECK(mild_residual_report(t, unit_disk, model).status == CheckStatus::info);
}
