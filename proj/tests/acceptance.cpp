// Acceptance suite: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "cpd/diagnostics.hpp"
#include "cpd/record.hpp"
#include "cpd/scenario.hpp"

using namespace cpd;

namespace {

int failures = 0;

void report(int id, const char *title, bool ok, const std::string &detail) {
  std::printf("[%s] %2d. %-26s %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
  std::fflush(stdout);
  if (!ok)
    ++failures;
}

std::string fmt(const char *f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

ScenarioRecord run_desk(const std::string &name) {
  auto config = find_builtin(name, true);
  if (!config)
    throw ConfigError("missing builtin " + name);
  return run_scenario(*config);
}

void energy_decay() {
  const auto t0 = std::chrono::steady_clock::now();
  const ScenarioRecord r = run_desk("circle_case1");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const DiagnosticReport d = check_energy_decay(r.trajectory, 1e-8);
  report(1, "energy decay", r.trajectory.completed && d.passed() && secs <= 60.0,
         fmt("n=%zu dt=%g T=%g frames=%zu increases=%zu worst=%.3e runtime=%.2fs", r.config.n, r.config.integrator.dt,
             r.config.T, r.trajectory.frames.size(), d.violations, d.measured, secs));
}

void instability() {
  const ScenarioRecord coarse = run_desk("circle_case2_dt3");
  const ScenarioRecord fine = run_desk("circle_case2");
  const DiagnosticReport dc = check_energy_decay(coarse.trajectory, 1e-8);
  const DiagnosticReport df = check_energy_decay(fine.trajectory, 1e-8);
  const bool same_start = coarse.config.initial == fine.config.initial;
  report(2, "instability at dt = 3", same_start && dc.violations >= 1 && df.violations == 0,
         fmt("seed=%llu dt=3 increases=%zu (max %.3e), dt=0.5 increases=%zu", (unsigned long long)coarse.config.initial.seed,
             dc.violations, dc.measured, df.violations));
}

void penalty_bounds() {
  const PenaltyBenchmark b = penalty_benchmark("single_particle");
  bool ok = true;
  std::string detail;
  for (double k : {10.0, 100.0, 1000.0}) {
    IntegratorConfig cfg;
    cfg.scheme = Scheme::penalty_euler;
    cfg.penalty_k = k;
    cfg.dt = 0.1 / k;
    const Trajectory t = simulate(b.domain, b.model, b.initial, cfg, b.T);
    const DiagnosticReport pen = check_penetration_bound(t, b.domain, 0.1);
    const DiagnosticReport vel = velocity_bound_check(t, 0.05);
    ok = ok && t.completed && pen.passed() && vel.passed();
    detail += fmt("k=%g: d=%.4e<=%.4e v=%.4f<=%.4f; ", k, pen.measured, pen.threshold, vel.measured, vel.threshold);
  }
  report(3, "penalty bounds", ok, detail);
}

void penalty_convergence() {
  const PenaltyBenchmark b = penalty_benchmark("single_particle");
  const auto rows = penalty_convergence_study(b.domain, b.model, b.initial, {10, 100, 1000, 10000}, 0.01, b.T);
  bool decreasing = true;
  std::string detail;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    detail += fmt("k=%g:%.3e ", rows[i].k, rows[i].sup_distance);
    if (i > 0 && !(rows[i].sup_distance < rows[i - 1].sup_distance))
      decreasing = false;
  }
  const double order = fitted_order(rows);
  report(4, "penalty convergence", decreasing && std::abs(order - 1.0) <= 0.3, detail + fmt("order=%.4f", order));
}

void confinement(const std::vector<ScenarioRecord> &desk) {
  bool ok = true;
  double worst = -INFINITY;
  std::string failed;
  for (const auto &r : desk) {
    if (r.config.integrator.scheme != Scheme::projected_rk4)
      continue;
    const DiagnosticReport d = check_confinement(r.trajectory, build_domain(r.config.domain), 1e-9);
    worst = std::max(worst, d.measured);
    if (!d.passed() || !r.trajectory.completed) {
      ok = false;
      failed += " " + r.config.name;
    }
  }
  report(5, "confinement", ok, fmt("%zu desk scenarios, max d_s=%.3e%s", desk.size(), worst, failed.c_str()));
}

void gradient_consistency() {
  std::mt19937_64 rng(20261018);
  const EnergyModel model;
  constexpr double h = 1e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Positions x = sample_initial_uniform(Region::disk({0, 0}, 1.0), 10, 0.05, rng());
    const Positions f = forces(model, x);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        double &coord = c == 0 ? x[i].x : x[i].y;
        const double saved = coord;
        coord = saved + h;
        const double ep = energy(model, x).value;
        coord = saved - h;
        const double em = energy(model, x).value;
        coord = saved;
        const double fd = -(ep - em) / (2 * h);
        const double fa = c == 0 ? f[i].x : f[i].y;
        err = std::max(err, std::abs(fa - fd));
        scale = std::max(scale, std::abs(fa));
      }
    }
    worst = std::max(worst, err / scale);
  }
  report(6, "gradient consistency", worst <= 1e-6, fmt("100 configs n=10, max rel error=%.3e", worst));
}

void separation(const std::vector<ScenarioRecord> &circles) {
  bool ok = true;
  std::string detail;
  for (const auto &r : circles) {
    std::size_t bad = 0;
    double ratio = INFINITY;
    const std::size_t n = r.trajectory.particle_count();
    for (const Frame &f : r.trajectory.frames) {
      const double bound = 1.0 / (double(n) * double(n - 1) * f.energy);
      ratio = std::min(ratio, f.min_separation / bound);
      if (f.min_separation < bound)
        ++bad;
    }
    ok = ok && bad == 0 && r.trajectory.completed;
    detail += fmt("%s: violations=%zu min ratio=%.3f; ", r.config.name.c_str(), bad, ratio);
  }
  report(7, "separation bound", ok, detail);
}

void detachment(const ScenarioRecord &bump) {
  const DomainGeometry domain = build_domain(bump.config.domain);
  const EnergyModel model = build_model(bump.config.potential);
  const auto events = detect_contact_events(bump.trajectory, domain, model);
  std::size_t detaches = 0;
  for (const auto &e : events)
    detaches += e.kind == ContactEvent::Kind::detach;
  const DiagnosticReport tang = check_detachment_tangency(events, 0.1);
  const DiagnosticReport sign = check_boundary_sign(bump.trajectory, domain, model, 1e-6);
  report(8, "detachment tangency", detaches > 0 && tang.passed() && sign.passed(),
         fmt("%zu detach events, max |F.nu|/|F|=%.3e; min F.nu on boundary=%.3e", detaches, tang.measured,
             sign.measured));
}

void stability() {
  constexpr double delta = 1e-6;
  const DomainGeometry domain = make_disk({0, 0}, 1.0);
  const EnergyModel model;
  const Positions x0 = sample_initial_uniform(Region::disk({0, 0}, 1.0), 20, 0.025, 9);
  IntegratorConfig cfg;
  cfg.dt = 0.05;
  const StabilityResult s = stability_check(domain, model, x0, delta, cfg, 10.0);
  report(9, "stability", s.max_distance <= 100 * delta,
         fmt("n=20 dt=%g T=10: sup ||X-Y||=%.3e = %.2f delta; fitted envelope rate=%.3f (%s)", cfg.dt,
             s.max_distance, s.max_distance / delta, s.fitted_rate, to_string(s.report.status)));
}

void boundary_crowding(const ScenarioRecord &case1) {
  const double f = outer_fraction(case1.trajectory.frames.back(), {0, 0}, 0.8);
  report(10, "boundary crowding", f > 0.36, fmt("fraction beyond 0.8 at t=%g: %.3f > 0.36", case1.trajectory.frames.back().time, f));
}

} // namespace

int main() {
  try {
    energy_decay();
    instability();
    penalty_bounds();
    penalty_convergence();

    std::vector<ScenarioRecord> desk;
    for (const auto &c : builtin_scenarios())
      if (c.scale == "desk")
        desk.push_back(run_scenario(c));
    confinement(desk);
    gradient_consistency();

    std::vector<ScenarioRecord> circles;
    for (const auto &r : desk)
      if (r.config.name.rfind("circle_", 0) == 0)
        circles.push_back(r);
    separation(circles);

    for (const auto &r : desk)
      if (r.config.name == "channel_bump")
        detachment(r);
    stability();
    for (const auto &r : desk)
      if (r.config.name == "circle_case1")
        boundary_crowding(r);
  } catch (const std::exception &e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
