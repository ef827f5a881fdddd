#include "cpd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace cpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double signed_distance_or_inside(const DomainGeometry &domain, Vec2 x) {
  const double phi = domain.level_set(x);
  if (phi <= 0.0)
    return phi;
  return domain.boundary_query(x).signed_distance;
}

DiagnosticReport skipped(std::string name, std::string note) {
  DiagnosticReport r;
  r.name = std::move(name);
  r.status = CheckStatus::skipped;
  r.note = std::move(note);
  return r;
}

} // namespace

const char *to_string(CheckStatus status) {
  switch (status) {
  case CheckStatus::pass:
    return "pass";
  case CheckStatus::fail:
    return "fail";
  case CheckStatus::skipped:
    return "skipped";
  case CheckStatus::info:
    return "info";
  }
  return "?";
}

DiagnosticReport check_energy_decay(const Trajectory &trajectory, double tolerance) {
  DiagnosticReport r;
  r.name = "energy_decay";
  r.threshold = tolerance;
  r.measured = -kInf;
  const auto &frames = trajectory.frames;
  for (std::size_t m = 0; m + 1 < frames.size(); ++m) {
    const double e0 = frames[m].energy;
    const double e1 = frames[m + 1].energy;
    double rise = (e1 - e0) / std::max(1.0, std::abs(e0));
    if (!std::isfinite(e0) || !std::isfinite(e1))
      rise = kInf;
    if (rise > tolerance)
      ++r.violations;
    if (rise > r.measured) {
      r.measured = rise;
      r.frame = m + 1;
    }
  }
  if (frames.size() < 2)
    r.measured = 0.0;
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport check_separation(const Trajectory &trajectory, const EnergyModel &model) {
  const std::string name = "separation";
  if (!model.external.is_zero())
    for (const Frame &f : trajectory.frames)
      for (const Vec2 &x : f.positions)
        if (model.external.value(x) < 0.0)
          return skipped(name, "external potential is negative on the trajectory");

  DiagnosticReport r;
  r.name = name;
  // Allows for rounding in the closed form when the pairwise bound is tight (n = 2).
  r.threshold = 1.0 - 1e-12;
  r.measured = kInf;
  for (std::size_t m = 0; m < trajectory.frames.size(); ++m) {
    const Frame &f = trajectory.frames[m];
    const std::size_t n = f.positions.size();
    if (n < 2)
      continue;
    double ratio = 0.0;
    if (std::isfinite(f.energy) && f.energy > 0.0) {
      const double h = separation_threshold(model, n, f.energy);
      ratio = h > 0.0 ? min_separation(f.positions) / h : kInf;
    }
    if (ratio < r.threshold)
      ++r.violations;
    if (ratio < r.measured) {
      r.measured = ratio;
      r.frame = m;
    }
  }
  if (!std::isfinite(r.measured))
    r.measured = kInf;
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport check_confinement(const Trajectory &trajectory, const DomainGeometry &domain, double tolerance) {
  if (trajectory.config.scheme != Scheme::projected_rk4)
    return skipped("confinement", "penalty trajectories may penetrate by design");
  DiagnosticReport r;
  r.name = "confinement";
  r.threshold = tolerance;
  r.measured = -kInf;
  for (std::size_t m = 0; m < trajectory.frames.size(); ++m) {
    const Frame &f = trajectory.frames[m];
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
      const double d = signed_distance_or_inside(domain, f.positions[i]);
      if (d > tolerance)
        ++r.violations;
      if (d > r.measured) {
        r.measured = d;
        r.frame = m;
        r.particle = i;
      }
    }
  }
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

std::vector<ContactEvent> detect_contact_events(const Trajectory &trajectory, const DomainGeometry &domain,
                                                const EnergyModel &model) {
  std::vector<ContactEvent> events;
  const auto &frames = trajectory.frames;
  std::vector<std::optional<Positions>> force_cache(frames.size());
  auto forces_at = [&](std::size_t m) -> const Positions & {
    if (!force_cache[m])
      force_cache[m] = forces(model, frames[m].positions);
    return *force_cache[m];
  };

  const std::size_t n = trajectory.particle_count();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t m = 0; m + 1 < frames.size(); ++m) {
      const bool before = frames[m].on_boundary[i];
      const bool after = frames[m + 1].on_boundary[i];
      if (before == after)
        continue;
      ContactEvent ev;
      ev.particle = i;
      ev.kind = after ? ContactEvent::Kind::attach : ContactEvent::Kind::detach;
      ev.frame = after ? m + 1 : m;
      const Vec2 f = forces_at(ev.frame)[i];
      const BoundaryQuery q = domain.boundary_query(frames[ev.frame].positions[i]);
      ev.normal_force = dot(f, q.normal);
      ev.force_norm = norm(f);
      events.push_back(ev);
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const ContactEvent &a, const ContactEvent &b) {
    return a.frame != b.frame ? a.frame < b.frame : a.particle < b.particle;
  });
  return events;
}

DiagnosticReport check_detachment_tangency(const std::vector<ContactEvent> &events, double relative_tolerance) {
  DiagnosticReport r;
  r.name = "detachment_tangency";
  r.threshold = relative_tolerance;
  std::size_t detaches = 0;
  for (const ContactEvent &ev : events) {
    if (ev.kind != ContactEvent::Kind::detach)
      continue;
    ++detaches;
    const double ratio = ev.force_norm > 0.0 ? std::abs(ev.normal_force) / ev.force_norm : 0.0;
    if (ratio > relative_tolerance)
      ++r.violations;
    if (ratio > r.measured || !r.frame) {
      r.measured = ratio;
      r.frame = ev.frame;
      r.particle = ev.particle;
    }
  }
  r.note = std::to_string(detaches) + " detach events";
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport check_boundary_sign(const Trajectory &trajectory, const DomainGeometry &domain,
                                     const EnergyModel &model, double tolerance) {
  DiagnosticReport r;
  r.name = "boundary_sign";
  r.threshold = -tolerance;
  r.measured = kInf;
  const auto &frames = trajectory.frames;
  for (std::size_t m = 0; m + 1 < frames.size(); ++m) {
    const ContactFlags &now = frames[m].on_boundary;
    const ContactFlags &next = frames[m + 1].on_boundary;
    bool any = false;
    for (std::size_t i = 0; i < now.size() && !any; ++i)
      any = now[i] && next[i];
    if (!any)
      continue;
    const Positions f = forces(model, frames[m].positions);
    for (std::size_t i = 0; i < now.size(); ++i) {
      if (!(now[i] && next[i]))
        continue;
      const double fn = dot(f[i], domain.boundary_query(frames[m].positions[i]).normal);
      if (fn < -tolerance)
        ++r.violations;
      if (fn < r.measured) {
        r.measured = fn;
        r.frame = m;
        r.particle = i;
      }
    }
  }
  if (!r.frame)
    r.note = "no persistent boundary contact";
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport velocity_bound_check(const Trajectory &trajectory, double relative_tolerance) {
  if (trajectory.config.scheme != Scheme::penalty_euler)
    return skipped("velocity_bound", "penalty mode only");
  DiagnosticReport r;
  r.name = "velocity_bound";
  const auto &frames = trajectory.frames;
  double fmax = 0.0;
  for (const Frame &f : frames)
    fmax = std::max(fmax, f.max_force);
  r.threshold = 2.0 * fmax * (1.0 + relative_tolerance);
  for (std::size_t m = 0; m + 1 < frames.size(); ++m) {
    const double h = frames[m + 1].time - frames[m].time;
    for (std::size_t i = 0; i < frames[m].positions.size(); ++i) {
      const double speed = norm(frames[m + 1].positions[i] - frames[m].positions[i]) / h;
      if (speed > r.threshold)
        ++r.violations;
      if (speed > r.measured) {
        r.measured = speed;
        r.frame = m;
        r.particle = i;
      }
    }
  }
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport check_penetration_bound(const Trajectory &trajectory, const DomainGeometry &domain,
                                         double relative_tolerance) {
  if (trajectory.config.scheme != Scheme::penalty_euler)
    return skipped("penetration_bound", "penalty mode only");
  DiagnosticReport r;
  r.name = "penetration_bound";
  double fmax = 0.0;
  for (const Frame &f : trajectory.frames)
    fmax = std::max(fmax, f.max_force);
  r.threshold = fmax / trajectory.config.penalty_k * (1.0 + relative_tolerance);
  for (std::size_t m = 0; m < trajectory.frames.size(); ++m) {
    const Frame &f = trajectory.frames[m];
    for (std::size_t i = 0; i < f.positions.size(); ++i) {
      const double d = std::max(0.0, signed_distance_or_inside(domain, f.positions[i]));
      if (d > r.threshold)
        ++r.violations;
      if (d > r.measured) {
        r.measured = d;
        r.frame = m;
        r.particle = i;
      }
    }
  }
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

DiagnosticReport mild_residual_report(const Trajectory &trajectory, const DomainGeometry &domain,
                                      const EnergyModel &model) {
  if (trajectory.config.scheme != Scheme::projected_rk4)
    return skipped("mild_residual", "projected mode only");
  DiagnosticReport r;
  r.name = "mild_residual";
  r.status = CheckStatus::info;
  r.measured = mild_solution_residual(trajectory, domain, model);
  r.threshold = kInf;
  return r;
}

double max_norm_distance(const Positions &a, const Positions &b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    worst = std::max(worst, norm(a[i] - b[i]));
  return worst;
}

std::vector<ConvergenceRow> penalty_convergence_study(const DomainGeometry &domain, const EnergyModel &model,
                                                      const Positions &initial, const std::vector<double> &ks,
                                                      double dt, double T, double step_factor) {
  IntegratorConfig ref_config;
  ref_config.scheme = Scheme::projected_rk4;
  ref_config.dt = dt;
  const Trajectory reference = simulate(domain, model, initial, ref_config, T);
  if (!reference.completed)
    throw StepError(0, "reference run failed: " + reference.error);

  std::vector<ConvergenceRow> rows;
  for (double k : ks) {
    const auto substeps = static_cast<std::size_t>(std::ceil(dt * k / step_factor - 1e-12));
    IntegratorConfig config;
    config.scheme = Scheme::penalty_euler;
    config.penalty_k = k;
    config.record_every = std::max<std::size_t>(substeps, 1);
    config.dt = dt / static_cast<double>(config.record_every);
    const Trajectory run = simulate(domain, model, initial, config, T);
    if (!run.completed)
      throw StepError(0, "penalty run with k = " + std::to_string(k) + " failed: " + run.error);
    ConvergenceRow row;
    row.k = k;
    row.penalty_dt = config.dt;
    const std::size_t frames = std::min(run.frames.size(), reference.frames.size());
    for (std::size_t m = 0; m < frames; ++m)
      row.sup_distance =
          std::max(row.sup_distance, max_norm_distance(run.frames[m].positions, reference.frames[m].positions));
    rows.push_back(row);
  }
  return rows;
}

double fitted_order(const std::vector<ConvergenceRow> &rows) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double count = static_cast<double>(rows.size());
  for (const ConvergenceRow &row : rows) {
    const double x = std::log(row.k);
    const double y = -std::log(row.sup_distance);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

StabilityResult stability_check(const DomainGeometry &domain, const EnergyModel &model, const Positions &initial,
                                double delta, const IntegratorConfig &config, double T, std::uint64_t seed) {
  Positions perturbed = initial;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  for (Vec2 &p : perturbed) {
    const double a = angle(rng);
    const Vec2 u{std::cos(a), std::sin(a)};
    Vec2 candidate = p + delta * u;
    if (domain.level_set(candidate) > 0.0)
      candidate = p - delta * u;
    if (domain.level_set(candidate) > 0.0)
      candidate = domain.boundary_query(candidate).foot_point;
    p = candidate;
  }

  const Trajectory a = simulate(domain, model, initial, config, T);
  const Trajectory b = simulate(domain, model, perturbed, config, T);

  StabilityResult out;
  DiagnosticReport &r = out.report;
  r.name = "stability";
  if (!a.completed || !b.completed) {
    r.status = CheckStatus::fail;
    r.note = "twin run failed: " + (a.completed ? b.error : a.error);
    return out;
  }
  const std::size_t frames = std::min(a.frames.size(), b.frames.size());
  for (std::size_t m = 0; m < frames; ++m)
    out.distances.push_back(max_norm_distance(a.frames[m].positions, b.frames[m].positions));
  out.max_distance = *std::max_element(out.distances.begin(), out.distances.end());

  const std::size_t window = std::max<std::size_t>(1, frames / 10);
  if (delta > 0.0) {
    for (std::size_t m = 1; m <= window && m < frames; ++m) {
      const double t = a.frames[m].time;
      if (t > 0.0 && out.distances[m] > 0.0)
        out.fitted_rate = std::max(out.fitted_rate, std::log(out.distances[m] / delta) / t);
    }
  }

  r.threshold = 1.0;
  for (std::size_t m = 0; m < frames; ++m) {
    const double bound = delta * std::exp(out.fitted_rate * a.frames[m].time);
    double ratio = 0.0;
    if (bound > 0.0)
      ratio = out.distances[m] / bound;
    else if (out.distances[m] > 0.0)
      ratio = kInf;
    if (ratio > 1.0 + 1e-8)
      ++r.violations;
    if (ratio > r.measured) {
      r.measured = ratio;
      r.frame = m;
    }
  }
  r.note = "fitted rate " + std::to_string(out.fitted_rate);
  r.status = r.violations == 0 ? CheckStatus::pass : CheckStatus::fail;
  return out;
}

} // namespace cpd
