#include "cpd/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpd {

StepError::StepError(std::size_t particle, const std::string &what)
    : std::runtime_error("particle " + std::to_string(particle) + ": " + what), particle(particle) {}

const char *to_string(Scheme scheme) {
  switch (scheme) {
  case Scheme::projected_rk4:
    return "projected_rk4";
  case Scheme::penalty_euler:
    return "penalty_euler";
  }
  return "?";
}

Scheme scheme_from_string(const std::string &name) {
  if (name == "projected_rk4")
    return Scheme::projected_rk4;
  if (name == "penalty_euler")
    return Scheme::penalty_euler;
  throw ConfigError("unknown integrator scheme '" + name + "'");
}

void IntegratorConfig::validate() const {
  if (!(dt > 0.0))
    throw ConfigError("dt must be positive");
  if (record_every == 0)
    throw ConfigError("record_every must be at least 1");
  if (!(contact_tolerance > 0.0))
    throw ConfigError("contact_tolerance must be positive");
  if (scheme == Scheme::penalty_euler) {
    if (!(penalty_k > 0.0))
      throw ConfigError("penalty scheme needs penalty_k > 0");
    if (dt * penalty_k > stability_factor)
      throw ConfigError("dt * penalty_k = " + std::to_string(dt * penalty_k) + " exceeds the stability cap " +
                        std::to_string(stability_factor));
  }
}

Vec2 one_sided_projection(const DomainGeometry &domain, Vec2 x, Vec2 f, double contact_tol) {
  // |d_s| >= |phi| since phi is 1-Lipschitz, so large |phi| rules out contact.
  if (std::abs(domain.level_set(x)) > contact_tol)
    return f;
  const BoundaryQuery q = domain.boundary_query(x);
  if (std::abs(q.signed_distance) > contact_tol)
    return f;
  const double fn = dot(f, q.normal);
  if (fn > 0.0)
    return f - fn * q.normal;
  return f;
}

Positions projected_rhs(const DomainGeometry &domain, const EnergyModel &model, std::span<const Vec2> positions,
                        double contact_tol) {
  Positions h = forces(model, positions);
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = one_sided_projection(domain, positions[i], h[i], contact_tol);
  return h;
}

Positions penalty_rhs(const DomainGeometry &domain, const EnergyModel &model, double k,
                      std::span<const Vec2> positions) {
  Positions v = forces(model, positions);
  for (std::size_t i = 0; i < v.size(); ++i) {
    try {
      v[i] -= k * domain.d_grad_d(positions[i]);
    } catch (const GeometryError &e) {
      throw StepError(i, e.what());
    }
  }
  return v;
}

ContactFlags contact_flags(const DomainGeometry &domain, std::span<const Vec2> positions, double tol,
                           Scheme scheme) {
  ContactFlags flags(positions.size(), 0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double phi = domain.level_set(positions[i]);
    if (scheme == Scheme::penalty_euler && phi > 0.0) {
      flags[i] = 1;
      continue;
    }
    if (std::abs(phi) > tol)
      continue;
    const BoundaryQuery q = domain.boundary_query(positions[i]);
    const double d = q.signed_distance;
    flags[i] = scheme == Scheme::penalty_euler ? d >= -tol : std::abs(d) <= tol;
  }
  return flags;
}

namespace {

Positions forces_or_step_error(const EnergyModel &model, std::span<const Vec2> positions) {
  try {
    return forces(model, positions);
  } catch (const SingularConfiguration &e) {
    throw StepError(e.first, e.what());
  }
}

Positions axpy(std::span<const Vec2> x, double a, std::span<const Vec2> v) {
  Positions out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = x[i] + a * v[i];
  return out;
}

} // namespace

SystemState step_projected_rk4(const DomainGeometry &domain, const EnergyModel &model, const SystemState &state,
                               double dt, double contact_tol) {
  const Positions &x = state.positions;
  const Positions k1 = forces_or_step_error(model, x);
  const Positions k2 = forces_or_step_error(model, axpy(x, 0.5 * dt, k1));
  const Positions k3 = forces_or_step_error(model, axpy(x, 0.5 * dt, k2));
  const Positions k4 = forces_or_step_error(model, axpy(x, dt, k3));

  SystemState next;
  next.time = state.time + dt;
  next.positions.resize(x.size());
  const double w1 = dt / 6.0;
  const double w2 = dt / 3.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Vec2 p = x[i] + (w1 * k1[i] + w2 * k2[i] + w2 * k3[i] + w1 * k4[i]);
    if (domain.level_set(p) > 0.0) {
      const BoundaryQuery q = domain.boundary_query(p);
      if (!q.converged)
        throw StepError(i, "closest-point projection failed");
      p = q.foot_point;
    }
    next.positions[i] = p;
  }
  next.on_boundary = contact_flags(domain, next.positions, contact_tol, Scheme::projected_rk4);
  return next;
}

SystemState step_penalty_euler(const DomainGeometry &domain, const EnergyModel &model, const SystemState &state,
                               double dt, double k, double contact_tol) {
  Positions v;
  try {
    v = penalty_rhs(domain, model, k, state.positions);
  } catch (const SingularConfiguration &e) {
    throw StepError(e.first, e.what());
  }
  SystemState next;
  next.time = state.time + dt;
  next.positions = axpy(state.positions, dt, v);
  next.on_boundary = contact_flags(domain, next.positions, contact_tol, Scheme::penalty_euler);
  return next;
}

SystemState initial_state(const DomainGeometry &domain, Positions positions, const IntegratorConfig &config) {
  SystemState s;
  s.positions = std::move(positions);
  s.on_boundary = contact_flags(domain, s.positions, config.contact_tolerance, config.scheme);
  return s;
}

Frame make_frame(const EnergyModel &model, const SystemState &state, std::size_t step) {
  Frame f;
  f.step = step;
  f.time = state.time;
  f.positions = state.positions;
  f.on_boundary = state.on_boundary;
  const EnergyValue e = energy(model, state.positions);
  f.energy = e.value;
  f.min_separation = min_separation(state.positions);
  if (e.singular()) {
    f.max_force = std::numeric_limits<double>::infinity();
  } else {
    for (const Vec2 &fi : forces(model, state.positions))
      f.max_force = std::max(f.max_force, norm(fi));
  }
  return f;
}

Trajectory simulate(const DomainGeometry &domain, const EnergyModel &model, Positions initial,
                    const IntegratorConfig &config, double T) {
  config.validate();
  if (T < 0.0)
    throw ConfigError("final time must be non-negative");

  const std::size_t n = initial.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double phi = domain.level_set(initial[i]);
    const double limit = config.scheme == Scheme::projected_rk4 ? config.contact_tolerance : domain.tube_width();
    if (phi > limit)
      throw ConfigError("initial particle " + std::to_string(i) + " lies outside the domain");
  }
  if (model.singular() && energy(model, initial).singular())
    throw ConfigError("initial configuration has coincident particles");

  if (config.scheme == Scheme::penalty_euler) {
    double fmax = 0.0;
    for (const Vec2 &f : forces(model, initial))
      fmax = std::max(fmax, norm(f));
    if (!(config.penalty_k * domain.tube_width() > fmax))
      throw ConfigError("penalty_k must exceed max|F| / tube_width = " + std::to_string(fmax / domain.tube_width()));
  }

  Trajectory traj;
  traj.config = config;
  SystemState state = initial_state(domain, std::move(initial), config);
  traj.frames.push_back(make_frame(model, state, 0));

  const std::size_t steps = T > 0.0 ? static_cast<std::size_t>(std::ceil(T / config.dt - 1e-9)) : 0;
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t_next = s == steps ? T : static_cast<double>(s) * config.dt;
    const double h = t_next - state.time;
    try {
      state = config.scheme == Scheme::projected_rk4
                  ? step_projected_rk4(domain, model, state, h, config.contact_tolerance)
                  : step_penalty_euler(domain, model, state, h, config.penalty_k, config.contact_tolerance);
    } catch (const std::exception &e) {
      traj.completed = false;
      traj.error = "step " + std::to_string(s) + ": " + e.what();
      break;
    }
    state.time = t_next;
    if (s % config.record_every == 0 || s == steps)
      traj.frames.push_back(make_frame(model, state, s));
  }
  if (!traj.completed && traj.frames.back().time != state.time) {
    std::size_t last_step = static_cast<std::size_t>(std::llround(state.time / config.dt));
    traj.frames.push_back(make_frame(model, state, last_step));
  }
  return traj;
}

double mild_solution_residual(const Trajectory &trajectory, const DomainGeometry &domain, const EnergyModel &model) {
  const auto &frames = trajectory.frames;
  if (frames.size() < 2)
    return 0.0;
  const double tol = trajectory.config.contact_tolerance;
  const std::size_t n = trajectory.particle_count();
  Positions integral(n);
  Positions previous = projected_rhs(domain, model, frames.front().positions, tol);
  double worst = 0.0;
  for (std::size_t m = 1; m < frames.size(); ++m) {
    const Positions current = projected_rhs(domain, model, frames[m].positions, tol);
    const double h = frames[m].time - frames[m - 1].time;
    for (std::size_t i = 0; i < n; ++i) {
      integral[i] += (0.5 * h) * (previous[i] + current[i]);
      const Vec2 gap = frames[m].positions[i] - frames.front().positions[i] - integral[i];
      worst = std::max(worst, norm(gap));
    }
    previous = current;
  }
  return worst;
}

} // namespace cpd
