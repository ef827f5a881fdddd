#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cpd/energy.hpp"
#include "cpd/geometry.hpp"
#include "cpd/vec2.hpp"

namespace cpd {

class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class StepError : public std::runtime_error {
public:
  StepError(std::size_t particle, const std::string &what);
  std::size_t particle;
};

enum class Scheme { projected_rk4, penalty_euler };

const char *to_string(Scheme scheme);
Scheme scheme_from_string(const std::string &name);

inline constexpr double kContactTolerance = 1e-6;
inline constexpr double kConfinementTolerance = 1e-9;
inline constexpr double kPenaltyStabilityFactor = 0.5;

struct IntegratorConfig {
  Scheme scheme = Scheme::projected_rk4;
  double dt = 0.5;
  double penalty_k = 0.0;
  double contact_tolerance = kContactTolerance;
  std::size_t record_every = 1;
  double stability_factor = kPenaltyStabilityFactor;

  /// Checks dt > 0, record_every >= 1 and, in penalty mode, k > 0 with
  /// dt * k <= stability_factor.
  void validate() const;

  friend bool operator==(const IntegratorConfig &, const IntegratorConfig &) = default;
};

using ContactFlags = std::vector<std::uint8_t>;

struct SystemState {
  double time = 0.0;
  Positions positions;
  ContactFlags on_boundary;
};

struct Frame {
  std::size_t step = 0;
  double time = 0.0;
  Positions positions;
  ContactFlags on_boundary;
  double energy = 0.0; // +inf for a coincident pair
  double min_separation = 0.0;
  double max_force = 0.0;
};

struct Trajectory {
  IntegratorConfig config;
  std::vector<Frame> frames;
  bool completed = true;
  std::string error; // set when a step failed; frames end at the last valid state

  std::size_t particle_count() const { return frames.empty() ? 0 : frames.front().positions.size(); }
};

/// P(x, f): strips the outward normal part of f when x sits on the boundary
/// (|d_s(x)| <= contact_tol) and f points outward; otherwise returns f.
Vec2 one_sided_projection(const DomainGeometry &domain, Vec2 x, Vec2 f, double contact_tol = kContactTolerance);

Positions projected_rhs(const DomainGeometry &domain, const EnergyModel &model, std::span<const Vec2> positions,
                        double contact_tol = kContactTolerance);

/// F_i - k d_grad_d(x_i). Throws StepError for a particle outside the tube.
Positions penalty_rhs(const DomainGeometry &domain, const EnergyModel &model, double k,
                      std::span<const Vec2> positions);

/// Projected mode flags |d_s| <= tol. Penalty mode counts penetrating
/// particles as in contact as well (d_s >= -tol).
ContactFlags contact_flags(const DomainGeometry &domain, std::span<const Vec2> positions, double tol,
                           Scheme scheme = Scheme::projected_rk4);

/// Classical RK4 on the raw forces, then every particle left outside the
/// domain is moved to its closest boundary point.
SystemState step_projected_rk4(const DomainGeometry &domain, const EnergyModel &model, const SystemState &state,
                               double dt, double contact_tol = kContactTolerance);

/// Explicit Euler on penalty_rhs, no projection.
SystemState step_penalty_euler(const DomainGeometry &domain, const EnergyModel &model, const SystemState &state,
                               double dt, double k, double contact_tol = kContactTolerance);

SystemState initial_state(const DomainGeometry &domain, Positions positions, const IntegratorConfig &config);

Frame make_frame(const EnergyModel &model, const SystemState &state, std::size_t step);

/// Runs from X0 to time T. Frames are taken every record_every steps plus the
/// final one. A failing step stops the run: completed is cleared, the error
/// kept, and the last valid state is the final frame.
Trajectory simulate(const DomainGeometry &domain, const EnergyModel &model, Positions initial,
                    const IntegratorConfig &config, double T);

/// max_{i,m} |x_i(t_m) - x_i(0) - int_0^{t_m} H_i ds|, trapezoidal rule over
/// the recorded frames.
double mild_solution_residual(const Trajectory &trajectory, const DomainGeometry &domain, const EnergyModel &model);

} // namespace cpd
