#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cpd/dynamics.hpp"
#include "cpd/energy.hpp"
#include "cpd/geometry.hpp"

namespace cpd {

enum class CheckStatus { pass, fail, skipped, info };

const char *to_string(CheckStatus status);

/// Outcome of one numerical check. `measured` is the extremum found over the
/// trajectory and `threshold` the bound it is held to; the comparison
/// direction depends on the check.
struct DiagnosticReport {
  std::string name;
  CheckStatus status = CheckStatus::pass;
  double measured = 0.0;
  double threshold = 0.0;
  std::optional<std::size_t> frame;
  std::optional<std::size_t> particle;
  std::size_t violations = 0;
  std::string note;

  bool passed() const { return status == CheckStatus::pass; }
  bool failed() const { return status == CheckStatus::fail; }

  friend bool operator==(const DiagnosticReport &, const DiagnosticReport &) = default;
};

struct ContactEvent {
  enum class Kind : std::uint8_t { attach, detach };

  std::size_t particle = 0;
  std::size_t frame = 0; // frame on the boundary side of the transition
  Kind kind = Kind::attach;
  double normal_force = 0.0; // F_i . nu at `frame`
  double force_norm = 0.0;   // |F_i| at `frame`

  friend bool operator==(const ContactEvent &, const ContactEvent &) = default;
};

inline constexpr double kEnergyDecayTolerance = 1e-8;
inline constexpr double kDetachTangencyTolerance = 0.1;
inline constexpr double kBoundarySignTolerance = 1e-6;

/// Passes iff E_{m+1} <= E_m + tolerance * max(1, |E_m|) for every pair of
/// consecutive frames. `violations` counts the offending pairs.
DiagnosticReport check_energy_decay(const Trajectory &trajectory, double tolerance = kEnergyDecayTolerance);

/// Every frame must satisfy min_{i!=j} |x_i - x_j| >= separation_threshold(V, n, E).
/// measured = min of that ratio. Skipped when W is negative at some recorded
/// particle position.
DiagnosticReport check_separation(const Trajectory &trajectory, const EnergyModel &model);

/// max_{m,i} d_s(x_i) over the frames, held to `tolerance`.
DiagnosticReport check_confinement(const Trajectory &trajectory, const DomainGeometry &domain,
                                   double tolerance = kConfinementTolerance);

std::vector<ContactEvent> detect_contact_events(const Trajectory &trajectory, const DomainGeometry &domain,
                                                const EnergyModel &model);

/// |F . nu| <= relative_tolerance * |F| at every detach event.
DiagnosticReport check_detachment_tangency(const std::vector<ContactEvent> &events,
                                           double relative_tolerance = kDetachTangencyTolerance);

/// F_i . nu >= -tolerance whenever particle i is flagged at frames m and m+1.
DiagnosticReport check_boundary_sign(const Trajectory &trajectory, const DomainGeometry &domain,
                                     const EnergyModel &model, double tolerance = kBoundarySignTolerance);

/// Penalty mode: frame-difference speeds <= 2 max|F| (1 + relative_tolerance).
DiagnosticReport velocity_bound_check(const Trajectory &trajectory, double relative_tolerance = 0.05);

/// Penalty mode: max_i d(x_i) <= max|F| / k (1 + relative_tolerance).
DiagnosticReport check_penetration_bound(const Trajectory &trajectory, const DomainGeometry &domain,
                                         double relative_tolerance = 0.1);

/// Reported with status info; the residual is O(dt) near contact transitions.
DiagnosticReport mild_residual_report(const Trajectory &trajectory, const DomainGeometry &domain,
                                      const EnergyModel &model);

struct ConvergenceRow {
  double k = 0.0;
  double penalty_dt = 0.0;
  double sup_distance = 0.0;
};

/// Sup over frames and particles of |x^k - x^proj| for each k. The projected
/// RK4 reference runs at `dt`; each penalty run uses dt / s with the smallest
/// integer s giving (dt / s) k <= step_factor, and is compared on the
/// reference frame times.
std::vector<ConvergenceRow> penalty_convergence_study(const DomainGeometry &domain, const EnergyModel &model,
                                                      const Positions &initial, const std::vector<double> &ks,
                                                      double dt, double T, double step_factor = 0.1);

/// Least-squares slope of -log(sup_distance) against log(k).
double fitted_order(const std::vector<ConvergenceRow> &rows);

struct StabilityResult {
  DiagnosticReport report;
  double fitted_rate = 0.0;  // exponent bounding the first 10% of frames
  double max_distance = 0.0; // max over frames of ||X(t) - Y(t)||
  std::vector<double> distances;
};

/// Twin runs from X0 and a perturbation of max-norm delta (seeded random
/// directions). Passes iff ||X(t) - Y(t)|| <= delta exp(C t) at every frame,
/// where C is the smallest rate bounding the first 10% of frames.
StabilityResult stability_check(const DomainGeometry &domain, const EnergyModel &model, const Positions &initial,
                                double delta, const IntegratorConfig &config, double T, std::uint64_t seed = 7);

double max_norm_distance(const Positions &a, const Positions &b);

} // namespace cpd
