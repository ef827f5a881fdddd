#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <variant>

#include "cpd/vec2.hpp"

namespace cpd {

class EnergyError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a force is requested at a configuration with two coincident
/// particles under a singular interaction.
class SingularConfiguration : public EnergyError {
public:
  SingularConfiguration(std::size_t i, std::size_t j);
  std::size_t first;
  std::size_t second;
};

/// Repulsive power law V(x) = |x|^-p.
class InteractionPotential {
public:
  explicit InteractionPotential(double exponent = 1.0);

  double exponent() const { return exponent_; }

  double value(Vec2 x) const;
  Vec2 gradient(Vec2 x) const;

  double radial(double r) const;
  double radial_derivative(double r) const;
  double radial_second_derivative(double r) const;

private:
  double exponent_;
};

/// Base potential above the cutoff h, even quartic a + b r^2 + c r^4 below it,
/// with value and first two radial derivatives matched at r = h.
class RegularizedPotential {
public:
  struct Coefficients {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
  };

  const InteractionPotential &base() const { return base_; }
  double cutoff() const { return cutoff_; }
  const Coefficients &inner() const { return inner_; }

  double value(Vec2 x) const;
  Vec2 gradient(Vec2 x) const;
  double radial(double r) const;

private:
  friend RegularizedPotential regularize(const InteractionPotential &, double);
  RegularizedPotential(InteractionPotential base, double cutoff, Coefficients inner);

  InteractionPotential base_;
  double cutoff_;
  Coefficients inner_;
};

/// Throws EnergyError if h <= 0 or the quartic dips below V(h) inside the cutoff.
RegularizedPotential regularize(const InteractionPotential &potential, double cutoff);

/// W(x) = coefficients . x, or W = 0.
class ExternalPotential {
public:
  static ExternalPotential none() { return ExternalPotential{}; }
  static ExternalPotential linear(Vec2 coefficients);

  bool is_zero() const { return coefficients_ == Vec2{}; }
  Vec2 coefficients() const { return coefficients_; }

  double value(Vec2 x) const { return dot(coefficients_, x); }
  Vec2 gradient(Vec2) const { return coefficients_; }

private:
  Vec2 coefficients_;
};

using PairPotential = std::variant<InteractionPotential, RegularizedPotential>;

struct EnergyModel {
  PairPotential interaction = InteractionPotential{};
  ExternalPotential external;

  bool singular() const { return std::holds_alternative<InteractionPotential>(interaction); }
  double pair_value(Vec2 x) const;
  double radial(double r) const;
};

/// Energy of a configuration. A coincident pair under a singular potential is
/// reported through `coincident` with value = +inf, which keeps it apart from
/// a floating-point overflow.
struct EnergyValue {
  double value = 0.0;
  std::optional<std::pair<std::size_t, std::size_t>> coincident;

  bool singular() const { return coincident.has_value(); }
  bool finite() const { return !coincident && std::isfinite(value); }
};

/// E(X) = 1/(n(n-1)) sum_{i>j} V(x_i - x_j) + 1/n sum_i W(x_i).
EnergyValue energy(const EnergyModel &model, std::span<const Vec2> positions);

/// F_i = -grad_i E. Throws SingularConfiguration on a coincident pair.
Vec2 force(const EnergyModel &model, std::size_t i, std::span<const Vec2> positions);

/// All forces; each F_i is summed over j in index order, so results do not
/// depend on how the outer loop is scheduled.
Positions forces(const EnergyModel &model, std::span<const Vec2> positions);

/// Largest h with V(y) > n(n-1) E0 for |y| <= h (the crossing radius). Closed
/// form for the power law: h = (n(n-1) E0)^(-1/p). Infinite for n < 2.
double separation_threshold(const InteractionPotential &potential, std::size_t n, double e0);

/// Same, by bisection on a radial profile. Throws EnergyError when the profile
/// is not non-increasing on the bracket. Returns 0 when no radius qualifies.
double separation_threshold(const std::function<double(double)> &profile, std::size_t n, double e0);

double separation_threshold(const EnergyModel &model, std::size_t n, double e0);

double min_separation(std::span<const Vec2> positions);
double max_pair_potential(const EnergyModel &model, std::span<const Vec2> positions);

} // namespace cpd
