#include "cpd/energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cpd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Potential>
EnergyValue energy_impl(const Potential &pot, const ExternalPotential &ext, std::span<const Vec2> x,
                        bool singular) {
  const std::size_t n = x.size();
  EnergyValue result;
  double pair_sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      const Vec2 d = x[i] - x[j];
      if (singular && d == Vec2{}) {
        result.value = kInf;
        result.coincident = std::make_pair(j, i);
        return result;
      }
      pair_sum += pot.value(d);
    }
  }
  double external_sum = 0.0;
  if (!ext.is_zero())
    for (const Vec2 &p : x)
      external_sum += ext.value(p);
  const double nd = static_cast<double>(n);
  result.value = (n > 1 ? pair_sum / (nd * (nd - 1.0)) : 0.0) + (n > 0 ? external_sum / nd : 0.0);
  return result;
}

template <class Potential>
Vec2 force_impl(const Potential &pot, const ExternalPotential &ext, std::size_t i, std::span<const Vec2> x,
                bool singular) {
  const std::size_t n = x.size();
  Vec2 sum;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i)
      continue;
    const Vec2 d = x[i] - x[j];
    if (singular && d == Vec2{})
      throw SingularConfiguration(std::min(i, j), std::max(i, j));
    sum += pot.gradient(d);
  }
  const double nd = static_cast<double>(n);
  Vec2 f;
  if (n > 1)
    f = (-1.0 / (nd * (nd - 1.0))) * sum;
  if (!ext.is_zero())
    f -= ext.gradient(x[i]) / nd;
  return f;
}

} // namespace

SingularConfiguration::SingularConfiguration(std::size_t i, std::size_t j)
    : EnergyError("coincident particles " + std::to_string(i) + " and " + std::to_string(j)), first(i),
      second(j) {}

InteractionPotential::InteractionPotential(double exponent) : exponent_(exponent) {
  if (!(exponent > 0.0))
    throw EnergyError("interaction exponent must be positive");
}

double InteractionPotential::value(Vec2 x) const { return radial(norm(x)); }

Vec2 InteractionPotential::gradient(Vec2 x) const {
  const double r2 = norm2(x);
  if (exponent_ == 1.0) {
    const double r = std::sqrt(r2);
    return (-1.0 / (r2 * r)) * x;
  }
  return (-exponent_ * std::pow(r2, -0.5 * exponent_ - 1.0)) * x;
}

double InteractionPotential::radial(double r) const {
  if (exponent_ == 1.0)
    return 1.0 / r;
  return std::pow(r, -exponent_);
}

double InteractionPotential::radial_derivative(double r) const {
  return -exponent_ * std::pow(r, -exponent_ - 1.0);
}

double InteractionPotential::radial_second_derivative(double r) const {
  return exponent_ * (exponent_ + 1.0) * std::pow(r, -exponent_ - 2.0);
}

RegularizedPotential::RegularizedPotential(InteractionPotential base, double cutoff, Coefficients inner)
    : base_(base), cutoff_(cutoff), inner_(inner) {}

double RegularizedPotential::value(Vec2 x) const {
  const double r2 = norm2(x);
  if (r2 >= cutoff_ * cutoff_)
    return base_.value(x);
  return inner_.a + r2 * (inner_.b + r2 * inner_.c);
}

Vec2 RegularizedPotential::gradient(Vec2 x) const {
  const double r2 = norm2(x);
  if (r2 >= cutoff_ * cutoff_)
    return base_.gradient(x);
  return (2.0 * inner_.b + 4.0 * inner_.c * r2) * x;
}

double RegularizedPotential::radial(double r) const {
  if (r >= cutoff_)
    return base_.radial(r);
  const double r2 = r * r;
  return inner_.a + r2 * (inner_.b + r2 * inner_.c);
}

RegularizedPotential regularize(const InteractionPotential &potential, double cutoff) {
  if (!(cutoff > 0.0))
    throw EnergyError("regularization cutoff must be positive");
  const double h = cutoff;
  const double v0 = potential.radial(h);
  const double v1 = potential.radial_derivative(h);
  const double v2 = potential.radial_second_derivative(h);
  // [1 h^2 h^4; 0 2h 4h^3; 0 2 12h^2] (a b c)^T = (V, V', V'')^T
  RegularizedPotential::Coefficients k;
  k.c = (h * v2 - v1) / (8.0 * h * h * h);
  k.b = (v1 - 4.0 * h * h * h * k.c) / (2.0 * h);
  k.a = v0 - k.b * h * h - k.c * h * h * h * h;

  RegularizedPotential reg(potential, cutoff, k);
  constexpr int samples = 4096;
  const double floor = v0 * (1.0 - 1e-12);
  for (int s = 0; s < samples; ++s) {
    const double r = h * s / samples;
    if (reg.radial(r) < floor)
      throw EnergyError("regularized potential falls below V(h) at r = " + std::to_string(r));
  }
  return reg;
}

ExternalPotential ExternalPotential::linear(Vec2 coefficients) {
  ExternalPotential w;
  w.coefficients_ = coefficients;
  return w;
}

double EnergyModel::pair_value(Vec2 x) const {
  return std::visit([&](const auto &pot) { return pot.value(x); }, interaction);
}

double EnergyModel::radial(double r) const {
  return std::visit([&](const auto &pot) { return pot.radial(r); }, interaction);
}

EnergyValue energy(const EnergyModel &model, std::span<const Vec2> positions) {
  const bool singular = model.singular();
  return std::visit([&](const auto &pot) { return energy_impl(pot, model.external, positions, singular); },
                    model.interaction);
}

Vec2 force(const EnergyModel &model, std::size_t i, std::span<const Vec2> positions) {
  const bool singular = model.singular();
  return std::visit([&](const auto &pot) { return force_impl(pot, model.external, i, positions, singular); },
                    model.interaction);
}

Positions forces(const EnergyModel &model, std::span<const Vec2> positions) {
  const bool singular = model.singular();
  Positions out(positions.size());
  std::visit(
      [&](const auto &pot) {
        for (std::size_t i = 0; i < positions.size(); ++i)
          out[i] = force_impl(pot, model.external, i, positions, singular);
      },
      model.interaction);
  return out;
}

double separation_threshold(const InteractionPotential &potential, std::size_t n, double e0) {
  if (!(e0 > 0.0))
    throw EnergyError("separation threshold needs a positive energy");
  if (n < 2)
    return kInf;
  const double nd = static_cast<double>(n);
  const double target = nd * (nd - 1.0) * e0;
  if (potential.exponent() == 1.0)
    return 1.0 / target;
  return std::pow(target, -1.0 / potential.exponent());
}

double separation_threshold(const std::function<double(double)> &profile, std::size_t n, double e0) {
  if (!(e0 > 0.0))
    throw EnergyError("separation threshold needs a positive energy");
  if (n < 2)
    return kInf;
  const double nd = static_cast<double>(n);
  const double target = nd * (nd - 1.0) * e0;

  double hi = 1.0;
  for (int k = 0; k < 200 && profile(hi) > target; ++k)
    hi *= 2.0;
  if (profile(hi) > target)
    throw EnergyError("radial profile stays above the target; cannot bracket");
  double lo = hi;
  for (int k = 0; k < 1100 && lo > 0.0 && profile(lo) <= target; ++k)
    lo *= 0.5;
  if (!(lo > 0.0) || profile(lo) <= target)
    return 0.0;

  constexpr int checks = 256;
  double previous = profile(lo);
  for (int s = 1; s <= checks; ++s) {
    const double r = lo + (hi - lo) * s / checks;
    const double v = profile(r);
    if (v > previous * (1.0 + 1e-12))
      throw EnergyError("radial profile is not monotone near 0");
    previous = v;
  }

  while (hi - lo > 1e-15 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi)
      break;
    (profile(mid) > target ? lo : hi) = mid;
  }
  return lo;
}

double separation_threshold(const EnergyModel &model, std::size_t n, double e0) {
  if (const auto *pot = std::get_if<InteractionPotential>(&model.interaction))
    return separation_threshold(*pot, n, e0);
  const auto &reg = std::get<RegularizedPotential>(model.interaction);
  return separation_threshold([&reg](double r) { return reg.radial(r); }, n, e0);
}

double min_separation(std::span<const Vec2> positions) {
  double best2 = kInf;
  for (std::size_t i = 1; i < positions.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      best2 = std::min(best2, norm2(positions[i] - positions[j]));
  return std::sqrt(best2);
}

double max_pair_potential(const EnergyModel &model, std::span<const Vec2> positions) {
  double best = 0.0;
  for (std::size_t i = 1; i < positions.size(); ++i)
    for (std::size_t j = 0; j < i; ++j)
      best = std::max(best, model.pair_value(positions[i] - positions[j]));
  return best;
}

} // namespace cpd
