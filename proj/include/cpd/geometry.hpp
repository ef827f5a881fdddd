#pragma once

#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "cpd/vec2.hpp"

namespace cpd {

class GeometryError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultBlendRadius = 0.05;
inline constexpr double kProjectionTolerance = 1e-10;
inline constexpr int kProjectionMaxIterations = 50;

struct LevelSetSample {
  double value = 0.0;
  Vec2 gradient;
  Mat2 hessian;
};

struct BoundaryQuery {
  double signed_distance = 0.0; // negative inside the closed domain
  Vec2 normal;                  // outward unit normal at foot_point
  Vec2 foot_point;
  bool converged = false;
};

struct Box {
  Vec2 lo{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  Vec2 hi{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
};

/// Implicitly represented planar domain {phi < 0}.
///
/// Primitives (disk, strip, half-plane) carry exact signed distances. Composite
/// shapes combine them with a cubic smooth-min, which keeps the level set C2
/// and 1-Lipschitz, so |phi(x)| never exceeds the true distance to the
/// boundary. Distances for composites come from a Newton closest-point solve.
///
/// Instances are immutable and share their expression tree; copies are cheap
/// and queries are safe from any thread.
class DomainGeometry {
public:
  struct Node;

  double level_set(Vec2 x) const;
  LevelSetSample sample(Vec2 x) const;

  /// Closest boundary point, outward normal and signed distance. For
  /// composites the foot point is found by Newton iteration seeded at the
  /// level-set projection of x; `converged` is false when it fails, in which
  /// case the fields hold the first-order estimate phi/|grad phi|.
  BoundaryQuery boundary_query(Vec2 x) const;

  /// Throws GeometryError when the closest-point iteration does not converge.
  double signed_distance(Vec2 x) const;

  /// Zero on the closed domain, d(x) * grad d(x) outside it. Throws
  /// GeometryError when x lies farther than tube_width() from the domain.
  Vec2 d_grad_d(Vec2 x) const;

  bool contains(Vec2 x) const { return level_set(x) < 0.0; }

  /// True when x lies where some smooth-min blend deviates from the exact
  /// set operation.
  bool blend_active(Vec2 x) const;

  bool analytic() const;
  double tube_width() const { return tube_width_; }
  double feature_radius() const;
  double min_blend_radius() const;
  Box bounds() const;

  DomainGeometry with_tube_width(double width) const;

private:
  friend DomainGeometry make_disk(Vec2, double);
  friend DomainGeometry make_strip(double, double);
  friend DomainGeometry make_half_plane(Vec2, Vec2);
  friend DomainGeometry smooth_union(const DomainGeometry &, const DomainGeometry &, double);
  friend DomainGeometry smooth_intersection(const DomainGeometry &, const DomainGeometry &, double);
  friend DomainGeometry complement(const DomainGeometry &, const DomainGeometry &, double);

  explicit DomainGeometry(std::shared_ptr<const Node> root);

  std::shared_ptr<const Node> root_;
  double tube_width_ = 0.0;
};

DomainGeometry make_disk(Vec2 center, double radius);
/// Horizontal channel {y_min < y < y_max}.
DomainGeometry make_strip(double y_min, double y_max);
/// {(x - point) . outward_normal < 0}.
DomainGeometry make_half_plane(Vec2 point, Vec2 outward_normal);

DomainGeometry smooth_union(const DomainGeometry &a, const DomainGeometry &b,
                            double blend_radius = kDefaultBlendRadius);
DomainGeometry smooth_intersection(const DomainGeometry &a, const DomainGeometry &b,
                                   double blend_radius = kDefaultBlendRadius);
/// a with b removed.
DomainGeometry complement(const DomainGeometry &a, const DomainGeometry &b,
                          double blend_radius = kDefaultBlendRadius);

} // namespace cpd
