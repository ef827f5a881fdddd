#include "cpd/geometry.hpp"

#include <algorithm>
#include <cmath>

namespace cpd {

struct DomainGeometry::Node {
  enum class Kind { disk, strip, half_plane, unite, intersect, subtract };

  Kind kind = Kind::disk;
  Vec2 center;
  double radius = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;
  Vec2 point;
  Vec2 normal;
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
  double blend = 0.0;

  bool primitive() const { return kind == Kind::disk || kind == Kind::strip || kind == Kind::half_plane; }
};

namespace {

using Node = DomainGeometry::Node;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Cubic polynomial smooth-min: min(a, b) - k h^3 / 6 with h = max(k - |a - b|, 0) / k.
// Gradient and Hessian follow by the chain rule; the second derivatives are
// continuous because h vanishes at the edge of the blend zone.
LevelSetSample smooth_min(const LevelSetSample &a, const LevelSetSample &b, double k) {
  const bool a_low = a.value <= b.value;
  const LevelSetSample &lo = a_low ? a : b;
  const LevelSetSample &hi = a_low ? b : a;
  const double h = std::max(k - (hi.value - lo.value), 0.0) / k;
  if (h == 0.0)
    return lo;
  const double w = 0.5 * h * h;
  LevelSetSample s;
  s.value = lo.value - k * h * h * h / 6.0;
  s.gradient = (1.0 - w) * lo.gradient + w * hi.gradient;
  const Vec2 diff = lo.gradient - hi.gradient;
  s.hessian = (1.0 - w) * lo.hessian + w * hi.hessian + (-h / k) * outer(diff);
  return s;
}

LevelSetSample negate(LevelSetSample s) {
  s.value = -s.value;
  s.gradient = -s.gradient;
  s.hessian = -1.0 * s.hessian;
  return s;
}

LevelSetSample smooth_max(const LevelSetSample &a, const LevelSetSample &b, double k) {
  return negate(smooth_min(negate(a), negate(b), k));
}

LevelSetSample eval(const Node &node, Vec2 x) {
  switch (node.kind) {
  case Node::Kind::disk: {
    const Vec2 r = x - node.center;
    const double len = norm(r);
    LevelSetSample s;
    s.value = len - node.radius;
    if (len > 0.0) {
      s.gradient = r / len;
      const Mat2 gg = outer(s.gradient);
      s.hessian = {(1.0 - gg.xx) / len, -gg.xy / len, (1.0 - gg.yy) / len};
    }
    return s;
  }
  case Node::Kind::strip: {
    const double below = node.y_min - x.y;
    const double above = x.y - node.y_max;
    LevelSetSample s;
    if (above >= below) {
      s.value = above;
      s.gradient = {0.0, 1.0};
    } else {
      s.value = below;
      s.gradient = {0.0, -1.0};
    }
    return s;
  }
  case Node::Kind::half_plane: {
    LevelSetSample s;
    s.value = dot(x - node.point, node.normal);
    s.gradient = node.normal;
    return s;
  }
  case Node::Kind::unite:
    return smooth_min(eval(*node.a, x), eval(*node.b, x), node.blend);
  case Node::Kind::intersect:
    return smooth_max(eval(*node.a, x), eval(*node.b, x), node.blend);
  case Node::Kind::subtract:
    return smooth_max(eval(*node.a, x), negate(eval(*node.b, x)), node.blend);
  }
  return {};
}

double value(const Node &node, Vec2 x) { return eval(node, x).value; }

bool blend_active_at(const Node &node, Vec2 x) {
  if (node.primitive())
    return false;
  const double va = value(*node.a, x);
  double vb = value(*node.b, x);
  if (node.kind == Node::Kind::subtract)
    vb = -vb;
  if (std::abs(va - vb) < node.blend)
    return true;
  return blend_active_at(*node.a, x) || blend_active_at(*node.b, x);
}

BoundaryQuery analytic_query(const Node &node, Vec2 x) {
  BoundaryQuery q;
  q.converged = true;
  switch (node.kind) {
  case Node::Kind::disk: {
    const Vec2 r = x - node.center;
    const double len = norm(r);
    q.normal = len > 0.0 ? r / len : Vec2{1.0, 0.0};
    q.signed_distance = len - node.radius;
    q.foot_point = node.center + node.radius * q.normal;
    break;
  }
  case Node::Kind::strip: {
    const double below = node.y_min - x.y;
    const double above = x.y - node.y_max;
    if (above >= below) {
      q.signed_distance = above;
      q.normal = {0.0, 1.0};
      q.foot_point = {x.x, node.y_max};
    } else {
      q.signed_distance = below;
      q.normal = {0.0, -1.0};
      q.foot_point = {x.x, node.y_min};
    }
    break;
  }
  case Node::Kind::half_plane:
    q.signed_distance = dot(x - node.point, node.normal);
    q.normal = node.normal;
    q.foot_point = x - q.signed_distance * node.normal;
    break;
  default:
    q.converged = false;
    break;
  }
  return q;
}

// Alternating step: drop onto the level set along the gradient, then slide
// tangentially toward x.
Vec2 relaxation_step(const Node &root, Vec2 x, Vec2 z) {
  LevelSetSample s = eval(root, z);
  const double g2 = norm2(s.gradient);
  if (g2 == 0.0)
    return z;
  z -= (s.value / g2) * s.gradient;
  s = eval(root, z);
  const double gn = norm(s.gradient);
  if (gn == 0.0)
    return z;
  const Vec2 t = perp(s.gradient / gn);
  return z + dot(x - z, t) * t;
}

// Solves phi(z) = 0, (x - z) x grad phi(z) = 0 by Newton's method.
BoundaryQuery newton_query(const Node &root, Vec2 x) {
  const LevelSetSample sx = eval(root, x);
  BoundaryQuery q;
  const double gx2 = norm2(sx.gradient);
  if (gx2 == 0.0)
    return q;
  const double gx = std::sqrt(gx2);
  // First-order estimate, returned as-is if the iteration fails.
  q.signed_distance = sx.value / gx;
  q.normal = sx.gradient / gx;
  q.foot_point = x - (sx.value / gx2) * sx.gradient;

  Vec2 z = q.foot_point;
  const double scale = 1.0 + norm(x);
  for (int it = 0; it < kProjectionMaxIterations; ++it) {
    const LevelSetSample s = eval(root, z);
    const Vec2 &g = s.gradient;
    const Mat2 &H = s.hessian;
    const Vec2 r = x - z;
    const double f1 = s.value;
    const double f2 = cross(r, g);
    const double j11 = g.x;
    const double j12 = g.y;
    const double j21 = -g.y + r.x * H.xy - r.y * H.xx;
    const double j22 = g.x + r.x * H.yy - r.y * H.xy;
    const double det = j11 * j22 - j12 * j21;
    Vec2 dz;
    bool newton_ok = std::abs(det) > 1e-14 * (norm2(g) + 1e-300);
    if (newton_ok) {
      dz = {-(j22 * f1 - j12 * f2) / det, -(-j21 * f1 + j11 * f2) / det};
      newton_ok = std::isfinite(dz.x) && std::isfinite(dz.y) && norm(dz) <= 0.5 * norm(r) + 0.1;
    }
    const Vec2 next = newton_ok ? z + dz : relaxation_step(root, x, z);
    const double moved = norm(next - z);
    z = next;
    if (moved <= 1e-15 * scale)
      break;
  }

  const LevelSetSample s = eval(root, z);
  const double gn = norm(s.gradient);
  if (gn == 0.0)
    return q;
  const Vec2 n = s.gradient / gn;
  const Vec2 r = x - z;
  const double dist = norm(r);
  const bool on_level_set = std::abs(s.value) / gn <= kProjectionTolerance;
  const bool aligned = std::abs(cross(r, n)) <= kProjectionTolerance;
  // Reject critical points on the wrong side (e.g. farthest points).
  const bool oriented = dist <= kProjectionTolerance || (dot(r, n) > 0.0) == (sx.value > 0.0);
  if (!(on_level_set && aligned && oriented))
    return q;
  q.foot_point = z;
  q.normal = n;
  q.signed_distance = sx.value > 0.0 ? dist : -dist;
  q.converged = true;
  return q;
}

double feature_of(const Node &node) {
  switch (node.kind) {
  case Node::Kind::disk:
    return node.radius;
  case Node::Kind::strip:
    return 0.5 * (node.y_max - node.y_min);
  case Node::Kind::half_plane:
    return kInf;
  default:
    return std::min(feature_of(*node.a), feature_of(*node.b));
  }
}

double min_blend_of(const Node &node) {
  if (node.primitive())
    return kInf;
  return std::min({node.blend, min_blend_of(*node.a), min_blend_of(*node.b)});
}

Box bounds_of(const Node &node) {
  Box box;
  switch (node.kind) {
  case Node::Kind::disk:
    box.lo = node.center - Vec2{node.radius, node.radius};
    box.hi = node.center + Vec2{node.radius, node.radius};
    break;
  case Node::Kind::strip:
    box.lo.y = node.y_min;
    box.hi.y = node.y_max;
    break;
  case Node::Kind::half_plane:
    break;
  case Node::Kind::unite: {
    const Box a = bounds_of(*node.a);
    const Box b = bounds_of(*node.b);
    box.lo = {std::min(a.lo.x, b.lo.x), std::min(a.lo.y, b.lo.y)};
    box.hi = {std::max(a.hi.x, b.hi.x), std::max(a.hi.y, b.hi.y)};
    break;
  }
  case Node::Kind::intersect: {
    const Box a = bounds_of(*node.a);
    const Box b = bounds_of(*node.b);
    box.lo = {std::max(a.lo.x, b.lo.x), std::max(a.lo.y, b.lo.y)};
    box.hi = {std::min(a.hi.x, b.hi.x), std::min(a.hi.y, b.hi.y)};
    break;
  }
  case Node::Kind::subtract:
    box = bounds_of(*node.a);
    break;
  }
  return box;
}

DomainGeometry::Node composite_node(Node::Kind kind, const std::shared_ptr<const Node> &a,
                                    const std::shared_ptr<const Node> &b, double blend) {
  if (!(blend > 0.0))
    throw GeometryError("blend radius must be positive");
  const double feature = std::min(feature_of(*a), feature_of(*b));
  if (blend > feature)
    throw GeometryError("blend radius " + std::to_string(blend) + " exceeds feature size " +
                        std::to_string(feature));
  Node node;
  node.kind = kind;
  node.a = a;
  node.b = b;
  node.blend = blend;
  return node;
}

} // namespace

DomainGeometry::DomainGeometry(std::shared_ptr<const Node> root) : root_(std::move(root)) {
  tube_width_ = 0.1 * std::min(feature_of(*root_), min_blend_of(*root_));
}

double DomainGeometry::level_set(Vec2 x) const { return value(*root_, x); }

LevelSetSample DomainGeometry::sample(Vec2 x) const { return eval(*root_, x); }

BoundaryQuery DomainGeometry::boundary_query(Vec2 x) const {
  if (root_->primitive())
    return analytic_query(*root_, x);
  return newton_query(*root_, x);
}

double DomainGeometry::signed_distance(Vec2 x) const {
  const BoundaryQuery q = boundary_query(x);
  if (!q.converged)
    throw GeometryError("closest-point projection did not converge at (" + std::to_string(x.x) + ", " +
                        std::to_string(x.y) + ")");
  return q.signed_distance;
}

Vec2 DomainGeometry::d_grad_d(Vec2 x) const {
  if (level_set(x) <= 0.0)
    return {};
  const BoundaryQuery q = boundary_query(x);
  if (!q.converged)
    throw GeometryError("closest-point projection did not converge outside the domain");
  if (q.signed_distance <= 0.0)
    return {};
  if (q.signed_distance > tube_width_)
    throw GeometryError("point at distance " + std::to_string(q.signed_distance) +
                        " lies outside the tube of width " + std::to_string(tube_width_));
  return q.signed_distance * q.normal;
}

bool DomainGeometry::blend_active(Vec2 x) const { return blend_active_at(*root_, x); }

bool DomainGeometry::analytic() const { return root_->primitive(); }

double DomainGeometry::feature_radius() const { return feature_of(*root_); }

double DomainGeometry::min_blend_radius() const { return min_blend_of(*root_); }

Box DomainGeometry::bounds() const { return bounds_of(*root_); }

DomainGeometry DomainGeometry::with_tube_width(double width) const {
  if (!(width > 0.0))
    throw GeometryError("tube width must be positive");
  DomainGeometry copy = *this;
  copy.tube_width_ = width;
  return copy;
}

DomainGeometry make_disk(Vec2 center, double radius) {
  if (!(radius > 0.0))
    throw GeometryError("disk radius must be positive");
  Node node;
  node.kind = Node::Kind::disk;
  node.center = center;
  node.radius = radius;
  return DomainGeometry(std::make_shared<const Node>(node));
}

DomainGeometry make_strip(double y_min, double y_max) {
  if (!(y_max > y_min))
    throw GeometryError("strip requires y_min < y_max");
  Node node;
  node.kind = Node::Kind::strip;
  node.y_min = y_min;
  node.y_max = y_max;
  return DomainGeometry(std::make_shared<const Node>(node));
}

DomainGeometry make_half_plane(Vec2 point, Vec2 outward_normal) {
  const double len = norm(outward_normal);
  if (!(len > 0.0))
    throw GeometryError("half-plane normal must be nonzero");
  Node node;
  node.kind = Node::Kind::half_plane;
  node.point = point;
  node.normal = outward_normal / len;
  return DomainGeometry(std::make_shared<const Node>(node));
}

DomainGeometry smooth_union(const DomainGeometry &a, const DomainGeometry &b, double blend_radius) {
  return DomainGeometry(std::make_shared<const Node>(composite_node(Node::Kind::unite, a.root_, b.root_, blend_radius)));
}

DomainGeometry smooth_intersection(const DomainGeometry &a, const DomainGeometry &b, double blend_radius) {
  return DomainGeometry(
      std::make_shared<const Node>(composite_node(Node::Kind::intersect, a.root_, b.root_, blend_radius)));
}

DomainGeometry complement(const DomainGeometry &a, const DomainGeometry &b, double blend_radius) {
  return DomainGeometry(
      std::make_shared<const Node>(composite_node(Node::Kind::subtract, a.root_, b.root_, blend_radius)));
}

} // namespace cpd
