#pragma once

#include <cmath>
#include <vector>

namespace cpd {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  constexpr Vec2 &operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
  }

  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;
};

constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
constexpr Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
constexpr Vec2 operator*(double s, Vec2 a) { return a *= s; }
constexpr Vec2 operator*(Vec2 a, double s) { return a *= s; }
constexpr Vec2 operator/(const Vec2 &a, double s) { return {a.x / s, a.y / s}; }

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
constexpr double norm2(const Vec2 &a) { return dot(a, a); }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }
constexpr Vec2 perp(const Vec2 &a) { return {-a.y, a.x}; }

// Symmetric 2x2 matrix (Hessians).
struct Mat2 {
  double xx = 0.0;
  double xy = 0.0;
  double yy = 0.0;

  constexpr Mat2 &operator+=(const Mat2 &o) {
    xx += o.xx;
    xy += o.xy;
    yy += o.yy;
    return *this;
  }
};

constexpr Mat2 operator*(double s, const Mat2 &m) { return {s * m.xx, s * m.xy, s * m.yy}; }
constexpr Mat2 operator+(Mat2 a, const Mat2 &b) { return a += b; }
constexpr Mat2 outer(const Vec2 &a) { return {a.x * a.x, a.x * a.y, a.y * a.y}; }
constexpr Vec2 operator*(const Mat2 &m, const Vec2 &v) {
  return {m.xx * v.x + m.xy * v.y, m.xy * v.x + m.yy * v.y};
}

using Positions = std::vector<Vec2>;

} // namespace cpd
