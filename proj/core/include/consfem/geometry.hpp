#pragma once

#include <cmath>

namespace consfem {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }

/// Symmetric 2x2 tensor, used for the mobility coefficient.
struct Tensor2 {
  double xx = 1.0;
  double xy = 0.0;
  double yy = 1.0;

  static Tensor2 identity() { return {}; }

  Vec2 apply(Vec2 v) const { return {xx * v.x + xy * v.y, xy * v.x + yy * v.y}; }

  bool is_spd() const { return xx > 0.0 && xx * yy - xy * xy > 0.0; }
};

/// Axis-aligned rectangle [x_lo, x_hi] x [y_lo, y_hi].
struct Rect {
  double x_lo = 0.0;
  double y_lo = 0.0;
  double x_hi = 0.0;
  double y_hi = 0.0;

  double width() const { return x_hi - x_lo; }
  double height() const { return y_hi - y_lo; }
  double area() const { return width() * height(); }
  Point2 center() const { return {0.5 * (x_lo + x_hi), 0.5 * (y_lo + y_hi)}; }

  /// Closed containment; exact comparisons.
  bool contains(Point2 p) const {
    return p.x >= x_lo && p.x <= x_hi && p.y >= y_lo && p.y <= y_hi;
  }

  friend bool operator==(const Rect&, const Rect&) = default;
};

}  // namespace consfem
