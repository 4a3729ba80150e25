#pragma once
#include <cmath>

namespace bft {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

  double norm2() const { return x * x + y * y; }
  double norm() const { return std::sqrt(norm2()); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

using Position = Vec2;

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }
inline double angle_of(const Vec2& v) { return std::atan2(v.y, v.x); }
inline Vec2 unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }
inline Vec2 lerp(const Vec2& a, const Vec2& b, double t) { return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t}; }

// wrap an angle difference into (-pi, pi]
inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * M_PI);
  if (a > M_PI) a -= 2.0 * M_PI;
  if (a <= -M_PI) a += 2.0 * M_PI;
  return a;
}

}  // namespace bft
