#pragma once

#include <cmath>

namespace unav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Vec2& o) const { return !(*this == o); }
};

using Point = Vec2;

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }

// z-component of the cross product; > 0 when b is counter-clockwise from a.
inline double det(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

inline double norm_sq(const Vec2& v) { return v.x * v.x + v.y * v.y; }
inline double norm(const Vec2& v) { return std::sqrt(norm_sq(v)); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline double dist_sq(const Vec2& a, const Vec2& b) { return norm_sq(a - b); }

inline Vec2 normalized(const Vec2& v) {
  double n = norm(v);
  return n > 0.0 ? v / n : Vec2{0.0, 0.0};
}

// Rotate 90 degrees counter-clockwise.
inline Vec2 perp_ccw(const Vec2& v) { return {-v.y, v.x}; }

inline Vec2 rotated(const Vec2& v, double angle) {
  double c = std::cos(angle), s = std::sin(angle);
  return {v.x * c - v.y * s, v.x * s + v.y * c};
}

struct Segment {
  Vec2 a;
  Vec2 b;
};

// Distance from point p to segment [a, b].
inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double len_sq = norm_sq(ab);
  if (len_sq == 0.0) return dist(p, a);
  double t = dot(p - a, ab) / len_sq;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return dist(p, a + ab * t);
}

inline bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    double v = det(q - p, r - p);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
  };
  int o1 = orient(a, b, c), o2 = orient(a, b, d);
  int o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  auto on_seg = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
           std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
  };
  if (o1 == 0 && on_seg(a, c, b)) return true;
  if (o2 == 0 && on_seg(a, d, b)) return true;
  if (o3 == 0 && on_seg(c, a, d)) return true;
  if (o4 == 0 && on_seg(c, b, d)) return true;
  return false;
}

inline double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  double m = dist_point_segment(a, c, d);
  m = std::min(m, dist_point_segment(b, c, d));
  m = std::min(m, dist_point_segment(c, a, b));
  m = std::min(m, dist_point_segment(d, a, b));
  return m;
}

}  // namespace unav
