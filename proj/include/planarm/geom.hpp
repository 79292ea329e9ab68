#pragma once

#include <cmath>
#include <limits>
#include <vector>

namespace planarm {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::sqrt(x * x + y * y); }
  double norm2() const { return x * x + y * y; }
  Vec2 normalized() const {
    double n = norm();
    return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
  }
  Vec2 perp() const { return {-y, x}; }
  Vec2 rotated(double a) const {
    double c = std::cos(a), s = std::sin(a);
    return {c * x - s * y, s * x + c * y};
  }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a <= 0.0) a += 2.0 * M_PI;
  return a - M_PI;
}

// Rigid transform: rotation then translation.
struct Pose2 {
  Vec2 p;
  double theta = 0.0;

  Vec2 apply(const Vec2& local) const { return p + local.rotated(theta); }
  Vec2 apply_inv(const Vec2& world) const {
    return (world - p).rotated(-theta);
  }
};

// Counter-clockwise simple polygon in its canonical (unit-scale) frame.
struct Polygon {
  std::vector<Vec2> verts;

  double area() const {
    double a = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) {
      const Vec2& u = verts[i];
      const Vec2& v = verts[(i + 1) % verts.size()];
      a += u.cross(v);
    }
    return 0.5 * a;
  }

  Vec2 centroid() const {
    Vec2 c{0.0, 0.0};
    double a = 0.0;
    for (size_t i = 0; i < verts.size(); ++i) {
      const Vec2& u = verts[i];
      const Vec2& v = verts[(i + 1) % verts.size()];
      double w = u.cross(v);
      a += w;
      c += (u + v) * w;
    }
    if (std::abs(a) < 1e-18) return verts.empty() ? c : verts[0];
    return c * (1.0 / (3.0 * a));
  }

  bool contains(const Vec2& pt) const {
    // Crossing number test.
    bool inside = false;
    for (size_t i = 0, j = verts.size() - 1; i < verts.size(); j = i++) {
      const Vec2& a = verts[i];
      const Vec2& b = verts[j];
      if (((a.y > pt.y) != (b.y > pt.y)) &&
          (pt.x < (b.x - a.x) * (pt.y - a.y) / (b.y - a.y) + a.x)) {
        inside = !inside;
      }
    }
    return inside;
  }

  bool is_simple() const {
    const size_t n = verts.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        // Skip adjacent edges (they share a vertex).
        if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
        if (segments_intersect(verts[i], verts[(i + 1) % n], verts[j],
                               verts[(j + 1) % n])) {
          return false;
        }
      }
    }
    return true;
  }

  static bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                                 const Vec2& d) {
    auto orient = [](const Vec2& p, const Vec2& q, const Vec2& r) {
      double v = (q - p).cross(r - p);
      return (v > 1e-15) - (v < -1e-15);
    };
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    return o1 != o2 && o3 != o4;
  }
};

inline double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 ab = b - a;
  double t = ab.norm2() > 0.0 ? (p - a).dot(ab) / ab.norm2() : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return (p - (a + ab * t)).norm();
}

inline double dist_segment_segment(const Vec2& a, const Vec2& b, const Vec2& c,
                                   const Vec2& d) {
  if (Polygon::segments_intersect(a, b, c, d)) return 0.0;
  return std::min(std::min(dist_point_segment(a, c, d),
                           dist_point_segment(b, c, d)),
                  std::min(dist_point_segment(c, a, b),
                           dist_point_segment(d, a, b)));
}

// Signed distance from a point to a polygon boundary: negative inside.
inline double signed_dist_polygon(const Vec2& p, const std::vector<Vec2>& vs) {
  double d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < vs.size(); ++i) {
    d = std::min(d, dist_point_segment(p, vs[i], vs[(i + 1) % vs.size()]));
  }
  Polygon poly{vs};
  return poly.contains(p) ? -d : d;
}

// Distance from a segment to a polygon boundary/interior (0 when touching or
// when an endpoint is inside).
inline double dist_segment_polygon(const Vec2& a, const Vec2& b,
                                   const std::vector<Vec2>& vs) {
  Polygon poly{vs};
  if (poly.contains(a) || poly.contains(b)) return 0.0;
  double d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < vs.size(); ++i) {
    d = std::min(d, dist_segment_segment(a, b, vs[i], vs[(i + 1) % vs.size()]));
  }
  return d;
}

// Ray against segment; returns hit distance along the ray or +inf.
inline double ray_segment(const Vec2& origin, const Vec2& dir, const Vec2& a,
                          const Vec2& b) {
  // origin + t*dir == a + u*(b-a), t >= 0, u in [0,1]
  Vec2 ab = b - a;
  double denom = dir.cross(ab);
  if (std::abs(denom) < 1e-15) return std::numeric_limits<double>::infinity();
  Vec2 oa = a - origin;
  double t = oa.cross(ab) / denom;
  double u = oa.cross(dir) / denom;
  if (t >= 0.0 && u >= 0.0 && u <= 1.0) return t;
  return std::numeric_limits<double>::infinity();
}

// Separating-axis test for two convex polygons. Returns true and the minimal
// translation vector (applied to `a`) when they overlap.
bool convex_overlap_mtv(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                        Vec2* mtv);

// Convex hull (monotone chain), CCW output.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts);

}  // namespace planarm
