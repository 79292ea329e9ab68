#include "planarm/geom.hpp"

#include <algorithm>

namespace planarm {

namespace {

struct Projection {
  double lo, hi;
};

Projection project(const std::vector<Vec2>& poly, const Vec2& axis) {
  Projection pr{std::numeric_limits<double>::infinity(),
                -std::numeric_limits<double>::infinity()};
  for (const Vec2& v : poly) {
    double d = v.dot(axis);
    pr.lo = std::min(pr.lo, d);
    pr.hi = std::max(pr.hi, d);
  }
  return pr;
}

}  // namespace

bool convex_overlap_mtv(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                        Vec2* mtv) {
  double best_overlap = std::numeric_limits<double>::infinity();
  Vec2 best_axis{0.0, 0.0};
  auto test_edges = [&](const std::vector<Vec2>& poly) {
    for (size_t i = 0; i < poly.size(); ++i) {
      Vec2 edge = poly[(i + 1) % poly.size()] - poly[i];
      Vec2 axis = edge.perp().normalized();
      if (axis.norm2() == 0.0) continue;
      Projection pa = project(a, axis);
      Projection pb = project(b, axis);
      double overlap = std::min(pa.hi, pb.hi) - std::max(pa.lo, pb.lo);
      if (overlap <= 0.0) return false;  // separating axis found
      if (overlap < best_overlap) {
        best_overlap = overlap;
        // Push `a` away from `b` along this axis.
        double ca = 0.5 * (pa.lo + pa.hi);
        double cb = 0.5 * (pb.lo + pb.hi);
        best_axis = ca < cb ? axis * -1.0 : axis;
      }
    }
    return true;
  };
  if (!test_edges(a) || !test_edges(b)) return false;
  if (mtv) *mtv = best_axis * best_overlap;
  return true;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  if (pts.size() < 3) return pts;
  std::sort(pts.begin(), pts.end(), [](const Vec2& u, const Vec2& v) {
    return u.x < v.x || (u.x == v.x && u.y < v.y);
  });
  std::vector<Vec2> hull(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {  // lower
    while (k >= 2 &&
           (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0)
      --k;
    hull[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i-- > 0;) {  // upper
    while (k >= t &&
           (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0.0)
      --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);
  return hull;
}

}  // namespace planarm
