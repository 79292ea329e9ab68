#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "planarm/geom.hpp"

using namespace planarm;

TEST_CASE("ray hits a perpendicular segment at the analytic distance") {
  const double d = ray_segment({0, 0}, {1, 0}, {0.5, -1}, {0.5, 1});
  CHECK(d == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("ray misses segments behind the origin") {
  const double d = ray_segment({0, 0}, {1, 0}, {-0.5, -1}, {-0.5, 1});
  CHECK(std::isinf(d));
}

TEST_CASE("ray parallel to segment misses") {
  const double d = ray_segment({0, 0}, {1, 0}, {0, 1}, {1, 1});
  CHECK(std::isinf(d));
}

TEST_CASE("point-segment distance") {
  CHECK(dist_point_segment({0, 1}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(dist_point_segment({2, 0}, {-1, 0}, {1, 0}) == doctest::Approx(1.0));
  CHECK(dist_point_segment({0.3, 0}, {-1, 0}, {1, 0}) == doctest::Approx(0.0));
}

TEST_CASE("polygon containment and signed distance") {
  Polygon sq{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(sq.contains({0.5, 0.5}));
  CHECK_FALSE(sq.contains({1.5, 0.5}));
  CHECK(signed_dist_polygon({0.5, 0.5}, sq.verts) == doctest::Approx(-0.5));
  CHECK(signed_dist_polygon({2.0, 0.5}, sq.verts) == doctest::Approx(1.0));
}

TEST_CASE("polygon area and centroid (CCW square)") {
  Polygon sq{{{0, 0}, {2, 0}, {2, 2}, {0, 2}}};
  CHECK(sq.area() == doctest::Approx(4.0));
  CHECK(sq.centroid().x == doctest::Approx(1.0));
  CHECK(sq.centroid().y == doctest::Approx(1.0));
}

TEST_CASE("simple polygon detection") {
  Polygon simple{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  CHECK(simple.is_simple());
  Polygon bowtie{{{0, 0}, {1, 1}, {1, 0}, {0, 1}}};
  CHECK_FALSE(bowtie.is_simple());
}

TEST_CASE("segment-polygon distance reaches zero on contact") {
  std::vector<Vec2> sq{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  CHECK(dist_segment_polygon({-1, 0.5}, {-0.2, 0.5}, sq) ==
        doctest::Approx(0.2));
  CHECK(dist_segment_polygon({-1, 0.5}, {0.5, 0.5}, sq) == doctest::Approx(0.0));
}

TEST_CASE("convex overlap MTV separates boxes") {
  std::vector<Vec2> a{{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  std::vector<Vec2> b{{0.9, 0.2}, {1.9, 0.2}, {1.9, 0.8}, {0.9, 0.8}};
  Vec2 mtv;
  REQUIRE(convex_overlap_mtv(a, b, &mtv));
  // Smallest push is along -x with depth 0.1.
  CHECK(mtv.x == doctest::Approx(-0.1));
  CHECK(mtv.y == doctest::Approx(0.0));
  // Disjoint boxes do not overlap.
  std::vector<Vec2> c{{3, 3}, {4, 3}, {4, 4}, {3, 4}};
  CHECK_FALSE(convex_overlap_mtv(a, c, &mtv));
}

TEST_CASE("wrap_angle maps into (-pi, pi]") {
  CHECK(wrap_angle(0.0) == doctest::Approx(0.0));
  CHECK(wrap_angle(M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(-M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(3 * M_PI) == doctest::Approx(M_PI));
  CHECK(wrap_angle(2.5 * M_PI) == doctest::Approx(0.5 * M_PI));
}

TEST_CASE("pose apply/apply_inv round trip") {
  Pose2 p{{0.3, -0.2}, 0.7};
  const Vec2 v{0.11, 0.05};
  const Vec2 w = p.apply(v);
  CHECK((p.apply_inv(w) - v).norm() == doctest::Approx(0.0).epsilon(1e-12));
}
