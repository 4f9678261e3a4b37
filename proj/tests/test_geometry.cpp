#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "live/geometry.hpp"
#include "live/rng.hpp"
#include "oracles.hpp"

using namespace live;

namespace {

VectorMap square_room(double half) {
  VectorMap m;
  m.bounds = {{-half, -half}, {half, half}};
  m.segments = {
      {-half, -half, half, -half},
      {half, -half, half, half},
      {half, half, -half, half},
      {-half, half, -half, -half},
  };
  return m;
}

VectorMap random_map(Rng& rng, int n_segments) {
  VectorMap m;
  m.bounds = {{-10.0, -10.0}, {10.0, 10.0}};
  for (int i = 0; i < n_segments; ++i) {
    Point2 a{rng.uniform(-9.0, 9.0), rng.uniform(-9.0, 9.0)};
    Point2 b{a.x + rng.uniform(-4.0, 4.0), a.y + rng.uniform(-4.0, 4.0)};
    b.x = std::clamp(b.x, -10.0, 10.0);
    b.y = std::clamp(b.y, -10.0, 10.0);
    if (distance(a, b) < 1e-3) continue;
    m.segments.push_back({a, b});
  }
  return m;
}

}  // namespace

TEST_SUITE("geometry") {
  TEST_CASE("normalize_angle wraps into (-pi, pi]") {
    CHECK(normalize_angle(0.0) == doctest::Approx(0.0));
    CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));  // -pi maps to +pi
    CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
    CHECK(normalize_angle(2 * kPi) == doctest::Approx(0.0));
    CHECK(normalize_angle(kPi + 0.1) == doctest::Approx(-kPi + 0.1));
  }

  TEST_CASE("transform_to_global basic poses") {
    CHECK(transform_to_global({0, 0, 0}, {1, 2}).x == doctest::Approx(1.0));
    CHECK(transform_to_global({0, 0, 0}, {1, 2}).y == doctest::Approx(2.0));
    CHECK(transform_to_global({1, 0, 0}, {1, 0}).x == doctest::Approx(2.0));
    CHECK(transform_to_global({1, 0, 0}, {1, 0}).y == doctest::Approx(0.0));
    const auto q = transform_to_global({0, 0, kPi / 2}, {1, 0});
    CHECK(q.x == doctest::Approx(0.0));
    CHECK(q.y == doctest::Approx(1.0));
  }

  TEST_CASE("transform_to_global is rigid") {
    Rng rng(17);
    for (int i = 0; i < 200; ++i) {
      const Pose2 pose{rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-4, 4)};
      const Point2 p{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      const Point2 q{rng.uniform(-5, 5), rng.uniform(-5, 5)};
      const double before = distance(p, q);
      const double after = distance(transform_to_global(pose, p), transform_to_global(pose, q));
      CHECK(after == doctest::Approx(before).epsilon(1e-9));
    }
  }

  TEST_CASE("dist_point_segment") {
    const LineSegment s{-1, 0, 1, 0};
    CHECK(dist_point_segment({0, 1}, s) == doctest::Approx(1.0));
    CHECK(dist_point_segment({2, 0}, s) == doctest::Approx(1.0));
    CHECK(dist_point_segment({2, 1}, s) == doctest::Approx(std::sqrt(2.0)));
    CHECK(dist_point_segment({0.5, 0}, s) == doctest::Approx(0.0));
  }

  TEST_CASE("min_dist_to_map empty map is infinite") {
    VectorMap empty;
    CHECK(std::isinf(min_dist_to_map({0, 0}, empty)));
    SegmentIndex idx(empty);
    CHECK(std::isinf(idx.min_dist({0, 0})));
  }

  TEST_CASE("SegmentIndex matches min_dist_to_map") {
    Rng rng(77);
    for (int trial = 0; trial < 5; ++trial) {
      const auto m = random_map(rng, 40);
      const SegmentIndex idx(m);
      for (int i = 0; i < 200; ++i) {
        const Point2 p{rng.uniform(-12.0, 12.0), rng.uniform(-12.0, 12.0)};
        CHECK(idx.min_dist(p) == doctest::Approx(min_dist_to_map(p, m)).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("segments_intersect") {
    CHECK(segments_intersect({0, 0, 2, 2}, {0, 2, 2, 0}));
    CHECK_FALSE(segments_intersect({0, 0, 1, 0}, {0, 1, 1, 1}));
    CHECK(segments_intersect({0, 0, 2, 0}, {1, 0, 1, 5}));   // T-junction
    CHECK(segments_intersect({0, 0, 2, 0}, {2, 0, 3, 3}));   // shared endpoint
    CHECK(segments_intersect({0, 0, 2, 0}, {1, 0, 3, 0}));   // collinear overlap
    CHECK_FALSE(segments_intersect({0, 0, 1, 0}, {2, 0, 3, 0}));  // collinear gap
  }

  TEST_CASE("ray_cast room center") {
    const auto m = square_room(2.0);
    const auto r = ray_cast({0, 0, 0}, 0.0, 10.0, m);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(2.0));
  }

  TEST_CASE("ray_cast empty map misses") {
    VectorMap empty;
    empty.bounds = {{-5, -5}, {5, 5}};
    CHECK_FALSE(ray_cast({0, 0, 0}, 0.0, 10.0, empty).has_value());
  }

  TEST_CASE("ray_cast diagonal against wall x=2") {
    VectorMap m;
    m.bounds = {{-6, -6}, {6, 6}};
    m.segments = {{2, -5, 2, 5}};
    const auto r = ray_cast({0, 0, 0}, kPi / 4, 10.0, m);
    REQUIRE(r.has_value());
    CHECK(*r == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-9));
    const auto marched = oracle::ray_march({0, 0, 0}, kPi / 4, 10.0, m);
    REQUIRE(marched.has_value());
    CHECK(std::abs(*r - *marched) < 5e-3);
  }

  TEST_CASE("ray_cast beyond max_range misses") {
    VectorMap m;
    m.bounds = {{-20, -20}, {20, 20}};
    m.segments = {{15, -5, 15, 5}};
    CHECK_FALSE(ray_cast({0, 0, 0}, 0.0, 10.0, m).has_value());
    CHECK(ray_cast({0, 0, 0}, 0.0, 16.0, m).has_value());
  }

  TEST_CASE("ray_cast hit point lies on a segment") {
    Rng rng(99);
    for (int i = 0; i < 300; ++i) {
      const auto m = random_map(rng, 12);
      const Pose2 pose{rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-4, 4)};
      const double bearing = rng.uniform(-kPi, kPi);
      const auto r = ray_cast(pose, bearing, 12.0, m);
      if (!r) continue;
      CHECK(*r >= 0.0);
      CHECK(*r <= 12.0);
      const double ang = pose.theta + bearing;
      const Point2 hit{pose.x + *r * std::cos(ang), pose.y + *r * std::sin(ang)};
      CHECK(min_dist_to_map(hit, m) < 1e-9);
    }
  }

  TEST_CASE("ray_cast agrees with marching oracle") {
    Rng rng(7);
    int hits = 0;
    for (int i = 0; i < 100; ++i) {
      const auto m = random_map(rng, 10);
      const Pose2 pose{rng.uniform(-9, 9), rng.uniform(-9, 9), rng.uniform(-4, 4)};
      const double bearing = rng.uniform(-kPi, kPi);
      const auto fast = ray_cast(pose, bearing, 12.0, m);
      const auto slow = oracle::ray_march(pose, bearing, 12.0, m);
      REQUIRE(fast.has_value() == slow.has_value());
      if (fast) {
        CHECK(std::abs(*fast - *slow) < 5e-3);
        ++hits;
      }
    }
    CHECK(hits > 20);  // the fuzz actually exercised intersections
  }

  TEST_CASE("expected_scan matches per-bearing ray_cast") {
    const auto m = square_room(2.0);
    std::vector<double> bearings;
    for (int k = 0; k < 360; ++k) bearings.push_back(-kPi + k * (2 * kPi / 360));
    const Pose2 pose{0.3, -0.2, 0.7};
    const auto scan = expected_scan(pose, bearings, m, 10.0);
    REQUIRE(scan.size() == bearings.size());
    for (size_t k = 0; k < bearings.size(); ++k) {
      const auto single = ray_cast(pose, bearings[k], 10.0, m);
      REQUIRE(scan[k].has_value() == single.has_value());
      if (single) CHECK(*scan[k] == doctest::Approx(*single).epsilon(1e-12));
    }
  }

  TEST_CASE("expected_scan symmetry at room center") {
    const auto m = square_room(2.0);
    const auto scan = expected_scan({0, 0, 0}, {0.0, kPi / 2, kPi, -kPi / 2}, m, 10.0);
    for (const auto& r : scan) {
      REQUIRE(r.has_value());
      CHECK(*r == doctest::Approx(2.0));
    }
  }

  TEST_CASE("map file round-trip") {
    const auto m = square_room(3.0);
    const std::string path = "geom_roundtrip.map";
    save_vector_map(m, path);
    const auto m2 = load_vector_map(path);
    REQUIRE(m2.segments.size() == m.segments.size());
    CHECK(m2.bounds.min.x == doctest::Approx(-3.0));
    CHECK(m2.bounds.max.y == doctest::Approx(3.0));
    for (size_t i = 0; i < m.segments.size(); ++i) {
      CHECK(m2.segments[i].a.x == doctest::Approx(m.segments[i].a.x));
      CHECK(m2.segments[i].b.y == doctest::Approx(m.segments[i].b.y));
    }
    std::remove(path.c_str());
  }

  TEST_CASE("map parse rejects bad input") {
    CHECK_THROWS(parse_vector_map("0 0 1 1\n"));  // missing bounds header
    CHECK_THROWS(parse_vector_map("bounds 0 0 4 4\n1 1 1 1\n"));  // degenerate
    CHECK_THROWS(parse_vector_map("bounds 0 0 4 4\n1 1 9 1\n"));  // out of bounds
    CHECK_THROWS(parse_vector_map("bounds 0 0 4 4\n1 1 two 1\n"));
    const auto m = parse_vector_map("# comment\nbounds 0 0 4 4\n\n1 1 3 1\n");
    CHECK(m.segments.size() == 1);
  }
}
