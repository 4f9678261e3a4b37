#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "live/inspection.hpp"
#include "live/rng.hpp"

using namespace live;

namespace {

VectorMap one_wall() {
  VectorMap m;
  m.bounds = {{-10, -10}, {10, 10}};
  m.segments = {{-5.0, 2.0, 5.0, 2.0}};
  return m;
}

}  // namespace

TEST_SUITE("inspection") {
  TEST_CASE("pool_stfs merges near, keeps far") {
    const auto merged = pool_stfs({{0, 0}, {0.1, 0}}, 0.3);
    REQUIRE(merged.size() == 1);
    CHECK(merged[0].x == doctest::Approx(0.05));
    CHECK(merged[0].y == doctest::Approx(0.0));

    CHECK(pool_stfs({}, 0.3).empty());

    const auto kept = pool_stfs({{0, 0}, {5, 5}}, 0.3);
    REQUIRE(kept.size() == 2);
    CHECK(kept[0].x == doctest::Approx(0.0));
    CHECK(kept[1].x == doctest::Approx(5.0));
  }

  TEST_CASE("pooling partitions the input") {
    Rng rng(21);
    std::vector<Point2> pts;
    for (int i = 0; i < 120; ++i) pts.push_back({rng.uniform(-4, 4), rng.uniform(-4, 4)});
    const auto clusters = pool_clusters(pts, 0.5);
    CHECK(clusters.size() <= pts.size());
    int total = 0;
    for (const auto& c : clusters) {
      CHECK(c.count >= 1);
      total += c.count;
    }
    CHECK(total == int(pts.size()));
  }

  TEST_CASE("filter_regions drops near-wall and visually observed points") {
    const auto map = one_wall();
    auto sm = init_search_map(map, 0.5);
    // camera sweep over the area around (3, -1)
    apply_footprint(sm, {1.0, -1.0, 0.0}, SensorFootprint::triangular(3.0, 0.4), map);

    InspectionConfig cfg;
    cfg.ltf_margin = 0.2;
    std::vector<PooledCluster> pooled = {
        {{0.0, 2.05}, 3},   // 0.05 m from the wall
        {{3.0, -1.0}, 2},   // visually observed above
        {{-3.0, -3.0}, 4},  // clean
    };
    const auto regions = filter_regions(pooled, map, sm, cfg, 7.5);
    REQUIRE(regions.size() == 1);
    CHECK(regions[0].center.x == doctest::Approx(-3.0));
    CHECK(regions[0].source_count == 4);
    CHECK(regions[0].created_at == doctest::Approx(7.5));
  }

  TEST_CASE("select_nearest picks the closest region") {
    std::vector<InspectionRegion> regions = {
        {{2, 0}, 1.0, 1},
        {{1, 0}, 2.0, 1},
    };
    const auto r = select_nearest(regions, {0, 0, 0});
    REQUIRE(r.has_value());
    CHECK(r->center.x == doctest::Approx(1.0));
    CHECK_FALSE(select_nearest({}, {0, 0, 0}).has_value());
  }

  TEST_CASE("select_nearest tie-breaks by created_at") {
    std::vector<InspectionRegion> regions = {
        {{0, 1}, 5.0, 1},
        {{0, -1}, 3.0, 1},  // same distance, earlier
    };
    const auto r = select_nearest(regions, {0, 0, 0});
    REQUIRE(r.has_value());
    CHECK(r->created_at == doctest::Approx(3.0));
  }

  TEST_CASE("select_nearest is permutation invariant") {
    Rng rng(8);
    std::vector<InspectionRegion> regions;
    for (int i = 0; i < 12; ++i) {
      regions.push_back({{rng.uniform(-5, 5), rng.uniform(-5, 5)}, double(i % 4), i});
    }
    const Pose2 pose{0.5, -0.5, 0.0};
    const auto ref = select_nearest(regions, pose);
    REQUIRE(ref.has_value());
    for (int trial = 0; trial < 10; ++trial) {
      for (size_t i = regions.size(); i > 1; --i) {
        std::swap(regions[i - 1], regions[rng.uniform_index(i)]);
      }
      const auto got = select_nearest(regions, pose);
      REQUIRE(got.has_value());
      CHECK(got->center.x == ref->center.x);
      CHECK(got->center.y == ref->center.y);
      CHECK(got->created_at == ref->created_at);
    }
  }

  TEST_CASE("priority waypoint geometry") {
    InspectionRegion region;
    region.center = {3, 0};
    auto wp = region_to_priority_waypoint(region, {0, 0, 0}, 1.0);
    CHECK(wp.x == doctest::Approx(2.0));
    CHECK(wp.y == doctest::Approx(0.0));
    CHECK(wp.theta == doctest::Approx(0.0));

    region.center = {0, 2};
    wp = region_to_priority_waypoint(region, {0, 0, 0}, 1.0);
    CHECK(wp.x == doctest::Approx(0.0));
    CHECK(wp.y == doctest::Approx(1.0));
    CHECK(wp.theta == doctest::Approx(kPi / 2));
  }

  TEST_CASE("priority waypoint inside standoff turns in place") {
    InspectionRegion region;
    region.center = {1, 0};
    const auto wp = region_to_priority_waypoint(region, {0.5, 0, kPi / 2}, 1.0);
    CHECK(wp.x == doctest::Approx(0.5));
    CHECK(wp.y == doctest::Approx(0.0));
    CHECK(wp.theta == doctest::Approx(0.0));  // faces the center
  }
}
