#include <doctest.h>

#include <cmath>

#include "live/perception.hpp"
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

TEST_SUITE("perception") {
  TEST_CASE("ltf_likelihood") {
    const auto m = one_wall();
    CHECK(ltf_likelihood({0, 2}, m, 0.0025) == doctest::Approx(1.0));
    CHECK(ltf_likelihood({0, 2.1}, m, 0.01) == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
    CHECK(ltf_likelihood({0, 0}, VectorMap{}, 0.0025) == 0.0);
  }

  TEST_CASE("ltf_likelihood non-increasing in distance") {
    const auto m = one_wall();
    double prev = 2.0;
    for (double d = 0.0; d < 1.0; d += 0.05) {
      const double lik = ltf_likelihood({0, 2.0 + d}, m, 0.0025);
      CHECK(lik <= prev);
      prev = lik;
    }
  }

  TEST_CASE("stf_likelihood") {
    ScanHistory h(10, 0.01);
    CHECK(stf_likelihood({1, 1}, h, 0.01).likelihood == 0.0);
    CHECK_FALSE(stf_likelihood({1, 1}, h, 0.01).matched.has_value());

    h.push(1.0, {{1, 1}, {4, 4}});
    const auto exact = stf_likelihood({1, 1}, h, 0.01);
    CHECK(exact.likelihood == doctest::Approx(1.0));
    REQUIRE(exact.matched.has_value());
    CHECK(exact.matched->x == doctest::Approx(1.0));

    const auto one_sigma = stf_likelihood({1.1, 1}, h, 0.01);
    CHECK(one_sigma.likelihood == doctest::Approx(std::exp(-1.0)).epsilon(1e-5));
  }

  TEST_CASE("history nearest matches brute force") {
    Rng rng(3);
    ScanHistory h(10, 0.0025);
    std::vector<Point2> all;
    for (int s = 0; s < 6; ++s) {
      std::vector<Point2> pts;
      for (int i = 0; i < 50; ++i) pts.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
      all.insert(all.end(), pts.begin(), pts.end());
      h.push(s + 1.0, pts);
    }
    for (int q = 0; q < 200; ++q) {
      const Point2 p{rng.uniform(-9, 9), rng.uniform(-9, 9)};
      const auto got = h.nearest(p);
      REQUIRE(got.has_value());
      double best = 1e18;
      for (const auto& c : all) best = std::min(best, (c - p).squared_norm());
      CHECK((*got - p).squared_norm() == doctest::Approx(best).epsilon(1e-12));
    }
  }

  TEST_CASE("history evicts beyond horizon") {
    ScanHistory h(3, 0.0025);
    for (int s = 0; s < 10; ++s) h.push(s + 1.0, {{double(s), 0.0}});
    CHECK(h.scan_count() == 3);
    CHECK(h.size() == 3);
    // oldest retained scan is s=7
    const auto n = h.nearest({0, 0});
    REQUIRE(n.has_value());
    CHECK(n->x == doctest::Approx(7.0));
  }

  TEST_CASE("history rejects non-increasing timestamps") {
    ScanHistory h(3, 0.0025);
    h.push(1.0, {{0, 0}});
    CHECK_THROWS(h.push(1.0, {{1, 1}}));
    CHECK_THROWS(h.push(0.5, {{1, 1}}));
  }

  TEST_CASE("wall scan with zero noise is all LTF") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    LaserScan scan;
    scan.pose_estimate = {0, 0, 0};
    scan.timestamp = 1.0;
    for (int i = 0; i < 30; ++i) scan.points.push_back({-4.0 + i * 0.25, 2.0});
    const auto out = classify_scan(scan, m, h, {});
    REQUIRE(out.labels.size() == scan.points.size());
    for (const auto lab : out.labels) CHECK(lab == FeatureClass::kLTF);
    CHECK(h.empty());  // nothing non-LTF to remember
  }

  TEST_CASE("unmapped box: DF on first sight, STF on second") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    PerceptionConfig cfg;

    LaserScan scan;
    scan.pose_estimate = {0, 0, 0};
    scan.timestamp = 1.0;
    scan.points = {{3.0, -1.0}, {3.1, -1.0}, {3.2, -1.0}};  // box face, far from the wall

    const auto first = classify_scan(scan, m, h, cfg);
    for (const auto lab : first.labels) CHECK(lab == FeatureClass::kDF);
    CHECK(h.size() == 3);

    scan.timestamp = 2.0;
    const auto second = classify_scan(scan, m, h, cfg);
    for (const auto lab : second.labels) CHECK(lab == FeatureClass::kSTF);
    CHECK(second.stf_points().size() == 3);
  }

  TEST_CASE("repetition keeps promoting: scans 2..k are STF") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    LaserScan scan;
    scan.pose_estimate = {0, 0, 0};
    scan.points = {{3.0, -1.0}};
    for (int k = 1; k <= 6; ++k) {
      scan.timestamp = double(k);
      const auto out = classify_scan(scan, m, h, {});
      CHECK(out.labels[0] == (k == 1 ? FeatureClass::kDF : FeatureClass::kSTF));
    }
  }

  TEST_CASE("object moving 1 m between scans stays DF") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    PerceptionConfig cfg;
    cfg.sigma_s = 0.01;
    LaserScan scan;
    scan.pose_estimate = {0, 0, 0};
    for (int k = 0; k < 5; ++k) {
      scan.timestamp = k + 1.0;
      scan.points = {{3.0 + k * 1.0, -1.0}};  // exp(-1/0.01) ~ 0 vs prior position
      const auto out = classify_scan(scan, m, h, cfg);
      CHECK(out.labels[0] == FeatureClass::kDF);
    }
  }

  TEST_CASE("global transform uses the believed pose") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    LaserScan scan;
    scan.pose_estimate = {0, 0, kPi / 2};
    scan.timestamp = 1.0;
    scan.points = {{2.0, 0.0}};  // ahead of the robot -> global (0, 2), on the wall
    const auto out = classify_scan(scan, m, h, {});
    CHECK(out.global_points[0].x == doctest::Approx(0.0));
    CHECK(out.global_points[0].y == doctest::Approx(2.0));
    CHECK(out.labels[0] == FeatureClass::kLTF);
  }

  TEST_CASE("label partition is exhaustive") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    Rng rng(11);
    double t = 0.0;
    for (int s = 0; s < 5; ++s) {
      LaserScan scan;
      scan.pose_estimate = {0, 0, 0};
      scan.timestamp = (t += 1.0);
      for (int i = 0; i < 40; ++i) {
        scan.points.push_back({rng.uniform(-5, 5), rng.uniform(-5, 5)});
      }
      const auto out = classify_scan(scan, m, h, {});
      CHECK(out.labels.size() == 40);
      CHECK(out.global_points.size() == 40);
      int n[3] = {0, 0, 0};
      for (const auto lab : out.labels) n[int(lab)]++;
      CHECK(n[0] + n[1] + n[2] == 40);
    }
  }

  TEST_CASE("classify rejects stale timestamps") {
    const auto m = one_wall();
    ScanHistory h(10, 0.0025);
    LaserScan scan;
    scan.pose_estimate = {0, 0, 0};
    scan.timestamp = 2.0;
    scan.points = {{3.0, -1.0}};
    classify_scan(scan, m, h, {});
    scan.timestamp = 1.5;
    CHECK_THROWS(classify_scan(scan, m, h, {}));
  }
}
