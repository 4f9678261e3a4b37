#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "live/simulator.hpp"
#include "live/worldgen.hpp"

using namespace live;

namespace live {

struct NavigatorTestPeer {
  static bool route(Navigator& n, const Point2& a, const Point2& b) { return n.route_to(a, b); }
  static const std::vector<Point2>& points(const Navigator& n) { return n.route_; }
};

}  // namespace live

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

Scenario open_room_scenario() {
  Scenario sc;
  sc.map.bounds = {{0, 0}, {14, 6}};
  sc.map.segments = {{0, 0, 14, 0}, {14, 0, 14, 6}, {14, 6, 0, 6}, {0, 6, 0, 0}};
  RobotSpec r;
  r.name = "solo";
  r.start = {1.0, 1.0, 0.0};
  sc.robots = {r};
  WorldObject o;
  o.id = "box";
  o.center = {12.0, 5.2};
  sc.objects = {o};
  sc.detect_prob = 1.0;
  sc.lidar.range_noise_std = 0.0;
  sc.max_ticks = 1200;
  return sc;
}

// East-bound sweep along y = 1: the camera cone (range 3.5) never reaches
// the NE-corner object 4.2 m away.
CoveragePlan east_sweep_plan() {
  CoveragePlan plan;
  plan.viewpoints = {{{3.0, 1.0, 0.0}, {11.0, 1.0, 0.0}}};
  plan.planned_length = {8.0};
  plan.covered_fraction = 1.0;
  return plan;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("object outline is its four sides") {
    WorldObject o;
    o.center = {1.0, 2.0};
    o.half_extent = 0.25;
    const auto sides = o.outline();
    REQUIRE(sides.size() == 4);
    for (const auto& s : sides) {
      CHECK(s.length() == doctest::Approx(0.5));
      CHECK(std::max(std::abs(s.a.x - 1.0), std::abs(s.a.y - 2.0)) == doctest::Approx(0.25));
    }
  }

  TEST_CASE("difficulty and failure names round-trip") {
    for (const auto d : {WorldObject::Difficulty::kEasy, WorldObject::Difficulty::kMedium,
                         WorldObject::Difficulty::kHard}) {
      CHECK(difficulty_from_name(difficulty_name(d)) == d);
    }
    CHECK_THROWS_AS(difficulty_from_name("bogus"), std::invalid_argument);
    CHECK(std::string(failure_mode_name(FailureMode::kPathFailure)) == "path_failure");
  }

  TEST_CASE("lidar hits the room walls at the right ranges") {
    const auto m = square_room(2.0);
    LidarConfig cfg;
    cfg.n_beams = 4;
    cfg.range_noise_std = 0.0;
    Rng rng(1);
    const auto scan = simulate_lidar(m, {}, {0, 0, 0}, {0, 0, 0}, cfg, rng);
    REQUIRE(scan.points.size() == 4);
    CHECK(scan.points[0].x == doctest::Approx(2.0));
    CHECK(scan.points[0].y == doctest::Approx(0.0));
    CHECK(scan.points[1].y == doctest::Approx(2.0));
    CHECK(scan.points[2].x == doctest::Approx(-2.0));
    CHECK(scan.points[3].y == doctest::Approx(-2.0));
  }

  TEST_CASE("lidar sees an unmapped box in front of the robot") {
    const auto m = square_room(5.0);
    WorldObject o;
    o.id = "box";
    o.center = {1.0, 0.0};
    LidarConfig cfg;
    cfg.n_beams = 4;
    cfg.range_noise_std = 0.0;
    Rng rng(1);
    const auto scan = simulate_lidar(m, {o}, {0, 0, 0}, {0, 0, 0}, cfg, rng);
    REQUIRE(scan.points.size() == 4);
    CHECK(scan.points[0].x == doctest::Approx(0.75));  // front face of the box
    CHECK(scan.points[2].x == doctest::Approx(-5.0));  // wall behind
  }

  TEST_CASE("lidar beam culling agrees with the per-segment brute force") {
    Rng rng(99);
    LidarConfig cfg;
    cfg.n_beams = 90;
    cfg.range_noise_std = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      auto m = square_room(8.0);
      for (int s = 0; s < 12; ++s) {
        const Point2 a{rng.uniform(-7.5, 7.5), rng.uniform(-7.5, 7.5)};
        const Point2 b{std::clamp(a.x + rng.uniform(-3.0, 3.0), -8.0, 8.0),
                       std::clamp(a.y + rng.uniform(-3.0, 3.0), -8.0, 8.0)};
        if (distance(a, b) > 1e-3) m.segments.push_back({a, b});
      }
      const Pose2 pose{rng.uniform(-6.0, 6.0), rng.uniform(-6.0, 6.0),
                       rng.uniform(-kPi, kPi)};
      Rng scan_rng(7);
      const auto scan = simulate_lidar(m, {}, pose, pose, cfg, scan_rng);

      std::vector<Point2> brute;
      for (int b = 0; b < cfg.n_beams; ++b) {
        const double ang = pose.theta + 2.0 * kPi * b / cfg.n_beams;
        const Point2 dir{std::cos(ang), std::sin(ang)};
        double best = std::numeric_limits<double>::infinity();
        for (const auto& seg : m.segments) {
          const auto t = ray_segment_hit(pose.position(), dir, seg, cfg.max_range);
          if (t && *t < best) best = *t;
        }
        if (!std::isfinite(best)) continue;
        const double phi = 2.0 * kPi * b / cfg.n_beams;
        brute.push_back({best * std::cos(phi), best * std::sin(phi)});
      }
      REQUIRE(scan.points.size() == brute.size());
      for (size_t i = 0; i < brute.size(); ++i) {
        CHECK(scan.points[i].x == doctest::Approx(brute[i].x).epsilon(1e-12));
        CHECK(scan.points[i].y == doctest::Approx(brute[i].y).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("camera detects what is inside the cone with line of sight") {
    const auto m = square_room(5.0);
    const auto cam = SensorFootprint::triangular(3.5, 0.5);
    WorldObject a;
    a.id = "near";
    a.center = {2.0, 0.0};
    WorldObject b;
    b.id = "behind";
    b.center = {3.0, 0.0};  // occluded by `near`
    WorldObject c;
    c.id = "offside";
    c.center = {2.0, 2.5};  // outside the cone

    Rng rng(5);
    std::vector<std::string> ever;
    const auto hits = camera_detect(m, {a, b, c}, {0, 0, 0}, cam, 1.0, rng, &ever);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0] == "near");
    REQUIRE(ever.size() == 1);
    CHECK(ever[0] == "near");

    // A wall between eye and object blocks it.
    auto walled = m;
    walled.segments.push_back({1.0, -1.0, 1.0, 1.0});
    Rng rng2(5);
    CHECK(camera_detect(walled, {a}, {0, 0, 0}, cam, 1.0, rng2).empty());

    // detect_prob 0 still reports the candidate.
    Rng rng3(5);
    std::vector<std::string> ever3;
    CHECK(camera_detect(m, {a}, {0, 0, 0}, cam, 0.0, rng3, &ever3).empty());
    REQUIRE(ever3.size() == 1);
  }

  TEST_CASE("navigator routes through the doorway, not the wall") {
    VectorMap m;
    m.bounds = {{0, 0}, {8, 5}};
    m.segments = {{0, 0, 8, 0}, {8, 0, 8, 5}, {8, 5, 0, 5}, {0, 5, 0, 0}, {4, 0, 4, 3}};
    Navigator nav(m, 0.3, 0.25);
    REQUIRE(NavigatorTestPeer::route(nav, {2, 2}, {6, 2}));
    const auto& pts = NavigatorTestPeer::points(nav);
    REQUIRE(pts.size() > 2);
    for (size_t i = 0; i + 1 < pts.size(); ++i) {
      for (const auto& seg : m.segments) {
        CHECK_FALSE(segments_intersect({pts[i], pts[i + 1]}, seg));
      }
    }
    bool crossed_above_gap = false;
    for (const auto& p : pts) {
      if (std::abs(p.x - 4.0) < 0.3) {
        CHECK(p.y > 3.2);
        crossed_above_gap = true;
      }
    }
    CHECK(crossed_above_gap);
  }

  TEST_CASE("navigator motion never collides and respects the speed budget") {
    VectorMap m;
    m.bounds = {{0, 0}, {8, 5}};
    m.segments = {{0, 0, 8, 0}, {8, 0, 8, 5}, {8, 5, 0, 5}, {0, 5, 0, 0}, {4, 0, 4, 3}};
    Navigator nav(m, 0.3, 0.25);
    Pose2 pose{2, 2, 0};
    const Pose2 goal{6.5, 1.0, 0.0};
    bool arrived = false;
    for (int t = 0; t < 400; ++t) {
      const auto prev = pose;
      const auto step = nav.step(pose, goal, 0.8, 1.5, 0.5, 0.35);
      REQUIRE_FALSE(step.unreachable);
      REQUIRE_FALSE(step.stalled);
      pose = step.pose;
      CHECK(distance(prev.position(), pose.position()) <= 0.8 * 0.5 + 1e-9);
      CHECK(min_dist_to_map(pose.position(), m) > 0.3);
      if (distance(pose.position(), goal.position()) <= 0.35) {
        arrived = true;
        break;
      }
    }
    CHECK(arrived);
  }

  TEST_CASE("navigator holds position when the waypoint is the pose") {
    const auto m = square_room(4.0);
    Navigator nav(m, 0.3, 0.25);
    const Pose2 pose{0.125, 0.125, 0.5};  // a cell center
    const auto step = nav.step(pose, pose, 0.8, 1.5, 0.5, 0.35);
    CHECK_FALSE(step.unreachable);
    CHECK_FALSE(step.stalled);
    CHECK(distance(step.pose.position(), pose.position()) < 1e-9);
  }

  TEST_CASE("navigator reports unreachable goals") {
    VectorMap m = square_room(4.0);
    // A sealed closet in the NE corner.
    m.segments.push_back({2.0, 2.0, 4.0, 2.0});
    m.segments.push_back({2.0, 2.0, 2.0, 4.0});
    Navigator nav(m, 0.3, 0.25);
    const auto step = nav.step({-3, -3, 0}, {3.0, 3.0, 0.0}, 0.8, 1.5, 0.5, 0.35);
    CHECK(step.unreachable);
  }

  TEST_CASE("scenario json round-trips") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "live_sc_rt";
    fs::create_directories(dir);
    write_demo_assets(dir.string());
    const auto sc = load_scenario((dir / "scenario.json").string());
    CHECK(sc.robots.size() == 2);
    CHECK(sc.robots[0].name == "alpha");
    CHECK(sc.mode == PlannerMode::kLidarCPPLive);
    CHECK(sc.objects.size() == 2);
    CHECK(sc.drift.enabled);
    CHECK_FALSE(sc.map.empty());

    save_scenario(sc, (dir / "copy.json").string());
    const auto sc2 = load_scenario((dir / "copy.json").string());
    CHECK(sc2.robots[1].speed == sc.robots[1].speed);
    CHECK(sc2.seed == sc.seed);
    CHECK(sc2.map.segments.size() == sc.map.segments.size());
    fs::remove_all(dir);
  }

  TEST_CASE("scenario parser rejects bad input") {
    CHECK_THROWS(parse_scenario("{}", ""));
    CHECK_THROWS(parse_scenario("not json", ""));
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "live_sc_bad";
    fs::create_directories(dir);
    save_vector_map(square_room(2.0), (dir / "m.map").string());
    const std::string base = dir.string();
    CHECK_THROWS_AS(parse_scenario(R"({"map":"m.map","robots":[]})", base),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(
            R"({"map":"m.map","robots":[{"name":"a","start":[0,0,0]},{"name":"a","start":[1,0,0]}]})",
            base),
        std::invalid_argument);
    CHECK_THROWS_AS(
        parse_scenario(R"({"map":"m.map","robots":[{"name":"a","start":[0,0]}]})", base),
        std::invalid_argument);
    fs::remove_all(dir);
  }

  TEST_CASE("trial finds an object sitting on the route") {
    auto sc = open_room_scenario();
    sc.objects[0].center = {8.0, 1.2};  // right next to the sweep line
    sc.mode = PlannerMode::kLidarCPP;
    const auto plan = east_sweep_plan();
    TrialSim sim(sc, nullptr, &plan);
    while (!sim.finished()) sim.step_tick();
    const auto res = sim.finish();
    CHECK(res.success);
    CHECK(res.failure_mode == FailureMode::kNone);
    REQUIRE(res.objects.size() == 1);
    CHECK(res.objects[0].detected);
    CHECK(res.objects[0].detection_time > 0.0);
  }

  TEST_CASE("live inspects what a blind sweep walks past") {
    auto sc = open_room_scenario();

    sc.mode = PlannerMode::kLidarCPP;
    const auto plan = east_sweep_plan();
    TrialSim blind(sc, nullptr, &plan);
    while (!blind.finished()) blind.step_tick();
    const auto blind_res = blind.finish();
    CHECK_FALSE(blind_res.success);
    CHECK(blind_res.failure_mode == FailureMode::kPathFailure);
    CHECK(blind_res.priority_count[0] == 0);

    sc.mode = PlannerMode::kLidarCPPLive;
    TrialSim live_sim(sc, nullptr, &plan);
    while (!live_sim.finished()) live_sim.step_tick();
    const auto live_res = live_sim.finish();
    CHECK(live_res.success);
    CHECK(live_res.priority_count[0] >= 1);
    CHECK(live_res.objects[0].detection_time > 0.0);
  }

  TEST_CASE("trials are deterministic") {
    auto sc = open_room_scenario();
    sc.mode = PlannerMode::kLidarCPPLive;
    sc.drift.enabled = true;
    sc.lidar.range_noise_std = 0.01;
    sc.seed = 42;
    const auto plan = east_sweep_plan();
    TrialSim a(sc, nullptr, &plan);
    while (!a.finished()) a.step_tick();
    TrialSim b(sc, nullptr, &plan);
    while (!b.finished()) b.step_tick();
    CHECK(trial_results_equal(a.finish(), b.finish()));
  }

  TEST_CASE("executed length never exceeds the speed budget and entropy falls") {
    auto sc = open_room_scenario();
    sc.mode = PlannerMode::kLidarCPPLive;
    const auto plan = east_sweep_plan();
    TrialSim sim(sc, nullptr, &plan);
    while (!sim.finished()) sim.step_tick();
    const auto res = sim.finish();
    CHECK(res.executed_length[0] <=
          sc.robots[0].speed * res.ticks * sc.tick_dt + 1e-9);
    REQUIRE(res.entropy_trace.size() >= 2);
    for (size_t i = 1; i < res.entropy_trace.size(); ++i) {
      CHECK(res.entropy_trace[i].second <= res.entropy_trace[i - 1].second + 1e-12);
    }
    CHECK(res.entropy_trace.back().second < res.entropy_trace.front().second);
  }

  TEST_CASE("trial phases enforce robot order") {
    auto sc = open_room_scenario();
    sc.mode = PlannerMode::kLidarCPP;
    const auto plan = east_sweep_plan();
    TrialSim sim(sc, nullptr, &plan);
    CHECK_THROWS_AS(sim.apply_phase(TickUpdate{}), std::logic_error);
    const auto upd = sim.step_robot_phase(0);
    CHECK_THROWS_AS(sim.step_robot_phase(0), std::logic_error);
    CHECK_THROWS_AS(sim.end_tick(), std::logic_error);
    sim.apply_phase(upd);
    sim.end_tick();
    CHECK(sim.current_tick() == 1);
  }

  TEST_CASE("trajectory log is written with the expected shape") {
    namespace fs = std::filesystem;
    auto sc = open_room_scenario();
    sc.objects[0].center = {8.0, 1.2};
    sc.mode = PlannerMode::kLidarCPP;
    const fs::path path = fs::temp_directory_path() / "live_traj_test.csv";
    {
      const auto plan = east_sweep_plan();
      std::ofstream f(path);
      TrialSim sim(sc, &f, &plan);
      while (!sim.finished()) sim.step_tick();
      sim.finish();
    }
    std::ifstream f(path);
    std::string header;
    REQUIRE(std::getline(f, header));
    CHECK(header ==
          "tick,time_s,robot,true_x,true_y,true_theta,bel_x,bel_y,bel_theta,wm_state,event");
    int rows = 0;
    bool saw_detection = false;
    std::string line;
    while (std::getline(f, line)) {
      ++rows;
      if (line.find("object_detected:box") != std::string::npos) saw_detection = true;
    }
    CHECK(rows > 0);
    CHECK(saw_detection);
    fs::remove(path);
  }

  TEST_CASE("apartment scenario tables are self-consistent") {
    const auto m = apartment_map(0);
    CHECK(m.bounds.width() == doctest::Approx(20.0));
    CHECK(m.bounds.height() == doctest::Approx(30.0));
    CHECK(m.segments.size() > 20);
    for (uint64_t s = 1; s <= 10; ++s) {
      const auto v = apartment_map(s);
      CHECK(v.segments.size() == m.segments.size());
      for (const auto& seg : v.segments) {
        CHECK(v.bounds.contains(seg.a));
        CHECK(v.bounds.contains(seg.b));
      }
    }
    CHECK(apartment_object_spots().size() == 7);
    CHECK(apartment_layouts().size() == 5);
    CHECK(apartment_ics().size() == 3);
    // Starts and object spots must sit in free space, clear of furniture.
    for (const auto& ic : apartment_ics()) {
      CHECK(min_dist_to_map(ic.start0.position(), m) > 0.5);
      CHECK(min_dist_to_map(ic.start1.position(), m) > 0.5);
    }
    for (const auto& spot : apartment_object_spots()) {
      CHECK(min_dist_to_map(spot.center, m) > 0.3);
    }
    const auto sc = make_apartment_scenario(1, 4, PlannerMode::kVisualCPP, 9);
    CHECK(sc.robots.size() == 2);
    CHECK(sc.objects.size() == 2);
    CHECK(sc.objects[0].id == "h1");
    CHECK(sc.drift.enabled);
    CHECK_THROWS_AS(make_apartment_scenario(5, 0, PlannerMode::kLidarCPP, 1),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_apartment_scenario(0, 9, PlannerMode::kLidarCPP, 1),
                    std::invalid_argument);
  }
}
