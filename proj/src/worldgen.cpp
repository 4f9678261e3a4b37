#include "live/worldgen.hpp"

#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace live {

VectorMap apartment_map(uint64_t seed) {
  Rng rng(seed * 7919 + 17);
  const auto jitter = [&](double amp) { return seed == 0 ? 0.0 : rng.uniform(-amp, amp); };

  VectorMap m;
  m.bounds = {{0.0, 0.0}, {20.0, 30.0}};
  const auto wall = [&](double ax, double ay, double bx, double by) {
    m.segments.push_back({ax, ay, bx, by});
  };
  // Hatch lines every 0.2 m keep each 0.25 m audit cell over the slab
  // crossed by at least one segment.
  const auto slab = [&](double x0, double y0, double x1, double y1) {
    wall(x0, y0, x1, y0);
    wall(x1, y0, x1, y1);
    wall(x1, y1, x0, y1);
    wall(x0, y1, x0, y0);
    for (double x = x0 + 0.2; x < x1 - 1e-9; x += 0.2) wall(x, y0, x, y1);
  };

  wall(0, 0, 20, 0);
  wall(20, 0, 20, 30);
  wall(20, 30, 0, 30);
  wall(0, 30, 0, 0);

  // Corridor walls at x = 8.5 and 11.5 with a door gap per floor.
  const double d0 = 5.0 + jitter(0.4);
  const double d1 = 15.0 + jitter(0.4);
  const double d2 = 25.0 + jitter(0.4);
  const double hw = 0.75;
  for (const double x : {8.5, 11.5}) {
    wall(x, 0, x, d0 - hw);
    wall(x, d0 + hw, x, d1 - hw);
    wall(x, d1 + hw, x, d2 - hw);
    wall(x, d2 + hw, x, 30);
  }
  // Floor dividers outside the corridor.
  for (const double y : {10.0, 20.0}) {
    wall(0, y, 8.5, y);
    wall(11.5, y, 20, y);
  }

  // Furniture. The two pockets (top-left and middle-right rooms) open
  // toward their room centers and are where hard objects hide.
  {
    const double dx = jitter(0.2), dy = jitter(0.2);
    slab(5.5 + dx, 0.5 + dy, 8.0 + dx, 2.0 + dy);  // bottom-left room table
  }
  {
    const double dx = jitter(0.2), dy = jitter(0.2);
    slab(12.0 + dx, 7.5 + dy, 14.5 + dx, 9.5 + dy);  // bottom-right room bed
  }
  {
    const double dx = jitter(0.2), dy = jitter(0.2);
    slab(0.5 + dx, 17.5 + dy, 3.0 + dx, 19.5 + dy);  // middle-left room bed
  }
  {
    const double dx = jitter(0.2), dy = jitter(0.2);
    slab(12.0 + dx, 20.5 + dy, 14.0 + dx, 22.0 + dy);  // top-right room table
  }
  {
    // Middle-right pocket against the x = 20 wall, opening west.
    const double dy = jitter(0.2);
    slab(17.0, 13.0 + dy, 20.0, 13.4 + dy);
    slab(17.0, 16.6 + dy, 20.0, 17.0 + dy);
  }
  {
    // Top-left pocket against the y = 30 wall, opening south.
    const double dx = jitter(0.2);
    slab(2.0 + dx, 27.0, 2.4 + dx, 30.0);
    slab(4.6 + dx, 27.0, 5.0 + dx, 30.0);
  }
  return m;
}

const std::vector<ObjectSpot>& apartment_object_spots() {
  static const std::vector<ObjectSpot> spots = {
      {"e1", {10.0, 7.0}, WorldObject::Difficulty::kEasy},     // corridor, south half
      {"e2", {10.0, 23.0}, WorldObject::Difficulty::kEasy},    // corridor, north half
      {"m1", {2.0, 8.0}, WorldObject::Difficulty::kMedium},    // bottom-left room, NW
      {"m2", {16.5, 2.0}, WorldObject::Difficulty::kMedium},   // bottom-right room, SE
      {"m3", {17.5, 27.5}, WorldObject::Difficulty::kMedium},  // top-right room, NE
      {"h1", {3.5, 28.5}, WorldObject::Difficulty::kHard},     // top-left pocket
      {"h2", {18.5, 15.0}, WorldObject::Difficulty::kHard},    // middle-right pocket
  };
  return spots;
}

const std::vector<std::pair<int, int>>& apartment_layouts() {
  static const std::vector<std::pair<int, int>> layouts = {
      {0, 2},  // e1 + m1
      {1, 5},  // e2 + h1
      {0, 4},  // e1 + m3
      {3, 4},  // m2 + m3
      {5, 6},  // h1 + h2
  };
  return layouts;
}

const std::vector<InitialCondition>& apartment_ics() {
  static const std::vector<InitialCondition> ics = {
      {"corridor", {9.5, 1.5, kPi / 2}, {10.5, 1.5, kPi / 2}},
      {"corners", {1.5, 1.5, 0.0}, {18.5, 21.5, kPi / 2}},
      {"split", {4.25, 15.0, 0.0}, {15.75, 15.0, kPi}},
  };
  return ics;
}

Scenario make_apartment_scenario(int ic, int layout, PlannerMode mode, uint64_t seed) {
  const auto& ics = apartment_ics();
  const auto& layouts = apartment_layouts();
  if (ic < 0 || ic >= static_cast<int>(ics.size())) {
    throw std::invalid_argument("initial condition index out of range");
  }
  if (layout < 0 || layout >= static_cast<int>(layouts.size())) {
    throw std::invalid_argument("layout index out of range");
  }

  Scenario sc;
  sc.map_path = "apartment.map";
  sc.map = apartment_map(0);
  sc.mode = mode;
  sc.seed = seed;
  sc.drift.enabled = true;

  RobotSpec r0;
  r0.name = "alpha";
  r0.start = ics[ic].start0;
  r0.speed = 0.8;
  RobotSpec r1;
  r1.name = "bravo";
  r1.start = ics[ic].start1;
  r1.speed = 0.6;
  sc.robots = {r0, r1};

  const auto& spots = apartment_object_spots();
  for (const int idx : {layouts[layout].first, layouts[layout].second}) {
    WorldObject o;
    o.id = spots[idx].id;
    o.center = spots[idx].center;
    o.difficulty = spots[idx].difficulty;
    o.is_target = true;
    sc.objects.push_back(o);
  }
  return sc;
}

void write_demo_assets(const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_vector_map(apartment_map(0), (base / "apartment.map").string());

  Scenario demo = make_apartment_scenario(0, 0, PlannerMode::kLidarCPPLive, 1);
  save_scenario(demo, (base / "scenario.json").string());

  std::ofstream f(base / "matrix.json");
  if (!f) throw std::runtime_error("cannot write matrix.json");
  f << "{\n"
       "  \"modes\": [\"lidar\", \"visual\", \"live\"],\n"
       "  \"ics\": [\"corridor\", \"corners\", \"split\"],\n"
       "  \"layouts\": [0, 1, 2, 3, 4],\n"
       "  \"seeds\": [1, 2, 3]\n"
       "}\n";
}

}  // namespace live
