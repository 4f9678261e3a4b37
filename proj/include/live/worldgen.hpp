#pragma once

#include <string>
#include <utility>
#include <vector>

#include "live/simulator.hpp"

namespace live {

// 20 x 30 m apartment: three rooms on each side of a full-height central
// corridor, door gaps on every floor, hatched furniture, and two wall
// pockets that hide hard objects. Seed 0 is the canonical flat; other
// seeds jitter door and furniture positions without changing the topology.
VectorMap apartment_map(uint64_t seed);

struct ObjectSpot {
  std::string id;
  Point2 center;
  WorldObject::Difficulty difficulty;
};

// Seven canonical object locations: two easy (corridor), three medium
// (open room corners), two hard (furniture pockets).
const std::vector<ObjectSpot>& apartment_object_spots();

// Five two-object layouts as index pairs into apartment_object_spots().
const std::vector<std::pair<int, int>>& apartment_layouts();

struct InitialCondition {
  std::string name;
  Pose2 start0;
  Pose2 start1;
};

// Three paired start configurations for the two robots.
const std::vector<InitialCondition>& apartment_ics();

// Complete two-robot trial scenario on the canonical apartment with drift
// enabled; `ic` and `layout` index the tables above.
Scenario make_apartment_scenario(int ic, int layout, PlannerMode mode, uint64_t seed);

// Writes apartment.map, scenario.json and matrix.json into dir (created
// if missing).
void write_demo_assets(const std::string& dir);

}  // namespace live
