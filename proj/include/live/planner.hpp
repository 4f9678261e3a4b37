#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "live/geometry.hpp"
#include "live/search_map.hpp"

namespace live {

// LidarCPP and LidarCPPLive share identical global plans; LIVE only
// modifies execution online.
enum class PlannerMode { kLidarCPP, kVisualCPP, kLidarCPPLive };

const char* planner_mode_name(PlannerMode mode);
PlannerMode planner_mode_from_name(const std::string& name);

struct RobotSpec {
  std::string name;
  Pose2 start;
  double speed = 0.8;       // m/s
  double turn_rate = 1.5;   // rad/s
  double radius = 0.3;      // footprint radius for navigation clearance
  SensorFootprint lidar_fp = SensorFootprint::rectangular(8.0, 8.0);
  SensorFootprint camera_fp = SensorFootprint::triangular(3.5, 0.5);
};

struct CoveragePlan {
  std::vector<std::vector<Pose2>> viewpoints;  // per robot, visit order
  std::vector<double> planned_length;          // per robot, meters
  double covered_fraction = 0.0;
};

struct PlannerConfig {
  int sample_budget = 5000;  // candidate viewpoints drawn overall
  double resolution = 0.25;  // coverage audit grid
  int visual_headings = 8;   // headings swept per VisualCPP position
  double clearance_margin = 0.05;  // added to robot radius when sampling
};

struct PlanError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Coverage plan for the given mode: greedy viewpoint selection against an
// occlusion-respecting footprint until target_coverage of the free cells is
// covered, k-means partition across robots seeded at their starts, then
// nearest-neighbor ordering improved by 2-opt. Deterministic for a fixed
// seed. Throws PlanError when the sample budget cannot reach the target.
CoveragePlan plan_coverage(const VectorMap& map, const std::vector<RobotSpec>& robots,
                           PlannerMode mode, double target_coverage, uint64_t seed,
                           const PlannerConfig& cfg = {});

// Fraction of free cells whose centers fall inside at least one viewpoint's
// occlusion-respecting footprint.
double coverage_fraction(const std::vector<std::vector<Pose2>>& viewpoints,
                         const SensorFootprint& footprint, const VectorMap& map,
                         double resolution);

// Sum of consecutive position distances; 0 for fewer than two poses.
double path_length(const std::vector<Pose2>& poses);

// Plan file: one `robot_index x y theta` line per viewpoint.
void save_plan(const CoveragePlan& plan, const std::string& path);
CoveragePlan load_plan(const std::string& path);

}  // namespace live
