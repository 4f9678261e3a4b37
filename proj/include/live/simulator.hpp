#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "live/geometry.hpp"
#include "live/inspection.hpp"
#include "live/perception.hpp"
#include "live/planner.hpp"
#include "live/rng.hpp"
#include "live/search_map.hpp"
#include "live/waypoint_manager.hpp"

namespace live {

// Unmapped square obstacle, optionally a search target.
struct WorldObject {
  enum class Difficulty { kEasy, kMedium, kHard };

  std::string id;
  Point2 center;
  double half_extent = 0.25;
  Difficulty difficulty = Difficulty::kMedium;
  bool is_target = true;

  std::vector<LineSegment> outline() const;  // the 4 sides
};

const char* difficulty_name(WorldObject::Difficulty d);
WorldObject::Difficulty difficulty_from_name(const std::string& name);

struct DriftConfig {
  bool enabled = false;
  double pos_std = 0.01;     // m per sqrt(s), per axis
  double theta_std = 0.002;  // rad per sqrt(s)
};

struct LidarConfig {
  int n_beams = 360;
  double max_range = 10.0;
  double range_noise_std = 0.01;  // meters
};

struct Scenario {
  std::string map_path;
  VectorMap map;
  std::vector<RobotSpec> robots;
  std::vector<WorldObject> objects;
  PlannerMode mode = PlannerMode::kLidarCPP;
  uint64_t seed = 0;
  double tick_dt = 0.5;
  int max_ticks = 2400;
  double detect_prob = 0.8;
  double target_coverage = 0.95;
  DriftConfig drift;
  LidarConfig lidar;
  PerceptionConfig perception;
  InspectionConfig inspection;
  WaypointManagerConfig wm;
  PlannerConfig planner;
};

// Scenario file is JSON; `map` paths resolve relative to the file's
// directory. Every section beyond map/robots/objects is optional and
// defaulted.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario(const std::string& json_text, const std::string& base_dir);
void save_scenario(const Scenario& sc, const std::string& path);

enum class FailureMode { kNone, kPathFailure, kDetectionFailure };
const char* failure_mode_name(FailureMode f);

struct ObjectResult {
  std::string id;
  WorldObject::Difficulty difficulty = WorldObject::Difficulty::kMedium;
  bool is_target = true;
  bool detected = false;
  double detection_time = -1.0;  // seconds; -1 when undetected
};

struct TrialResult {
  bool success = false;  // every target detected
  FailureMode failure_mode = FailureMode::kNone;
  std::vector<ObjectResult> objects;
  std::vector<double> executed_length;            // per robot, meters
  std::vector<int> priority_count;                // per robot
  std::vector<std::pair<double, double>> entropy_trace;  // (seconds, bits)
  int ticks = 0;
};

// Exact equality, used by the networked-equivalence check.
bool trial_results_equal(const TrialResult& a, const TrialResult& b);

// JSON round-trip that reproduces every double bit for bit; how the CLI
// exports results so separate processes can be compared exactly.
std::string trial_result_to_json(const TrialResult& res);
TrialResult trial_result_from_json(const std::string& text);

// Lidar scan of map + object outlines from the true pose; Gaussian range
// noise; misses dropped. The scan claims `believed_pose` as its estimate.
LaserScan simulate_lidar(const VectorMap& map, const std::vector<WorldObject>& objects,
                         const Pose2& true_pose, const Pose2& believed_pose,
                         const LidarConfig& cfg, Rng& rng);

// Object ids whose centers sit inside the camera triangle with clear line
// of sight (map walls and other objects both occlude), each passing an
// independent detect_prob roll. `ever_candidates` (optional) collects ids
// that were candidates regardless of the roll.
std::vector<std::string> camera_detect(const VectorMap& map,
                                       const std::vector<WorldObject>& objects,
                                       const Pose2& true_pose, const SensorFootprint& camera_fp,
                                       double detect_prob, Rng& rng,
                                       std::vector<std::string>* ever_candidates = nullptr);

// Grid A* route follower. Obstacles are inflated by the robot radius; the
// robot turns toward the next route point at <= turn_rate*dt and advances
// at <= speed*dt along route segments, so it never crosses a map segment.
class Navigator {
 public:
  Navigator(const VectorMap& map, double radius, double resolution);

  struct Step {
    Pose2 pose;          // updated true pose
    bool unreachable = false;  // no route to the waypoint exists
    bool stalled = false;      // at route end but outside arrival reach
  };

  // Advance one tick toward the waypoint (position + final heading).
  Step step(const Pose2& pose, const Pose2& waypoint, double speed, double turn_rate, double dt,
            double arrival_tol);

  bool cell_free(const Point2& p) const;

 private:
  friend struct NavigatorTestPeer;
  int index(int ix, int iy) const { return iy * width_ + ix; }
  bool route_to(const Point2& from, const Point2& to);
  std::optional<int> nearest_free_cell(const Point2& p) const;

  Point2 origin_;
  double resolution_;
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> blocked_;
  std::vector<Point2> route_;  // remaining route points, front first
  size_t route_pos_ = 0;
  std::optional<Pose2> route_goal_;
};

// Per-robot payload a tick produces for the search-map owner; mirrors the
// wire Update message.
struct TickUpdate {
  int robot = 0;
  int tick = 0;
  Pose2 believed_pose;
  Pose2 lidar_fp_pose;
  Pose2 camera_fp_pose;
};

// One full deterministic trial, decomposed so the in-process loop and the
// networked server/client drive the same machinery. Within tick t, call
// step_robot_phase(r) then apply_phase(...) for r = 0..N-1 in order, then
// end_tick().
class TrialSim {
 public:
  // Plans internally unless `plan` is given (must cover sc.robots); the
  // harness reuses plans across object layouts, and networked clients
  // adopt the server's plan.
  explicit TrialSim(const Scenario& sc, std::ostream* trajectory_log = nullptr,
                    const CoveragePlan* plan = nullptr);
  ~TrialSim();

  TrialSim(const TrialSim&) = delete;
  TrialSim& operator=(const TrialSim&) = delete;

  const CoveragePlan& plan() const;
  int robot_count() const;
  int current_tick() const;
  bool finished() const;

  // Motion, drift, sensing, classification, inspection and the waypoint
  // manager for robot r. Robots must be stepped in index order.
  TickUpdate step_robot_phase(int r);

  // Applies upd's lidar and camera footprints to the shared search map
  // (in robot-index order), then runs camera detection for that robot.
  void apply_phase(const TickUpdate& upd);

  void end_tick();   // entropy trace, end-condition check, tick++
  void step_tick();  // the in-process composition of the above

  TrialResult finish();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Plans and runs the whole trial in-process; optionally writes the
// trajectory log CSV to `trajectory_path` and/or reuses a cached plan.
TrialResult run_trial(const Scenario& sc);
TrialResult run_trial(const Scenario& sc, const std::string& trajectory_path);
TrialResult run_trial(const Scenario& sc, const std::string& trajectory_path,
                      const CoveragePlan& plan);

}  // namespace live
