#pragma once

#include <optional>
#include <vector>

#include "live/geometry.hpp"

namespace live {

enum class WaypointKind { kGlobal, kPriority };

struct Waypoint {
  Pose2 target;
  WaypointKind kind = WaypointKind::kGlobal;
};

enum class WmState { kFollowGlobal, kInspect, kDone };

struct WaypointManagerConfig {
  double arrival_tol = 0.35;          // position tolerance, all waypoints
  double heading_tol = 0.2;           // heading tolerance, priority only
  double min_priority_interval = 20;  // seconds between accepted priorities
};

// Finite state machine feeding a robot its current navigation waypoint.
// Global coverage waypoints are consumed in order; offered priority
// waypoints are taken at most once per min_priority_interval, and the
// global cursor resumes unchanged after each inspection.
class WaypointManager {
 public:
  WaypointManager(std::vector<Pose2> global_path, WaypointManagerConfig cfg);

  // One control step. Ordering: arrival check, then priority acceptance,
  // then report the current waypoint (nullopt when Done). `now` must
  // strictly increase across calls.
  std::optional<Waypoint> tick(const Pose2& pose, double now,
                               const std::optional<Pose2>& offered_priority);

  // Drops the current target without visiting it (unreachable waypoint).
  void skip_current();

  WmState state() const { return state_; }
  size_t cursor() const { return cursor_; }
  bool done() const { return state_ == WmState::kDone; }
  int priorities_accepted() const { return priorities_accepted_; }
  bool arrived_this_tick() const { return arrived_this_tick_; }
  bool accepted_this_tick() const { return accepted_this_tick_; }

 private:
  bool position_reached(const Pose2& pose, const Pose2& target) const;
  bool heading_reached(const Pose2& pose, const Pose2& target) const;
  void advance_cursor();

  std::vector<Pose2> global_path_;
  size_t cursor_ = 0;
  WmState state_ = WmState::kFollowGlobal;
  std::optional<double> last_priority_accept_;
  std::optional<Pose2> active_priority_;
  WaypointManagerConfig cfg_;
  std::optional<double> last_now_;
  int priorities_accepted_ = 0;
  bool arrived_this_tick_ = false;
  bool accepted_this_tick_ = false;
};

}  // namespace live
