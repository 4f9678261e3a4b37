#include "live/waypoint_manager.hpp"

#include <cmath>
#include <stdexcept>

namespace live {

WaypointManager::WaypointManager(std::vector<Pose2> global_path, WaypointManagerConfig cfg)
    : global_path_(std::move(global_path)), cfg_(cfg) {
  if (global_path_.empty()) throw std::invalid_argument("global path must be non-empty");
}

bool WaypointManager::position_reached(const Pose2& pose, const Pose2& target) const {
  return distance(pose.position(), target.position()) <= cfg_.arrival_tol;
}

bool WaypointManager::heading_reached(const Pose2& pose, const Pose2& target) const {
  return std::abs(normalize_angle(pose.theta - target.theta)) <= cfg_.heading_tol;
}

void WaypointManager::advance_cursor() {
  ++cursor_;
  if (cursor_ >= global_path_.size()) state_ = WmState::kDone;
}

std::optional<Waypoint> WaypointManager::tick(const Pose2& pose, double now,
                                              const std::optional<Pose2>& offered_priority) {
  if (last_now_ && now <= *last_now_) {
    throw std::invalid_argument("waypoint manager clock must strictly increase");
  }
  last_now_ = now;
  arrived_this_tick_ = false;
  accepted_this_tick_ = false;

  // 1. Arrival. Priority waypoints require heading alignment (the camera
  //    must face the region); global waypoints check position only.
  if (state_ == WmState::kInspect) {
    if (position_reached(pose, *active_priority_) && heading_reached(pose, *active_priority_)) {
      active_priority_.reset();
      state_ = WmState::kFollowGlobal;
      arrived_this_tick_ = true;
    }
  } else if (state_ == WmState::kFollowGlobal) {
    if (position_reached(pose, global_path_[cursor_])) {
      advance_cursor();
      arrived_this_tick_ = true;
    }
  }

  // 2. Priority acceptance, rate limited.
  if (state_ == WmState::kFollowGlobal && offered_priority &&
      (!last_priority_accept_ || now - *last_priority_accept_ >= cfg_.min_priority_interval)) {
    state_ = WmState::kInspect;
    active_priority_ = offered_priority;
    last_priority_accept_ = now;
    ++priorities_accepted_;
    accepted_this_tick_ = true;
  }

  // 3. Current waypoint.
  if (state_ == WmState::kInspect) return Waypoint{*active_priority_, WaypointKind::kPriority};
  if (state_ == WmState::kFollowGlobal) {
    return Waypoint{global_path_[cursor_], WaypointKind::kGlobal};
  }
  return std::nullopt;
}

void WaypointManager::skip_current() {
  if (state_ == WmState::kInspect) {
    active_priority_.reset();
    state_ = WmState::kFollowGlobal;
  } else if (state_ == WmState::kFollowGlobal) {
    advance_cursor();
  }
}

}  // namespace live
