#pragma once

#include <optional>
#include <vector>

#include "live/geometry.hpp"
#include "live/search_map.hpp"

namespace live {

// A pooled, filtered STF cluster center: a candidate target location that
// deserves a visual look.
struct InspectionRegion {
  Point2 center;
  double created_at = 0.0;
  int source_count = 0;
};

struct InspectionConfig {
  double pool_radius = 0.5;  // duplicate-reduction radius, ~object scale
  double ltf_margin = 0.3;   // drop pooled points this close to the map
  double standoff = 1.5;     // viewing distance for priority waypoints
};

struct PooledCluster {
  Point2 center;
  int count = 0;
};

// Greedy first-come pooling: the first unconsumed point seeds a cluster of
// everything within pool_radius of it; the centroid is emitted. Output
// order follows first-member input order.
std::vector<PooledCluster> pool_clusters(const std::vector<Point2>& points, double pool_radius);
std::vector<Point2> pool_stfs(const std::vector<Point2>& points, double pool_radius);

// Drops pooled points within ltf_margin of any map segment or inside a
// visually observed cell; survivors become regions stamped with `now`.
std::vector<InspectionRegion> filter_regions(const std::vector<PooledCluster>& pooled,
                                             const VectorMap& map, const SearchMap& sm,
                                             const InspectionConfig& cfg, double now);

// Region closest to the pose position; ties broken by earlier created_at,
// then by smaller (x, y) center.
std::optional<InspectionRegion> select_nearest(const std::vector<InspectionRegion>& regions,
                                               const Pose2& pose);

// Viewing pose on the pose-to-center line, standoff short of the center,
// heading at the center. Inside standoff the robot holds position and only
// turns toward the center.
Pose2 region_to_priority_waypoint(const InspectionRegion& region, const Pose2& pose,
                                  double standoff);

}  // namespace live
