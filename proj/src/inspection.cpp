#include "live/inspection.hpp"

#include <cmath>
#include <stdexcept>

namespace live {

std::vector<PooledCluster> pool_clusters(const std::vector<Point2>& points, double pool_radius) {
  if (pool_radius <= 0.0) throw std::invalid_argument("pool_radius must be > 0");
  std::vector<PooledCluster> out;
  std::vector<bool> consumed(points.size(), false);
  for (size_t i = 0; i < points.size(); ++i) {
    if (consumed[i]) continue;
    Point2 sum{0.0, 0.0};
    int n = 0;
    for (size_t j = i; j < points.size(); ++j) {
      if (consumed[j]) continue;
      if (distance(points[i], points[j]) <= pool_radius) {
        consumed[j] = true;
        sum = sum + points[j];
        ++n;
      }
    }
    out.push_back({sum * (1.0 / n), n});
  }
  return out;
}

std::vector<Point2> pool_stfs(const std::vector<Point2>& points, double pool_radius) {
  std::vector<Point2> out;
  for (const auto& c : pool_clusters(points, pool_radius)) out.push_back(c.center);
  return out;
}

std::vector<InspectionRegion> filter_regions(const std::vector<PooledCluster>& pooled,
                                             const VectorMap& map, const SearchMap& sm,
                                             const InspectionConfig& cfg, double now) {
  std::vector<InspectionRegion> out;
  for (const auto& c : pooled) {
    if (min_dist_to_map(c.center, map) < cfg.ltf_margin) continue;
    if (is_visually_observed(sm, c.center)) continue;
    out.push_back({c.center, now, c.count});
  }
  return out;
}

std::optional<InspectionRegion> select_nearest(const std::vector<InspectionRegion>& regions,
                                               const Pose2& pose) {
  const Point2 p = pose.position();
  std::optional<InspectionRegion> best;
  double best_d = 0.0;
  for (const auto& r : regions) {
    const double d = distance(r.center, p);
    if (!best) {
      best = r;
      best_d = d;
      continue;
    }
    if (d < best_d ||
        (d == best_d && (r.created_at < best->created_at ||
                         (r.created_at == best->created_at &&
                          (r.center.x < best->center.x ||
                           (r.center.x == best->center.x && r.center.y < best->center.y)))))) {
      best = r;
      best_d = d;
    }
  }
  return best;
}

Pose2 region_to_priority_waypoint(const InspectionRegion& region, const Pose2& pose,
                                  double standoff) {
  if (standoff <= 0.0) throw std::invalid_argument("standoff must be > 0");
  const Point2 delta = region.center - pose.position();
  const double d = delta.norm();
  const double heading = d > 1e-12 ? std::atan2(delta.y, delta.x) : pose.theta;
  if (d <= standoff) {
    return {pose.x, pose.y, heading};  // already close enough: turn in place
  }
  const Point2 wp = region.center - delta * (standoff / d);
  return {wp.x, wp.y, heading};
}

}  // namespace live
