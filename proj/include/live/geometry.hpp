#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace live {

constexpr double kPi = 3.14159265358979323846;

// Wraps an angle into (-pi, pi].
inline double normalize_angle(double theta) {
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  return r;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  Point2() = default;
  Point2(double x_, double y_) : x(x_), y(y_) {}

  Point2 operator+(const Point2& o) const { return {x + o.x, y + o.y}; }
  Point2 operator-(const Point2& o) const { return {x - o.x, y - o.y}; }
  Point2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Point2& o) const { return x * o.x + y * o.y; }
  double cross(const Point2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double distance(const Point2& a, const Point2& b) { return (a - b).norm(); }

struct Pose2 {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // normalized to (-pi, pi]

  Pose2() = default;
  Pose2(double x_, double y_, double theta_) : x(x_), y(y_), theta(normalize_angle(theta_)) {}

  Point2 position() const { return {x, y}; }
};

struct LineSegment {
  Point2 a;
  Point2 b;

  LineSegment() = default;
  LineSegment(Point2 a_, Point2 b_) : a(a_), b(b_) {}
  LineSegment(double ax, double ay, double bx, double by) : a(ax, ay), b(bx, by) {}

  double length() const { return distance(a, b); }
};

struct Bounds {
  Point2 min;
  Point2 max;

  bool contains(const Point2& p, double tol = 1e-9) const {
    return p.x >= min.x - tol && p.x <= max.x + tol && p.y >= min.y - tol && p.y <= max.y + tol;
  }
  double width() const { return max.x - min.x; }
  double height() const { return max.y - min.y; }
};

// Static world as line segments; substrate for ray casting, point
// classification and occlusion checks.
struct VectorMap {
  std::vector<LineSegment> segments;
  Bounds bounds;

  bool empty() const { return segments.empty(); }
};

// Rigid transform of a robot-frame point into the global frame:
// R(theta) * p + (x, y).
Point2 transform_to_global(const Pose2& pose, const Point2& p);

// Euclidean distance from p to the closed segment s.
double dist_point_segment(const Point2& p, const LineSegment& s);

// Minimum distance from p to any segment of the map; +inf for an empty map.
double min_dist_to_map(const Point2& p, const VectorMap& map);

// Exact segment-segment intersection test, boundary inclusive.
bool segments_intersect(const LineSegment& s1, const LineSegment& s2);

// Low-level ray-segment hit; `dir` must be unit length. Distance along the
// ray, or nullopt when the segment is missed within max_range.
std::optional<double> ray_segment_hit(const Point2& origin, const Point2& dir,
                                      const LineSegment& seg, double max_range);

// Analytic ray cast: distance to the first segment hit along the ray at
// `bearing` relative to the pose heading, or nullopt if nothing is hit
// within max_range. Parallel/collinear rays hit the nearest endpoint when
// the ray runs through the segment's span.
std::optional<double> ray_cast(const Pose2& pose, double bearing, double max_range,
                               const VectorMap& map);

// Vectorized ray_cast: element k is ray_cast(pose, bearings[k], max_range, map).
std::vector<std::optional<double>> expected_scan(const Pose2& pose,
                                                 const std::vector<double>& bearings,
                                                 const VectorMap& map, double max_range);

// Map file: `bounds xmin ymin xmax ymax` header, then one `x1 y1 x2 y2`
// segment per line; `#` comments ignored. Degenerate or out-of-bounds
// segments are rejected.
VectorMap load_vector_map(const std::string& path);
VectorMap parse_vector_map(const std::string& text);
void save_vector_map(const VectorMap& map, const std::string& path);

// Uniform-grid index over map segments for repeated nearest-distance
// queries; agrees with min_dist_to_map on every point. Owns a copy of the
// segments, so the source map may go away.
class SegmentIndex {
 public:
  explicit SegmentIndex(const VectorMap& map);

  double min_dist(const Point2& p) const;

 private:
  std::vector<LineSegment> segments_;
  Point2 origin_;
  double cell_ = 1.0;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::vector<int>> buckets_;
};

}  // namespace live
