#include "live/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace live {

Point2 transform_to_global(const Pose2& pose, const Point2& p) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return {pose.x + c * p.x - s * p.y, pose.y + s * p.x + c * p.y};
}

double dist_point_segment(const Point2& p, const LineSegment& s) {
  const Point2 d = s.b - s.a;
  const double len2 = d.squared_norm();
  if (len2 <= 0.0) return distance(p, s.a);
  double t = (p - s.a).dot(d) / len2;
  if (t < 0.0) t = 0.0;
  if (t > 1.0) t = 1.0;
  return distance(p, s.a + d * t);
}

double min_dist_to_map(const Point2& p, const VectorMap& map) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : map.segments) {
    const double d = dist_point_segment(p, s);
    if (d < best) best = d;
  }
  return best;
}

namespace {

int orientation(const Point2& a, const Point2& b, const Point2& c) {
  const double v = (b - a).cross(c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
  return p.x >= std::min(a.x, b.x) && p.x <= std::max(a.x, b.x) &&
         p.y >= std::min(a.y, b.y) && p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(const LineSegment& s1, const LineSegment& s2) {
  const int o1 = orientation(s1.a, s1.b, s2.a);
  const int o2 = orientation(s1.a, s1.b, s2.b);
  const int o3 = orientation(s2.a, s2.b, s1.a);
  const int o4 = orientation(s2.a, s2.b, s1.b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(s1.a, s1.b, s2.a)) return true;
  if (o2 == 0 && on_segment(s1.a, s1.b, s2.b)) return true;
  if (o3 == 0 && on_segment(s2.a, s2.b, s1.a)) return true;
  if (o4 == 0 && on_segment(s2.a, s2.b, s1.b)) return true;
  return false;
}

// Ray-segment intersection via the parametric cross-product formulation.
std::optional<double> ray_segment_hit(const Point2& origin, const Point2& dir,
                                      const LineSegment& seg, double max_range) {
  const Point2 e = seg.b - seg.a;
  const double denom = dir.cross(e);
  if (std::abs(denom) < 1e-12) {
    // Parallel. Collinear rays hit the nearest endpoint within the span.
    if (std::abs((seg.a - origin).cross(dir)) > 1e-12) return std::nullopt;
    const double ta = (seg.a - origin).dot(dir);
    const double tb = (seg.b - origin).dot(dir);
    const double hi = std::max(ta, tb);
    if (hi < 0.0) return std::nullopt;
    const double t = std::max(0.0, std::min(ta, tb));
    if (t > max_range) return std::nullopt;
    return t;
  }
  const Point2 w = seg.a - origin;
  const double t = w.cross(e) / denom;
  const double u = w.cross(dir) / denom;
  if (t < 0.0 || t > max_range) return std::nullopt;
  if (u < -1e-12 || u > 1.0 + 1e-12) return std::nullopt;
  return t;
}

std::optional<double> ray_cast(const Pose2& pose, double bearing, double max_range,
                               const VectorMap& map) {
  const double ang = pose.theta + bearing;
  const Point2 origin{pose.x, pose.y};
  const Point2 dir{std::cos(ang), std::sin(ang)};
  std::optional<double> best;
  for (const auto& seg : map.segments) {
    const auto t = ray_segment_hit(origin, dir, seg, max_range);
    if (t && (!best || *t < *best)) best = t;
  }
  return best;
}

std::vector<std::optional<double>> expected_scan(const Pose2& pose,
                                                 const std::vector<double>& bearings,
                                                 const VectorMap& map, double max_range) {
  std::vector<std::optional<double>> out;
  out.reserve(bearings.size());
  for (const double b : bearings) out.push_back(ray_cast(pose, b, max_range, map));
  return out;
}

VectorMap parse_vector_map(const std::string& text) {
  VectorMap map;
  bool have_bounds = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "bounds") {
      double x0, y0, x1, y1;
      if (!(ls >> x0 >> y0 >> x1 >> y1) || x1 <= x0 || y1 <= y0) {
        throw std::runtime_error("map line " + std::to_string(lineno) + ": bad bounds header");
      }
      map.bounds = {{x0, y0}, {x1, y1}};
      have_bounds = true;
      continue;
    }
    if (!have_bounds) {
      throw std::runtime_error("map: bounds header required before first segment");
    }
    double ax, ay, bx, by;
    std::istringstream seg_ls(line);
    if (!(seg_ls >> ax >> ay >> bx >> by)) {
      throw std::runtime_error("map line " + std::to_string(lineno) + ": expected x1 y1 x2 y2");
    }
    LineSegment seg{ax, ay, bx, by};
    if (seg.length() <= 0.0) {
      throw std::runtime_error("map line " + std::to_string(lineno) + ": degenerate segment");
    }
    if (!map.bounds.contains(seg.a) || !map.bounds.contains(seg.b)) {
      throw std::runtime_error("map line " + std::to_string(lineno) + ": segment outside bounds");
    }
    map.segments.push_back(seg);
  }
  if (!have_bounds) throw std::runtime_error("map: missing bounds header");
  return map;
}

VectorMap load_vector_map(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open map file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_vector_map(ss.str());
}

SegmentIndex::SegmentIndex(const VectorMap& map) : segments_(map.segments) {
  const double pad = cell_;
  origin_ = {map.bounds.min.x - pad, map.bounds.min.y - pad};
  const double w = (map.bounds.max.x + pad) - origin_.x;
  const double h = (map.bounds.max.y + pad) - origin_.y;
  width_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
  height_ = std::max(1, static_cast<int>(std::ceil(h / cell_)));
  buckets_.assign(static_cast<std::size_t>(width_) * height_, {});
  for (int i = 0; i < static_cast<int>(segments_.size()); ++i) {
    const auto& s = segments_[i];
    const double lo_x = std::min(s.a.x, s.b.x), hi_x = std::max(s.a.x, s.b.x);
    const double lo_y = std::min(s.a.y, s.b.y), hi_y = std::max(s.a.y, s.b.y);
    int cx0 = std::clamp(static_cast<int>(std::floor((lo_x - origin_.x) / cell_)), 0, width_ - 1);
    int cx1 = std::clamp(static_cast<int>(std::floor((hi_x - origin_.x) / cell_)), 0, width_ - 1);
    int cy0 = std::clamp(static_cast<int>(std::floor((lo_y - origin_.y) / cell_)), 0, height_ - 1);
    int cy1 = std::clamp(static_cast<int>(std::floor((hi_y - origin_.y) / cell_)), 0, height_ - 1);
    for (int cy = cy0; cy <= cy1; ++cy) {
      for (int cx = cx0; cx <= cx1; ++cx) {
        buckets_[static_cast<std::size_t>(cy) * width_ + cx].push_back(i);
      }
    }
  }
}

double SegmentIndex::min_dist(const Point2& p) const {
  if (segments_.empty()) return std::numeric_limits<double>::infinity();
  const int px = std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / cell_)), 0, width_ - 1);
  const int py =
      std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / cell_)), 0, height_ - 1);
  double best = std::numeric_limits<double>::infinity();
  const int max_ring = std::max(width_, height_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    // Once a hit is closer than the rings not yet scanned can reach, stop.
    if (best <= (ring - 1) * cell_) break;
    bool any_cell = false;
    for (int cy = py - ring; cy <= py + ring; ++cy) {
      if (cy < 0 || cy >= height_) continue;
      for (int cx = px - ring; cx <= px + ring; ++cx) {
        if (cx < 0 || cx >= width_) continue;
        if (std::max(std::abs(cx - px), std::abs(cy - py)) != ring) continue;
        any_cell = true;
        for (int id : buckets_[static_cast<std::size_t>(cy) * width_ + cx]) {
          best = std::min(best, dist_point_segment(p, segments_[id]));
        }
      }
    }
    if (!any_cell && ring > 0) break;
  }
  if (best == std::numeric_limits<double>::infinity()) {
    for (const auto& s : segments_) best = std::min(best, dist_point_segment(p, s));
  }
  return best;
}

void save_vector_map(const VectorMap& map, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write map file: " + path);
  char buf[160];
  std::snprintf(buf, sizeof(buf), "bounds %.4f %.4f %.4f %.4f\n", map.bounds.min.x,
                map.bounds.min.y, map.bounds.max.x, map.bounds.max.y);
  f << buf;
  for (const auto& s : map.segments) {
    std::snprintf(buf, sizeof(buf), "%.4f %.4f %.4f %.4f\n", s.a.x, s.a.y, s.b.x, s.b.y);
    f << buf;
  }
}

}  // namespace live
