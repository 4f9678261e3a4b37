#include "live/search_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace live {

SensorFootprint SensorFootprint::rectangular(double length, double width) {
  if (length <= 0.0 || width <= 0.0) throw std::invalid_argument("footprint dimensions must be > 0");
  SensorFootprint fp;
  fp.shape = Shape::kRectangular;
  fp.length = length;
  fp.width = width;
  return fp;
}

SensorFootprint SensorFootprint::triangular(double range, double half_angle) {
  if (range <= 0.0 || half_angle <= 0.0 || half_angle >= kPi / 2.0) {
    throw std::invalid_argument("triangular footprint needs range > 0 and half_angle in (0, pi/2)");
  }
  SensorFootprint fp;
  fp.shape = Shape::kTriangular;
  fp.range = range;
  fp.half_angle = half_angle;
  return fp;
}

std::vector<Point2> SensorFootprint::polygon(const Pose2& pose) const {
  // Counter-clockwise winding.
  if (shape == Shape::kRectangular) {
    const double hl = length / 2.0;
    const double hw = width / 2.0;
    return {transform_to_global(pose, {hl, -hw}), transform_to_global(pose, {hl, hw}),
            transform_to_global(pose, {-hl, hw}), transform_to_global(pose, {-hl, -hw})};
  }
  const double c = std::cos(half_angle) * range;
  const double s = std::sin(half_angle) * range;
  return {pose.position(), transform_to_global(pose, {c, -s}), transform_to_global(pose, {c, s})};
}

std::array<int, 2> SearchMap::cell_of(const Point2& p) const {
  const int ix = static_cast<int>(std::floor((p.x - origin.x) / resolution));
  const int iy = static_cast<int>(std::floor((p.y - origin.y) / resolution));
  if (!in_grid(ix, iy)) return {-1, -1};
  return {ix, iy};
}

Point2 SearchMap::cell_center(int ix, int iy) const {
  return {origin.x + (ix + 0.5) * resolution, origin.y + (iy + 0.5) * resolution};
}

namespace {

bool point_in_convex_polygon(const std::vector<Point2>& poly, const Point2& p) {
  const size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    if ((b - a).cross(p - a) < -1e-12) return false;
  }
  return true;
}

bool segment_intersects_box(const LineSegment& s, double x0, double y0, double x1, double y1) {
  // Trivial reject: both endpoints strictly on one outside side.
  if (s.a.x < x0 && s.b.x < x0) return false;
  if (s.a.x > x1 && s.b.x > x1) return false;
  if (s.a.y < y0 && s.b.y < y0) return false;
  if (s.a.y > y1 && s.b.y > y1) return false;
  auto inside = [&](const Point2& p) {
    return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
  };
  if (inside(s.a) || inside(s.b)) return true;
  const LineSegment edges[4] = {{x0, y0, x1, y0}, {x1, y0, x1, y1}, {x1, y1, x0, y1}, {x0, y1, x0, y0}};
  for (const auto& e : edges) {
    if (segments_intersect(s, e)) return true;
  }
  return false;
}

struct CellRange {
  int ix0, iy0, ix1, iy1;
};

CellRange cell_range(const SearchMap& sm, double minx, double miny, double maxx, double maxy) {
  auto clamp = [](int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); };
  // Closed-box semantics: a coordinate exactly on a cell boundary touches
  // both neighbors.
  const double eps = 1e-9;
  CellRange r;
  r.ix0 = clamp(static_cast<int>(std::floor((minx - sm.origin.x) / sm.resolution - eps)), 0, sm.width - 1);
  r.iy0 = clamp(static_cast<int>(std::floor((miny - sm.origin.y) / sm.resolution - eps)), 0, sm.height - 1);
  r.ix1 = clamp(static_cast<int>(std::floor((maxx - sm.origin.x) / sm.resolution + eps)), 0, sm.width - 1);
  r.iy1 = clamp(static_cast<int>(std::floor((maxy - sm.origin.y) / sm.resolution + eps)), 0, sm.height - 1);
  return r;
}

}  // namespace

SearchMap init_search_map(const VectorMap& map, double resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
  const double w = map.bounds.width();
  const double h = map.bounds.height();
  const auto cells_along = [&](double extent) {
    return std::max(1, static_cast<int>(std::ceil(extent / resolution - 1e-9)));
  };
  SearchMap sm;
  sm.origin = map.bounds.min;
  sm.resolution = resolution;
  sm.width = cells_along(w);
  sm.height = cells_along(h);
  const long long total = static_cast<long long>(sm.width) * sm.height;
  if (total > 10'000'000LL) throw std::invalid_argument("resolution produces more than 1e7 cells");
  sm.occupancy.assign(total, 0.5);
  sm.visual_mask.assign(total, 0);

  for (const auto& seg : map.segments) {
    const auto r = cell_range(sm, std::min(seg.a.x, seg.b.x), std::min(seg.a.y, seg.b.y),
                              std::max(seg.a.x, seg.b.x), std::max(seg.a.y, seg.b.y));
    for (int iy = r.iy0; iy <= r.iy1; ++iy) {
      for (int ix = r.ix0; ix <= r.ix1; ++ix) {
        if (sm.occupancy[sm.index(ix, iy)] == 1.0) continue;
        const double x0 = sm.origin.x + ix * resolution;
        const double y0 = sm.origin.y + iy * resolution;
        if (segment_intersects_box(seg, x0, y0, x0 + resolution, y0 + resolution)) {
          sm.occupancy[sm.index(ix, iy)] = 1.0;
        }
      }
    }
  }
  return sm;
}

int apply_footprint(SearchMap& sm, const Pose2& pose, const SensorFootprint& fp,
                    const VectorMap& map) {
  const auto poly = fp.polygon(pose);
  double minx = pose.x, miny = pose.y, maxx = pose.x, maxy = pose.y;
  for (const auto& v : poly) {
    minx = std::min(minx, v.x);
    miny = std::min(miny, v.y);
    maxx = std::max(maxx, v.x);
    maxy = std::max(maxy, v.y);
  }

  // Only segments near the footprint can occlude it.
  std::vector<const LineSegment*> nearby;
  for (const auto& seg : map.segments) {
    if (std::max(seg.a.x, seg.b.x) < minx || std::min(seg.a.x, seg.b.x) > maxx ||
        std::max(seg.a.y, seg.b.y) < miny || std::min(seg.a.y, seg.b.y) > maxy) {
      continue;
    }
    nearby.push_back(&seg);
  }

  const bool triangular = fp.shape == SensorFootprint::Shape::kTriangular;
  const Point2 eye = pose.position();
  const auto r = cell_range(sm, minx, miny, maxx, maxy);
  int freed = 0;
  for (int iy = r.iy0; iy <= r.iy1; ++iy) {
    for (int ix = r.ix0; ix <= r.ix1; ++ix) {
      const int idx = sm.index(ix, iy);
      const double occ = sm.occupancy[idx];
      if (occ == 1.0) continue;  // obstacle cells never change
      const bool needs_mask = triangular && !sm.visual_mask[idx];
      if (occ != 0.5 && !needs_mask) continue;  // nothing left to do here
      const Point2 center = sm.cell_center(ix, iy);
      if (!point_in_convex_polygon(poly, center)) continue;
      bool occluded = false;
      const LineSegment los{eye, center};
      for (const auto* seg : nearby) {
        if (segments_intersect(los, *seg)) {
          occluded = true;
          break;
        }
      }
      if (occluded) continue;
      if (occ == 0.5) {
        sm.occupancy[idx] = 0.0;
        ++freed;
      }
      if (triangular) sm.visual_mask[idx] = 1;
    }
  }
  return freed;
}

double entropy(const SearchMap& sm) {
  double bits = 0.0;
  for (const double m : sm.occupancy) {
    if (m <= 0.0 || m >= 1.0) continue;  // 0*log(0) = 0
    bits -= m * std::log2(m) + (1.0 - m) * std::log2(1.0 - m);
  }
  return bits;
}

bool is_visually_observed(const SearchMap& sm, const Point2& p) {
  const auto c = sm.cell_of(p);
  if (c[0] < 0) return false;
  return sm.visual_mask[sm.index(c[0], c[1])] != 0;
}

void save_search_map_pgm(const SearchMap& sm, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "P2\n" << sm.width << " " << sm.height << "\n255\n";
  for (int iy = sm.height - 1; iy >= 0; --iy) {
    for (int ix = 0; ix < sm.width; ++ix) {
      f << static_cast<int>(std::lround(sm.occupancy[sm.index(ix, iy)] * 255.0));
      f << (ix + 1 == sm.width ? '\n' : ' ');
    }
  }
  std::ofstream meta(path + ".meta");
  meta << "origin " << sm.origin.x << " " << sm.origin.y << "\n"
       << "resolution " << sm.resolution << "\n"
       << "size " << sm.width << " " << sm.height << "\n";
}

}  // namespace live
