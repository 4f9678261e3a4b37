#include "live/planner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "live/log.hpp"
#include "live/rng.hpp"

namespace live {

const char* planner_mode_name(PlannerMode mode) {
  switch (mode) {
    case PlannerMode::kLidarCPP:
      return "lidar";
    case PlannerMode::kVisualCPP:
      return "visual";
    case PlannerMode::kLidarCPPLive:
      return "live";
  }
  return "lidar";
}

PlannerMode planner_mode_from_name(const std::string& name) {
  if (name == "lidar") return PlannerMode::kLidarCPP;
  if (name == "visual") return PlannerMode::kVisualCPP;
  if (name == "live") return PlannerMode::kLidarCPPLive;
  throw std::invalid_argument("unknown planner mode: " + name);
}

double path_length(const std::vector<Pose2>& poses) {
  double total = 0.0;
  for (size_t i = 1; i < poses.size(); ++i) {
    total += distance(poses[i - 1].position(), poses[i].position());
  }
  return total;
}

namespace {

// Free-cell scaffold shared by the greedy planner and coverage_fraction.
struct CoverageGrid {
  SearchMap sm;
  std::vector<Point2> free_centers;
  std::vector<int> cell_to_free;  // grid index -> free index, -1 for obstacles

  explicit CoverageGrid(const VectorMap& map, double resolution)
      : sm(init_search_map(map, resolution)) {
    cell_to_free.assign(sm.cell_count(), -1);
    for (int i = 0; i < sm.cell_count(); ++i) {
      if (sm.occupancy[i] != 1.0) {
        cell_to_free[i] = static_cast<int>(free_centers.size());
        free_centers.push_back(sm.cell_center(i % sm.width, i / sm.width));
      }
    }
  }
};

// Free cells visible from `pose` under the footprint: center-in-polygon
// plus unobstructed line of sight.
std::vector<int32_t> visible_free_cells(const CoverageGrid& grid, const VectorMap& map,
                                        const Pose2& pose, const SensorFootprint& fp) {
  const auto poly = fp.polygon(pose);
  double minx = pose.x, miny = pose.y, maxx = pose.x, maxy = pose.y;
  for (const auto& v : poly) {
    minx = std::min(minx, v.x);
    miny = std::min(miny, v.y);
    maxx = std::max(maxx, v.x);
    maxy = std::max(maxy, v.y);
  }
  std::vector<const LineSegment*> nearby;
  for (const auto& seg : map.segments) {
    if (std::max(seg.a.x, seg.b.x) < minx || std::min(seg.a.x, seg.b.x) > maxx ||
        std::max(seg.a.y, seg.b.y) < miny || std::min(seg.a.y, seg.b.y) > maxy) {
      continue;
    }
    nearby.push_back(&seg);
  }

  auto in_poly = [&](const Point2& p) {
    const size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
      if ((poly[(i + 1) % n] - poly[i]).cross(p - poly[i]) < -1e-12) return false;
    }
    return true;
  };

  const Point2 eye = pose.position();
  const auto& sm = grid.sm;
  const int ix0 = std::max(0, static_cast<int>(std::floor((minx - sm.origin.x) / sm.resolution)));
  const int iy0 = std::max(0, static_cast<int>(std::floor((miny - sm.origin.y) / sm.resolution)));
  const int ix1 =
      std::min(sm.width - 1, static_cast<int>(std::floor((maxx - sm.origin.x) / sm.resolution)));
  const int iy1 =
      std::min(sm.height - 1, static_cast<int>(std::floor((maxy - sm.origin.y) / sm.resolution)));

  std::vector<int32_t> cells;
  for (int iy = iy0; iy <= iy1; ++iy) {
    for (int ix = ix0; ix <= ix1; ++ix) {
      const int free_idx = grid.cell_to_free[sm.index(ix, iy)];
      if (free_idx < 0) continue;
      const Point2 center = sm.cell_center(ix, iy);
      if (!in_poly(center)) continue;
      bool occluded = false;
      const LineSegment los{eye, center};
      for (const auto* seg : nearby) {
        if (segments_intersect(los, *seg)) {
          occluded = true;
          break;
        }
      }
      if (!occluded) cells.push_back(free_idx);
    }
  }
  return cells;
}

struct Candidate {
  Point2 pos;
  // One entry for lidar footprints, visual_headings entries for cameras.
  std::vector<std::vector<int32_t>> covers;
  std::vector<int> cached_gain;  // upper bounds; gains only shrink
};

int exact_gain(const std::vector<int32_t>& cover, const std::vector<uint8_t>& covered) {
  int g = 0;
  for (const int32_t c : cover) g += covered[c] == 0 ? 1 : 0;
  return g;
}

// Lloyd k-means on viewpoint positions, centroids seeded at robot starts.
// Each cluster then goes to the robot whose start is nearest its centroid
// (ties by robot index).
std::vector<std::vector<Pose2>> partition_viewpoints(const std::vector<Pose2>& viewpoints,
                                                     const std::vector<RobotSpec>& robots) {
  const size_t k = robots.size();
  std::vector<std::vector<Pose2>> per_robot(k);
  if (viewpoints.empty()) return per_robot;
  if (k == 1) {
    per_robot[0] = viewpoints;
    return per_robot;
  }

  std::vector<Point2> centroids;
  for (const auto& r : robots) centroids.push_back(r.start.position());
  std::vector<int> assign(viewpoints.size(), -1);

  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (size_t i = 0; i < viewpoints.size(); ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < k; ++c) {
        const double d = (viewpoints[i].position() - centroids[c]).squared_norm();
        if (d < best_d) {
          best_d = d;
          best = static_cast<int>(c);
        }
      }
      if (assign[i] != best) {
        assign[i] = best;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Point2> sums(k, {0.0, 0.0});
    std::vector<int> counts(k, 0);
    for (size_t i = 0; i < viewpoints.size(); ++i) {
      sums[assign[i]] = sums[assign[i]] + viewpoints[i].position();
      counts[assign[i]]++;
    }
    for (size_t c = 0; c < k; ++c) {
      // Empty clusters keep their centroid pinned at the robot start.
      if (counts[c] > 0) centroids[c] = sums[c] * (1.0 / counts[c]);
    }
  }

  // Cluster centroid -> nearest robot start.
  std::vector<int> cluster_robot(k, 0);
  for (size_t c = 0; c < k; ++c) {
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t r = 0; r < k; ++r) {
      const double d = (centroids[c] - robots[r].start.position()).squared_norm();
      if (d < best_d) {
        best_d = d;
        cluster_robot[c] = static_cast<int>(r);
      }
    }
  }
  for (size_t i = 0; i < viewpoints.size(); ++i) {
    per_robot[cluster_robot[assign[i]]].push_back(viewpoints[i]);
  }
  return per_robot;
}

// Nearest-neighbor order from the robot start, then 2-opt segment
// reversals until no swap shortens the path.
std::vector<Pose2> order_route(const Point2& start, std::vector<Pose2> pts) {
  if (pts.size() <= 1) return pts;

  std::vector<Pose2> route;
  route.reserve(pts.size());
  Point2 cur = start;
  std::vector<bool> used(pts.size(), false);
  for (size_t step = 0; step < pts.size(); ++step) {
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < pts.size(); ++i) {
      if (used[i]) continue;
      const double d = (pts[i].position() - cur).squared_norm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(i);
      }
    }
    used[best] = true;
    route.push_back(pts[best]);
    cur = pts[best].position();
  }

  const size_t n = route.size();
  bool improved = true;
  while (improved) {
    improved = false;
    for (size_t i = 0; i + 1 < n; ++i) {
      for (size_t j = i + 1; j < n; ++j) {
        // Reversing route[i..j] touches only the edges entering i and
        // leaving j; endpoints of the open path have no outer edge.
        double delta = 0.0;
        if (i > 0) {
          delta += distance(route[i - 1].position(), route[j].position()) -
                   distance(route[i - 1].position(), route[i].position());
        }
        if (j + 1 < n) {
          delta += distance(route[i].position(), route[j + 1].position()) -
                   distance(route[j].position(), route[j + 1].position());
        }
        if (delta < -1e-9) {
          std::reverse(route.begin() + i, route.begin() + j + 1);
          improved = true;
        }
      }
    }
  }
  return route;
}

}  // namespace

CoveragePlan plan_coverage(const VectorMap& map, const std::vector<RobotSpec>& robots,
                           PlannerMode mode, double target_coverage, uint64_t seed,
                           const PlannerConfig& cfg) {
  if (robots.empty()) throw std::invalid_argument("at least one robot required");
  if (target_coverage <= 0.0 || target_coverage > 1.0) {
    throw std::invalid_argument("target_coverage must be in (0, 1]");
  }

  const bool visual = mode == PlannerMode::kVisualCPP;
  const SensorFootprint fp = visual ? robots[0].camera_fp : robots[0].lidar_fp;
  const int headings = visual ? cfg.visual_headings : 1;

  CoverageGrid grid(map, cfg.resolution);
  const int total_free = static_cast<int>(grid.free_centers.size());
  if (total_free == 0) throw PlanError("no free space to cover");

  double clearance = 0.0;
  for (const auto& r : robots) clearance = std::max(clearance, r.radius + cfg.clearance_margin);

  Rng rng(seed);
  std::vector<Candidate> pool;
  std::vector<uint8_t> covered(total_free, 0);
  int covered_count = 0;
  std::vector<Pose2> kept;
  int sampled = 0;
  const int wave = 256;

  auto coverage = [&] { return static_cast<double>(covered_count) / total_free; };

  while (coverage() < target_coverage) {
    // Draw a wave of candidates uniformly over free space.
    int drawn = 0;
    int attempts = 0;
    while (drawn < wave && sampled < cfg.sample_budget) {
      if (++attempts > wave * 500) break;  // free space too thin to sample
      const Point2 p{rng.uniform(map.bounds.min.x, map.bounds.max.x),
                     rng.uniform(map.bounds.min.y, map.bounds.max.y)};
      const auto cell = grid.sm.cell_of(p);
      if (cell[0] < 0 || grid.cell_to_free[grid.sm.index(cell[0], cell[1])] < 0) continue;
      if (min_dist_to_map(p, map) <= clearance) continue;
      Candidate cand;
      cand.pos = p;
      for (int h = 0; h < headings; ++h) {
        const double theta = visual ? h * (2.0 * kPi / headings) : 0.0;
        cand.covers.push_back(visible_free_cells(grid, map, Pose2{p.x, p.y, theta}, fp));
        cand.cached_gain.push_back(static_cast<int>(cand.covers.back().size()));
      }
      pool.push_back(std::move(cand));
      ++drawn;
      ++sampled;
    }

    // Greedy picks with lazy gain re-evaluation; cached gains are upper
    // bounds since coverage only grows.
    while (coverage() < target_coverage) {
      int best_gain = 0;
      int best_c = -1, best_h = -1;
      for (size_t c = 0; c < pool.size(); ++c) {
        for (size_t h = 0; h < pool[c].covers.size(); ++h) {
          if (pool[c].cached_gain[h] <= best_gain) continue;
          const int g = exact_gain(pool[c].covers[h], covered);
          pool[c].cached_gain[h] = g;
          if (g > best_gain) {
            best_gain = g;
            best_c = static_cast<int>(c);
            best_h = static_cast<int>(h);
          }
        }
      }
      if (best_gain <= 0) break;
      auto& cand = pool[best_c];
      const double theta = visual ? best_h * (2.0 * kPi / headings) : 0.0;
      kept.push_back(Pose2{cand.pos.x, cand.pos.y, theta});
      for (const int32_t cell : cand.covers[best_h]) {
        if (!covered[cell]) {
          covered[cell] = 1;
          ++covered_count;
        }
      }
      std::fill(cand.cached_gain.begin(), cand.cached_gain.end(), 0);  // spent
    }

    if (coverage() >= target_coverage) break;
    if (sampled >= cfg.sample_budget) {
      std::ostringstream msg;
      msg << "sample budget " << cfg.sample_budget << " exhausted at coverage " << coverage()
          << " < target " << target_coverage;
      throw PlanError(msg.str());
    }
    if (drawn == 0) throw PlanError("free space too constrained to sample viewpoints");
  }

  LIVE_DEBUG("plan mode=%s viewpoints=%zu coverage=%.3f sampled=%d", planner_mode_name(mode),
             kept.size(), coverage(), sampled);

  CoveragePlan plan;
  plan.viewpoints.resize(robots.size());
  auto clusters = partition_viewpoints(kept, robots);
  for (size_t r = 0; r < robots.size(); ++r) {
    plan.viewpoints[r] = order_route(robots[r].start.position(), std::move(clusters[r]));
    plan.planned_length.push_back(path_length(plan.viewpoints[r]));
  }
  plan.covered_fraction = coverage_fraction(plan.viewpoints, fp, map, cfg.resolution);
  return plan;
}

double coverage_fraction(const std::vector<std::vector<Pose2>>& viewpoints,
                         const SensorFootprint& footprint, const VectorMap& map,
                         double resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("resolution must be > 0");
  CoverageGrid grid(map, resolution);
  const int total_free = static_cast<int>(grid.free_centers.size());
  if (total_free == 0) return 0.0;
  std::vector<uint8_t> covered(total_free, 0);
  int covered_count = 0;
  for (const auto& robot_vps : viewpoints) {
    for (const auto& vp : robot_vps) {
      for (const int32_t cell : visible_free_cells(grid, map, vp, footprint)) {
        if (!covered[cell]) {
          covered[cell] = 1;
          ++covered_count;
        }
      }
    }
  }
  return static_cast<double>(covered_count) / total_free;
}

void save_plan(const CoveragePlan& plan, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write plan file: " + path);
  char buf[160];
  for (size_t r = 0; r < plan.viewpoints.size(); ++r) {
    for (const auto& vp : plan.viewpoints[r]) {
      std::snprintf(buf, sizeof(buf), "%zu %.9f %.9f %.9f\n", r, vp.x, vp.y, vp.theta);
      f << buf;
    }
  }
}

CoveragePlan load_plan(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open plan file: " + path);
  CoveragePlan plan;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    size_t r;
    double x, y, theta;
    if (!(ls >> r >> x >> y >> theta)) throw std::runtime_error("bad plan line: " + line);
    if (plan.viewpoints.size() <= r) plan.viewpoints.resize(r + 1);
    plan.viewpoints[r].push_back(Pose2{x, y, theta});
  }
  for (const auto& vps : plan.viewpoints) plan.planned_length.push_back(path_length(vps));
  return plan;
}

}  // namespace live
