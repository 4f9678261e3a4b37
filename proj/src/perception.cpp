#include "live/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace live {

std::vector<Point2> ClassifiedScan::stf_points() const {
  std::vector<Point2> out;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == FeatureClass::kSTF) out.push_back(global_points[i]);
  }
  return out;
}

ScanHistory::ScanHistory(int horizon, double sigma_s) : horizon_(horizon) {
  if (horizon < 1) throw std::invalid_argument("history_horizon must be >= 1");
  if (sigma_s <= 0.0) throw std::invalid_argument("sigma_s must be > 0");
  cell_size_ = 2.0 * std::sqrt(sigma_s);
}

ScanHistory::CellKey ScanHistory::key_of(const Point2& p) const {
  return {static_cast<int64_t>(std::floor(p.x / cell_size_)),
          static_cast<int64_t>(std::floor(p.y / cell_size_))};
}

void ScanHistory::index_points(const std::vector<Point2>& pts, int delta) {
  for (const auto& p : pts) {
    auto& bucket = grid_[key_of(p)];
    if (delta > 0) {
      bucket.push_back(p);
    } else {
      // Remove one matching point; evicted entries were inserted verbatim.
      auto it = std::find_if(bucket.begin(), bucket.end(), [&](const Point2& q) {
        return q.x == p.x && q.y == p.y;
      });
      if (it != bucket.end()) bucket.erase(it);
    }
  }
}

void ScanHistory::push(double timestamp, std::vector<Point2> non_ltf_points) {
  if (!entries_.empty() && timestamp <= entries_.back().timestamp) {
    throw std::invalid_argument("scan history timestamps must strictly increase");
  }
  while (static_cast<int>(entries_.size()) >= horizon_) {
    index_points(entries_.front().points, -1);
    size_ -= entries_.front().points.size();
    entries_.pop_front();
  }
  index_points(non_ltf_points, +1);
  size_ += non_ltf_points.size();
  entries_.push_back({timestamp, std::move(non_ltf_points)});
}

std::optional<double> ScanHistory::latest_timestamp() const {
  if (entries_.empty()) return std::nullopt;
  return entries_.back().timestamp;
}

std::optional<Point2> ScanHistory::nearest(const Point2& p) const {
  if (size_ == 0) return std::nullopt;
  const CellKey center = key_of(p);
  double best_d2 = std::numeric_limits<double>::infinity();
  std::optional<Point2> best;

  auto scan_cell = [&](int64_t cx, int64_t cy) {
    const auto it = grid_.find({cx, cy});
    if (it == grid_.end()) return;
    for (const auto& q : it->second) {
      const double d2 = (q - p).squared_norm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = q;
      }
    }
  };

  constexpr int kMaxRing = 64;
  for (int ring = 0; ring <= kMaxRing; ++ring) {
    if (ring == 0) {
      scan_cell(center.x, center.y);
    } else {
      for (int64_t dx = -ring; dx <= ring; ++dx) {
        scan_cell(center.x + dx, center.y - ring);
        scan_cell(center.x + dx, center.y + ring);
      }
      for (int64_t dy = -ring + 1; dy <= ring - 1; ++dy) {
        scan_cell(center.x - ring, center.y + dy);
        scan_cell(center.x + ring, center.y + dy);
      }
    }
    // Unscanned points sit in rings > ring, at distance >= ring * cell.
    if (best && std::sqrt(best_d2) <= ring * cell_size_) return best;
  }
  if (best) return best;

  // Sparse faraway history: exact fallback over everything.
  for (const auto& e : entries_) {
    for (const auto& q : e.points) {
      const double d2 = (q - p).squared_norm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best = q;
      }
    }
  }
  return best;
}

double ltf_likelihood(const Point2& p_global, const VectorMap& map, double sigma_s) {
  if (sigma_s <= 0.0) throw std::invalid_argument("sigma_s must be > 0");
  if (map.empty()) return 0.0;
  const double d = min_dist_to_map(p_global, map);
  return std::exp(-d * d / sigma_s);
}

StfMatch stf_likelihood(const Point2& p_global, const ScanHistory& history, double sigma_s) {
  if (sigma_s <= 0.0) throw std::invalid_argument("sigma_s must be > 0");
  const auto m = history.nearest(p_global);
  if (!m) return {0.0, std::nullopt};
  const double d2 = (*m - p_global).squared_norm();
  return {std::exp(-d2 / sigma_s), m};
}

namespace {

template <typename WallDist>
ClassifiedScan classify_scan_impl(const LaserScan& scan, bool map_empty, WallDist wall_dist,
                                  ScanHistory& history, const PerceptionConfig& cfg) {
  if (cfg.sigma_s <= 0.0) throw std::invalid_argument("sigma_s must be > 0");
  const auto last = history.latest_timestamp();
  if (last && scan.timestamp <= *last) {
    throw std::invalid_argument("scan timestamp not increasing: stream corrupted");
  }

  ClassifiedScan out;
  out.scan = scan;
  out.labels.reserve(scan.points.size());
  out.global_points.reserve(scan.points.size());

  std::vector<Point2> non_ltf;
  for (const auto& p : scan.points) {
    const Point2 g = transform_to_global(scan.pose_estimate, p);
    out.global_points.push_back(g);
    if (!map_empty) {
      const double d = wall_dist(g);
      if (std::exp(-d * d / cfg.sigma_s) > cfg.ltf_threshold) {
        out.labels.push_back(FeatureClass::kLTF);
        continue;
      }
    }
    non_ltf.push_back(g);
    if (stf_likelihood(g, history, cfg.sigma_s).likelihood > cfg.stf_threshold) {
      out.labels.push_back(FeatureClass::kSTF);
    } else {
      out.labels.push_back(FeatureClass::kDF);
    }
  }
  history.push(scan.timestamp, std::move(non_ltf));
  return out;
}

}  // namespace

ClassifiedScan classify_scan(const LaserScan& scan, const VectorMap& map, ScanHistory& history,
                             const PerceptionConfig& cfg) {
  return classify_scan_impl(
      scan, map.empty(), [&](const Point2& g) { return min_dist_to_map(g, map); }, history, cfg);
}

ClassifiedScan classify_scan(const LaserScan& scan, const VectorMap& map,
                             const SegmentIndex& index, ScanHistory& history,
                             const PerceptionConfig& cfg) {
  return classify_scan_impl(
      scan, map.empty(), [&](const Point2& g) { return index.min_dist(g); }, history, cfg);
}

}  // namespace live
