#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <unordered_map>
#include <vector>

#include "live/geometry.hpp"

namespace live {

struct LaserScan {
  Pose2 pose_estimate;  // the robot's believed pose
  double timestamp = 0.0;
  std::vector<Point2> points;  // robot frame
};

enum class FeatureClass : uint8_t {
  kLTF,  // matches the static map
  kSTF,  // static but unmapped: matches a prior scan
  kDF,   // matches neither; ignored downstream
};

struct ClassifiedScan {
  LaserScan scan;
  std::vector<FeatureClass> labels;   // parallel to scan.points
  std::vector<Point2> global_points;  // scan.points in the global frame

  std::vector<Point2> stf_points() const;
};

struct PerceptionConfig {
  double sigma_s = 0.0025;       // observation variance, m^2 (5 cm std)
  double ltf_threshold = 0.3679;  // one-sigma gate
  double stf_threshold = 0.3679;
  int history_horizon = 10;  // retained prior scans
};

// Global-frame non-LTF points from prior scans, kept in a ring buffer of
// history_horizon scans with a uniform spatial hash for nearest-neighbor
// lookup. Single writer: one history per robot classification stream.
class ScanHistory {
 public:
  explicit ScanHistory(int horizon, double sigma_s = 0.0025);

  void push(double timestamp, std::vector<Point2> non_ltf_points);

  // Nearest stored point, or nullopt when empty. Exact: the hash ring
  // search widens until the ring bound exceeds the best distance.
  std::optional<Point2> nearest(const Point2& p) const;

  bool empty() const { return size_ == 0; }
  size_t size() const { return size_; }
  int scan_count() const { return static_cast<int>(entries_.size()); }
  std::optional<double> latest_timestamp() const;

 private:
  struct Entry {
    double timestamp;
    std::vector<Point2> points;
  };

  struct CellKey {
    int64_t x, y;
    bool operator==(const CellKey& o) const { return x == o.x && y == o.y; }
  };
  struct CellKeyHash {
    size_t operator()(const CellKey& k) const {
      return static_cast<size_t>((static_cast<uint64_t>(k.x) * 73856093ULL) ^
                                 (static_cast<uint64_t>(k.y) * 19349663ULL));
    }
  };

  CellKey key_of(const Point2& p) const;
  void index_points(const std::vector<Point2>& pts, int delta);

  int horizon_;
  double cell_size_;
  std::deque<Entry> entries_;
  size_t size_ = 0;
  std::unordered_map<CellKey, std::vector<Point2>, CellKeyHash> grid_;
};

// exp(-d^2 / sigma_s) with d the distance to the closest map segment;
// 0 for an empty map.
double ltf_likelihood(const Point2& p_global, const VectorMap& map, double sigma_s);

struct StfMatch {
  double likelihood = 0.0;
  std::optional<Point2> matched;
};

// Likelihood that p_global repeats a stored prior point: exp(-|dp|^2 / sigma_s)
// against the nearest history point; (0, nullopt) for empty history.
StfMatch stf_likelihood(const Point2& p_global, const ScanHistory& history, double sigma_s);

// Labels every point LTF/STF/DF, then pushes this scan's non-LTF global
// points into the history. Throws on non-increasing timestamps.
ClassifiedScan classify_scan(const LaserScan& scan, const VectorMap& map, ScanHistory& history,
                             const PerceptionConfig& cfg);

// Same labeling, but wall distances come from a prebuilt index over the map.
ClassifiedScan classify_scan(const LaserScan& scan, const VectorMap& map,
                             const SegmentIndex& index, ScanHistory& history,
                             const PerceptionConfig& cfg);

}  // namespace live
