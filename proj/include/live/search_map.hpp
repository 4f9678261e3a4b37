#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "live/geometry.hpp"

namespace live {

// Sensor field of view applied to the search map as a local costmap.
// Rectangular stands for the lidar FoV (centered on the robot, oriented
// with its heading), triangular for the camera FoV (apex at the robot,
// axis along heading).
struct SensorFootprint {
  enum class Shape { kRectangular, kTriangular };

  Shape shape = Shape::kRectangular;
  double length = 0.0;      // rectangular: extent along heading
  double width = 0.0;       // rectangular: extent across heading
  double range = 0.0;       // triangular: apex-to-far-edge distance
  double half_angle = 0.0;  // triangular: half opening angle, < pi/2

  static SensorFootprint rectangular(double length, double width);
  static SensorFootprint triangular(double range, double half_angle);

  // Polygon vertices in the global frame for a footprint at `pose`.
  std::vector<Point2> polygon(const Pose2& pose) const;
};

// Bayesian occupancy belief over a grid covering the map bounds.
// Cells hold 0.5 (unknown), 1.0 (static map obstacle) or 0.0 (seen free);
// visual_mask records which cells a camera footprint has covered.
struct SearchMap {
  Point2 origin;
  double resolution = 0.0;
  int width = 0;
  int height = 0;
  std::vector<double> occupancy;
  std::vector<uint8_t> visual_mask;

  int cell_count() const { return width * height; }
  int index(int ix, int iy) const { return iy * width + ix; }
  bool in_grid(int ix, int iy) const { return ix >= 0 && ix < width && iy >= 0 && iy < height; }

  // Cell containing p, or {-1,-1} if outside the grid.
  std::array<int, 2> cell_of(const Point2& p) const;
  Point2 cell_center(int ix, int iy) const;
};

// Grid over map bounds; cells crossed by a segment start at 1.0, the rest
// at 0.5. Rejects configurations above 10^7 cells.
SearchMap init_search_map(const VectorMap& map, double resolution);

// Frees (sets to 0.0) every non-obstacle cell whose center lies inside the
// footprint polygon with unobstructed line of sight from the pose; returns
// how many cells moved from 0.5 to 0.0. Triangular footprints additionally
// mark those cells visually observed.
int apply_footprint(SearchMap& sm, const Pose2& pose, const SensorFootprint& fp,
                    const VectorMap& map);

// Shannon entropy of the grid in bits, with 0*log(0) = 0.
double entropy(const SearchMap& sm);

// Visual mask of the containing cell; out-of-bounds points are unobserved.
bool is_visually_observed(const SearchMap& sm, const Point2& p);

// Debug snapshot: P2 ASCII PGM (0 -> 0, 0.5 -> 128, 1.0 -> 255) plus a
// `.meta` sidecar with origin/resolution.
void save_search_map_pgm(const SearchMap& sm, const std::string& path);

}  // namespace live
