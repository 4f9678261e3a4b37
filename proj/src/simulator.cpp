#include "live/simulator.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace live {

using nlohmann::json;

std::vector<LineSegment> WorldObject::outline() const {
  const double h = half_extent;
  const Point2 p1{center.x - h, center.y - h};
  const Point2 p2{center.x + h, center.y - h};
  const Point2 p3{center.x + h, center.y + h};
  const Point2 p4{center.x - h, center.y + h};
  return {{p1, p2}, {p2, p3}, {p3, p4}, {p4, p1}};
}

const char* difficulty_name(WorldObject::Difficulty d) {
  switch (d) {
    case WorldObject::Difficulty::kEasy: return "easy";
    case WorldObject::Difficulty::kMedium: return "medium";
    case WorldObject::Difficulty::kHard: return "hard";
  }
  return "medium";
}

WorldObject::Difficulty difficulty_from_name(const std::string& name) {
  if (name == "easy") return WorldObject::Difficulty::kEasy;
  if (name == "medium") return WorldObject::Difficulty::kMedium;
  if (name == "hard") return WorldObject::Difficulty::kHard;
  throw std::invalid_argument("unknown difficulty: " + name);
}

const char* failure_mode_name(FailureMode f) {
  switch (f) {
    case FailureMode::kNone: return "none";
    case FailureMode::kPathFailure: return "path_failure";
    case FailureMode::kDetectionFailure: return "detection_failure";
  }
  return "none";
}

// ---------------------------------------------------------------------------
// Scenario files

namespace {

double num_or(const json& j, const char* key, double def) {
  return j.contains(key) ? j.at(key).get<double>() : def;
}

int int_or(const json& j, const char* key, int def) {
  return j.contains(key) ? j.at(key).get<int>() : def;
}

Pose2 pose_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::invalid_argument("pose must be a [x, y, theta] array");
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Point2 point_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2) {
    throw std::invalid_argument("point must be a [x, y] array");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

RobotSpec robot_from_json(const json& j) {
  RobotSpec r;
  r.name = j.at("name").get<std::string>();
  if (r.name.empty()) throw std::invalid_argument("robot name must be non-empty");
  r.start = pose_from_json(j.at("start"));
  r.speed = num_or(j, "speed", r.speed);
  r.turn_rate = num_or(j, "turn_rate", r.turn_rate);
  r.radius = num_or(j, "radius", r.radius);
  if (j.contains("lidar_fov")) {
    const auto& f = j.at("lidar_fov");
    r.lidar_fp = SensorFootprint::rectangular(f.at("length").get<double>(),
                                              f.at("width").get<double>());
  }
  if (j.contains("camera_fov")) {
    const auto& f = j.at("camera_fov");
    r.camera_fp = SensorFootprint::triangular(f.at("range").get<double>(),
                                              f.at("half_angle").get<double>());
  }
  return r;
}

json robot_to_json(const RobotSpec& r) {
  json j;
  j["name"] = r.name;
  j["start"] = {r.start.x, r.start.y, r.start.theta};
  j["speed"] = r.speed;
  j["turn_rate"] = r.turn_rate;
  j["radius"] = r.radius;
  j["lidar_fov"] = {{"length", r.lidar_fp.length}, {"width", r.lidar_fp.width}};
  j["camera_fov"] = {{"range", r.camera_fp.range}, {"half_angle", r.camera_fp.half_angle}};
  return j;
}

WorldObject object_from_json(const json& j) {
  WorldObject o;
  o.id = j.at("id").get<std::string>();
  if (o.id.empty()) throw std::invalid_argument("object id must be non-empty");
  o.center = point_from_json(j.at("center"));
  o.half_extent = num_or(j, "half_extent", o.half_extent);
  if (j.contains("difficulty")) o.difficulty = difficulty_from_name(j.at("difficulty"));
  if (j.contains("is_target")) o.is_target = j.at("is_target").get<bool>();
  return o;
}

json object_to_json(const WorldObject& o) {
  json j;
  j["id"] = o.id;
  j["center"] = {o.center.x, o.center.y};
  j["half_extent"] = o.half_extent;
  j["difficulty"] = difficulty_name(o.difficulty);
  j["is_target"] = o.is_target;
  return j;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text, const std::string& base_dir) {
  const json j = json::parse(json_text);
  Scenario sc;

  std::filesystem::path map_path = j.at("map").get<std::string>();
  if (map_path.is_relative() && !base_dir.empty()) {
    map_path = std::filesystem::path(base_dir) / map_path;
  }
  sc.map_path = map_path.string();
  sc.map = load_vector_map(sc.map_path);

  if (!j.contains("robots") || !j.at("robots").is_array() || j.at("robots").empty()) {
    throw std::invalid_argument("scenario needs at least one robot");
  }
  std::unordered_set<std::string> names;
  for (const auto& rj : j.at("robots")) {
    auto r = robot_from_json(rj);
    if (!names.insert(r.name).second) {
      throw std::invalid_argument("duplicate robot name: " + r.name);
    }
    sc.robots.push_back(std::move(r));
  }
  if (j.contains("objects")) {
    for (const auto& oj : j.at("objects")) sc.objects.push_back(object_from_json(oj));
  }

  if (j.contains("mode")) sc.mode = planner_mode_from_name(j.at("mode").get<std::string>());
  sc.seed = j.contains("seed") ? j.at("seed").get<uint64_t>() : sc.seed;
  sc.tick_dt = num_or(j, "tick_dt", sc.tick_dt);
  sc.max_ticks = int_or(j, "max_ticks", sc.max_ticks);
  sc.detect_prob = num_or(j, "detect_prob", sc.detect_prob);
  sc.target_coverage = num_or(j, "target_coverage", sc.target_coverage);
  if (sc.tick_dt <= 0.0) throw std::invalid_argument("tick_dt must be > 0");
  if (sc.max_ticks < 1) throw std::invalid_argument("max_ticks must be >= 1");

  if (j.contains("drift")) {
    const auto& d = j.at("drift");
    sc.drift.enabled = d.contains("enabled") ? d.at("enabled").get<bool>() : sc.drift.enabled;
    sc.drift.pos_std = num_or(d, "pos_std", sc.drift.pos_std);
    sc.drift.theta_std = num_or(d, "theta_std", sc.drift.theta_std);
  }
  if (j.contains("lidar")) {
    const auto& l = j.at("lidar");
    sc.lidar.n_beams = int_or(l, "n_beams", sc.lidar.n_beams);
    sc.lidar.max_range = num_or(l, "max_range", sc.lidar.max_range);
    sc.lidar.range_noise_std = num_or(l, "range_noise_std", sc.lidar.range_noise_std);
  }
  if (j.contains("perception")) {
    const auto& p = j.at("perception");
    sc.perception.sigma_s = num_or(p, "sigma_s", sc.perception.sigma_s);
    sc.perception.ltf_threshold = num_or(p, "ltf_threshold", sc.perception.ltf_threshold);
    sc.perception.stf_threshold = num_or(p, "stf_threshold", sc.perception.stf_threshold);
    sc.perception.history_horizon = int_or(p, "history_horizon", sc.perception.history_horizon);
  }
  if (j.contains("inspection")) {
    const auto& i = j.at("inspection");
    sc.inspection.pool_radius = num_or(i, "pool_radius", sc.inspection.pool_radius);
    sc.inspection.ltf_margin = num_or(i, "ltf_margin", sc.inspection.ltf_margin);
    sc.inspection.standoff = num_or(i, "standoff", sc.inspection.standoff);
  }
  if (j.contains("waypoint_manager")) {
    const auto& w = j.at("waypoint_manager");
    sc.wm.arrival_tol = num_or(w, "arrival_tol", sc.wm.arrival_tol);
    sc.wm.heading_tol = num_or(w, "heading_tol", sc.wm.heading_tol);
    sc.wm.min_priority_interval = num_or(w, "min_priority_interval", sc.wm.min_priority_interval);
  }
  if (j.contains("planner")) {
    const auto& p = j.at("planner");
    sc.planner.sample_budget = int_or(p, "sample_budget", sc.planner.sample_budget);
    sc.planner.resolution = num_or(p, "resolution", sc.planner.resolution);
    sc.planner.visual_headings = int_or(p, "visual_headings", sc.planner.visual_headings);
    sc.planner.clearance_margin = num_or(p, "clearance_margin", sc.planner.clearance_margin);
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open scenario file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_scenario(ss.str(), std::filesystem::path(path).parent_path().string());
}

void save_scenario(const Scenario& sc, const std::string& path) {
  json j;
  j["map"] = sc.map_path;
  j["mode"] = planner_mode_name(sc.mode);
  j["seed"] = sc.seed;
  j["tick_dt"] = sc.tick_dt;
  j["max_ticks"] = sc.max_ticks;
  j["detect_prob"] = sc.detect_prob;
  j["target_coverage"] = sc.target_coverage;
  j["robots"] = json::array();
  for (const auto& r : sc.robots) j["robots"].push_back(robot_to_json(r));
  j["objects"] = json::array();
  for (const auto& o : sc.objects) j["objects"].push_back(object_to_json(o));
  j["drift"] = {{"enabled", sc.drift.enabled},
                {"pos_std", sc.drift.pos_std},
                {"theta_std", sc.drift.theta_std}};
  j["lidar"] = {{"n_beams", sc.lidar.n_beams},
                {"max_range", sc.lidar.max_range},
                {"range_noise_std", sc.lidar.range_noise_std}};
  j["perception"] = {{"sigma_s", sc.perception.sigma_s},
                     {"ltf_threshold", sc.perception.ltf_threshold},
                     {"stf_threshold", sc.perception.stf_threshold},
                     {"history_horizon", sc.perception.history_horizon}};
  j["inspection"] = {{"pool_radius", sc.inspection.pool_radius},
                     {"ltf_margin", sc.inspection.ltf_margin},
                     {"standoff", sc.inspection.standoff}};
  j["waypoint_manager"] = {{"arrival_tol", sc.wm.arrival_tol},
                           {"heading_tol", sc.wm.heading_tol},
                           {"min_priority_interval", sc.wm.min_priority_interval}};
  j["planner"] = {{"sample_budget", sc.planner.sample_budget},
                  {"resolution", sc.planner.resolution},
                  {"visual_headings", sc.planner.visual_headings},
                  {"clearance_margin", sc.planner.clearance_margin}};
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write scenario file: " + path);
  f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Sensors

LaserScan simulate_lidar(const VectorMap& map, const std::vector<WorldObject>& objects,
                         const Pose2& true_pose, const Pose2& believed_pose,
                         const LidarConfig& cfg, Rng& rng) {
  if (cfg.n_beams < 1) throw std::invalid_argument("n_beams must be >= 1");
  if (cfg.max_range <= 0.0) throw std::invalid_argument("max_range must be > 0");

  std::vector<LineSegment> segs = map.segments;
  for (const auto& o : objects) {
    const auto out = o.outline();
    segs.insert(segs.end(), out.begin(), out.end());
  }

  const int n = cfg.n_beams;
  const Point2 origin = true_pose.position();
  std::vector<Point2> dirs(n);
  for (int b = 0; b < n; ++b) {
    const double ang = true_pose.theta + 2.0 * kPi * b / n;
    dirs[b] = {std::cos(ang), std::sin(ang)};
  }

  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  const int pad = 2;
  for (const auto& seg : segs) {
    int b0 = 0;
    int cnt = n;
    if (dist_point_segment(origin, seg) >= 1e-9) {
      // The segment subtends less than pi; only beams inside that arc
      // (padded) can hit it.
      const double a1 = std::atan2(seg.a.y - origin.y, seg.a.x - origin.x);
      const double a2 = std::atan2(seg.b.y - origin.y, seg.b.x - origin.x);
      const double d = normalize_angle(a2 - a1);
      const double lo = d >= 0.0 ? a1 : a2;
      const double span = std::abs(d);
      const double t0 = (lo - true_pose.theta) * n / (2.0 * kPi);
      const int want = static_cast<int>(std::ceil(span * n / (2.0 * kPi))) + 2 * pad + 1;
      if (want < n) {
        b0 = static_cast<int>(std::floor(t0)) - pad;
        cnt = want;
      }
    }
    for (int k = 0; k < cnt; ++k) {
      const int b = ((b0 + k) % n + n) % n;
      const auto t = ray_segment_hit(origin, dirs[b], seg, cfg.max_range);
      if (t && *t < best[b]) best[b] = *t;
    }
  }

  LaserScan scan;
  scan.pose_estimate = believed_pose;
  scan.points.reserve(n);
  for (int b = 0; b < n; ++b) {
    if (!std::isfinite(best[b])) continue;
    double r = best[b] + rng.normal(0.0, cfg.range_noise_std);
    r = std::max(0.0, r);
    const double phi = 2.0 * kPi * b / n;
    scan.points.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return scan;
}

namespace {

bool in_convex_polygon(const Point2& p, const std::vector<Point2>& poly) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const Point2& a = poly[i];
    const Point2& b = poly[(i + 1) % n];
    if ((b - a).cross(p - a) < -1e-12) return false;
  }
  return true;
}

}  // namespace

std::vector<std::string> camera_detect(const VectorMap& map,
                                       const std::vector<WorldObject>& objects,
                                       const Pose2& true_pose, const SensorFootprint& camera_fp,
                                       double detect_prob, Rng& rng,
                                       std::vector<std::string>* ever_candidates) {
  const auto poly = camera_fp.polygon(true_pose);
  const Point2 eye = true_pose.position();
  std::vector<std::string> out;
  for (size_t i = 0; i < objects.size(); ++i) {
    const auto& obj = objects[i];
    if (!in_convex_polygon(obj.center, poly)) continue;
    const LineSegment ray{eye, obj.center};
    bool blocked = false;
    for (const auto& s : map.segments) {
      if (segments_intersect(ray, s)) {
        blocked = true;
        break;
      }
    }
    for (size_t k = 0; !blocked && k < objects.size(); ++k) {
      if (k == i) continue;
      for (const auto& s : objects[k].outline()) {
        if (segments_intersect(ray, s)) {
          blocked = true;
          break;
        }
      }
    }
    if (blocked) continue;
    if (ever_candidates) ever_candidates->push_back(obj.id);
    if (rng.bernoulli(detect_prob)) out.push_back(obj.id);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Navigator

Navigator::Navigator(const VectorMap& map, double radius, double resolution)
    : resolution_(resolution) {
  if (resolution <= 0.0) throw std::invalid_argument("navigator resolution must be > 0");
  if (radius < 0.0) throw std::invalid_argument("robot radius must be >= 0");
  origin_ = map.bounds.min;
  width_ = std::max(1, static_cast<int>(std::ceil(map.bounds.width() / resolution - 1e-9)));
  height_ = std::max(1, static_cast<int>(std::ceil(map.bounds.height() / resolution - 1e-9)));
  if (static_cast<long long>(width_) * height_ > 10'000'000LL) {
    throw std::invalid_argument("navigator grid too large");
  }
  const SegmentIndex idx(map);
  // A cell is free only if no map segment can touch a robot disc anywhere
  // inside the cell: clearance covers the radius plus the half-diagonal.
  const double clear = radius + 0.5 * resolution * std::sqrt(2.0);
  blocked_.assign(static_cast<size_t>(width_) * height_, 0);
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) {
      const Point2 c{origin_.x + (ix + 0.5) * resolution, origin_.y + (iy + 0.5) * resolution};
      if (idx.min_dist(c) <= clear) blocked_[index(ix, iy)] = 1;
    }
  }
}

bool Navigator::cell_free(const Point2& p) const {
  const int ix = static_cast<int>(std::floor((p.x - origin_.x) / resolution_));
  const int iy = static_cast<int>(std::floor((p.y - origin_.y) / resolution_));
  if (ix < 0 || ix >= width_ || iy < 0 || iy >= height_) return false;
  return blocked_[index(ix, iy)] == 0;
}

std::optional<int> Navigator::nearest_free_cell(const Point2& p) const {
  const int px =
      std::clamp(static_cast<int>(std::floor((p.x - origin_.x) / resolution_)), 0, width_ - 1);
  const int py =
      std::clamp(static_cast<int>(std::floor((p.y - origin_.y) / resolution_)), 0, height_ - 1);
  double best_d = std::numeric_limits<double>::infinity();
  int best = -1;
  const int max_ring = std::max(width_, height_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    if (best >= 0 && (ring - 0.5) * resolution_ > best_d) break;
    for (int iy = py - ring; iy <= py + ring; ++iy) {
      if (iy < 0 || iy >= height_) continue;
      for (int ix = px - ring; ix <= px + ring; ++ix) {
        if (ix < 0 || ix >= width_) continue;
        if (std::max(std::abs(ix - px), std::abs(iy - py)) != ring) continue;
        const int id = index(ix, iy);
        if (blocked_[id]) continue;
        const Point2 c{origin_.x + (ix + 0.5) * resolution_,
                       origin_.y + (iy + 0.5) * resolution_};
        const double d = distance(p, c);
        if (d < best_d || (d == best_d && id < best)) {
          best_d = d;
          best = id;
        }
      }
    }
  }
  if (best < 0) return std::nullopt;
  return best;
}

bool Navigator::route_to(const Point2& from, const Point2& to) {
  route_.clear();
  route_pos_ = 0;
  const auto s = nearest_free_cell(from);
  const auto g = nearest_free_cell(to);
  if (!s || !g) return false;

  const int cells = width_ * height_;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(cells, inf);
  std::vector<int> parent(cells, -1);

  const auto heuristic = [&](int id) {
    const int dx = std::abs(id % width_ - *g % width_);
    const int dy = std::abs(id / width_ - *g / width_);
    return resolution_ * (std::max(dx, dy) + (std::sqrt(2.0) - 1.0) * std::min(dx, dy));
  };

  using Node = std::tuple<double, double, int>;  // f, g-cost, cell
  std::priority_queue<Node, std::vector<Node>, std::greater<Node>> open;
  dist[*s] = 0.0;
  open.push({heuristic(*s), 0.0, *s});

  bool found = false;
  while (!open.empty()) {
    const auto [f, gc, id] = open.top();
    open.pop();
    if (gc != dist[id]) continue;
    if (id == *g) {
      found = true;
      break;
    }
    const int ix = id % width_;
    const int iy = id / width_;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const int nx = ix + dx;
        const int ny = iy + dy;
        if (nx < 0 || nx >= width_ || ny < 0 || ny >= height_) continue;
        const int nid = index(nx, ny);
        if (blocked_[nid]) continue;
        if (dx != 0 && dy != 0) {
          // No corner cutting: both cardinal neighbors must be free.
          if (blocked_[index(ix + dx, iy)] || blocked_[index(ix, iy + dy)]) continue;
        }
        const double step = (dx != 0 && dy != 0) ? resolution_ * std::sqrt(2.0) : resolution_;
        const double nd = gc + step;
        if (nd < dist[nid]) {
          dist[nid] = nd;
          parent[nid] = id;
          open.push({nd + heuristic(nid), nd, nid});
        }
      }
    }
  }
  if (!found) return false;

  std::vector<int> cells_path;
  for (int id = *g; id >= 0; id = parent[id]) cells_path.push_back(id);
  std::reverse(cells_path.begin(), cells_path.end());
  route_.reserve(cells_path.size());
  for (int id : cells_path) {
    route_.push_back({origin_.x + (id % width_ + 0.5) * resolution_,
                      origin_.y + (id / width_ + 0.5) * resolution_});
  }
  return true;
}

Navigator::Step Navigator::step(const Pose2& pose, const Pose2& waypoint, double speed,
                                double turn_rate, double dt, double arrival_tol) {
  Step out;
  out.pose = pose;

  const bool same_goal = route_goal_ && route_goal_->x == waypoint.x &&
                         route_goal_->y == waypoint.y && route_goal_->theta == waypoint.theta;
  if (!same_goal) {
    route_goal_ = waypoint;
    if (!route_to(pose.position(), waypoint.position())) {
      route_goal_.reset();
      out.unreachable = true;
      return out;
    }
  }

  Point2 pos = pose.position();
  double theta = pose.theta;
  double budget = speed * dt;
  bool rotated = false;

  while (budget > 1e-12 && route_pos_ < route_.size()) {
    const Point2 tgt = route_[route_pos_];
    const double d = distance(pos, tgt);
    if (d < 1e-9) {
      ++route_pos_;
      continue;
    }
    const double desired = std::atan2(tgt.y - pos.y, tgt.x - pos.x);
    double err = normalize_angle(desired - theta);
    if (!rotated) {
      theta = normalize_angle(theta + std::clamp(err, -turn_rate * dt, turn_rate * dt));
      rotated = true;
      err = normalize_angle(desired - theta);
    }
    if (std::abs(err) > 0.6) break;  // finish turning before advancing
    const double adv = std::min(budget, d);
    if (adv >= d - 1e-12) {
      pos = tgt;
      ++route_pos_;
    } else {
      pos = pos + Point2{std::cos(desired), std::sin(desired)} * adv;
    }
    budget -= adv;
  }

  if (route_pos_ >= route_.size()) {
    if (!rotated) {
      const double err = normalize_angle(waypoint.theta - theta);
      theta = normalize_angle(theta + std::clamp(err, -turn_rate * dt, turn_rate * dt));
    }
    if (distance(pos, waypoint.position()) > arrival_tol) out.stalled = true;
  }

  out.pose = Pose2{pos.x, pos.y, theta};
  return out;
}

// ---------------------------------------------------------------------------
// Trial simulation

namespace {

const char* wm_state_name(WmState s) {
  switch (s) {
    case WmState::kFollowGlobal: return "follow_global";
    case WmState::kInspect: return "inspect";
    case WmState::kDone: return "done";
  }
  return "follow_global";
}

}  // namespace

struct TrialSim::Impl {
  struct RobotState {
    Pose2 true_pose;
    Point2 drift_pos;
    double drift_theta;
    Pose2 believed;
    WaypointManager wm;
    Navigator nav;
    ScanHistory hist;
    Rng lidar_rng;
    Rng drift_rng;
    Rng detect_rng;
    std::optional<Waypoint> current_wp;
    double executed = 0.0;
  };

  Scenario sc;
  SegmentIndex seg_index;
  CoveragePlan plan;
  SearchMap sm;
  std::vector<RobotState> robots;
  std::vector<ObjectResult> results;
  std::unordered_set<std::string> ever_candidates;
  std::vector<std::pair<double, double>> entropy_trace;
  std::ostream* log = nullptr;
  int tick = 0;
  int targets_remaining = 0;
  bool finished = false;
  int phase_cursor = 0;   // next robot expecting step_robot_phase
  int applied_cursor = 0;  // next robot expecting apply_phase

  Impl(const Scenario& scenario, std::ostream* trajectory_log, const CoveragePlan* given)
      : sc(scenario), seg_index(sc.map), log(trajectory_log) {
    if (sc.robots.empty()) throw std::invalid_argument("scenario needs at least one robot");
    for (const auto& o : sc.objects) {
      if (o.is_target) ++targets_remaining;
    }
    if (targets_remaining == 0) throw std::invalid_argument("scenario has no target objects");

    if (given) {
      if (given->viewpoints.size() != sc.robots.size()) {
        throw std::invalid_argument("plan does not match the scenario's robots");
      }
      plan = *given;
    } else {
      plan = plan_coverage(sc.map, sc.robots, sc.mode, sc.target_coverage, sc.seed, sc.planner);
    }
    sm = init_search_map(sc.map, sc.planner.resolution);

    const Rng base(sc.seed);
    robots.reserve(sc.robots.size());
    for (size_t r = 0; r < sc.robots.size(); ++r) {
      const auto& spec = sc.robots[r];
      std::vector<Pose2> path = plan.viewpoints[r];
      if (path.empty()) path.push_back(spec.start);
      robots.push_back(RobotState{
          spec.start,
          Point2{0.0, 0.0},
          0.0,
          spec.start,
          WaypointManager(std::move(path), sc.wm),
          Navigator(sc.map, spec.radius, sc.planner.resolution),
          ScanHistory(sc.perception.history_horizon, sc.perception.sigma_s),
          base.fork(1000 + r),
          base.fork(2000 + r),
          base.fork(3000 + r),
          std::nullopt,
          0.0,
      });
    }
    results.reserve(sc.objects.size());
    for (const auto& o : sc.objects) {
      results.push_back(ObjectResult{o.id, o.difficulty, o.is_target, false, -1.0});
    }
    // Prime every manager at t = 0 so the first tick has a waypoint.
    for (auto& rs : robots) {
      rs.current_wp = rs.wm.tick(rs.true_pose, 0.0, std::nullopt);
    }
    entropy_trace.push_back({0.0, entropy(sm)});
    if (log) {
      *log << "tick,time_s,robot,true_x,true_y,true_theta,bel_x,bel_y,bel_theta,wm_state,event\n";
    }
  }

  double now() const { return (tick + 1) * sc.tick_dt; }

  TickUpdate step_robot(int r) {
    if (finished) throw std::logic_error("trial already finished");
    if (r != phase_cursor || r != applied_cursor) {
      throw std::logic_error("robots must be stepped and applied in index order");
    }
    auto& rs = robots[static_cast<size_t>(r)];
    const auto& spec = sc.robots[static_cast<size_t>(r)];
    const double t_now = now();

    // Motion toward the waypoint chosen last tick.
    if (rs.current_wp) {
      const auto res = rs.nav.step(rs.true_pose, rs.current_wp->target, spec.speed,
                                   spec.turn_rate, sc.tick_dt, sc.wm.arrival_tol);
      rs.executed += distance(rs.true_pose.position(), res.pose.position());
      rs.true_pose = res.pose;
      if (res.unreachable || res.stalled) rs.wm.skip_current();
    }

    // Localization drift accumulates as a random walk.
    if (sc.drift.enabled) {
      const double sdt = std::sqrt(sc.tick_dt);
      rs.drift_pos.x += rs.drift_rng.normal(0.0, sc.drift.pos_std * sdt);
      rs.drift_pos.y += rs.drift_rng.normal(0.0, sc.drift.pos_std * sdt);
      rs.drift_theta += rs.drift_rng.normal(0.0, sc.drift.theta_std * sdt);
    }
    rs.believed = Pose2{rs.true_pose.x + rs.drift_pos.x, rs.true_pose.y + rs.drift_pos.y,
                        rs.true_pose.theta + rs.drift_theta};

    // LIVE: classify the scan and maybe propose an inspection waypoint.
    std::optional<Pose2> offered;
    if (sc.mode == PlannerMode::kLidarCPPLive && !rs.wm.done()) {
      LaserScan scan =
          simulate_lidar(sc.map, sc.objects, rs.true_pose, rs.believed, sc.lidar, rs.lidar_rng);
      scan.timestamp = t_now;
      const auto classified = classify_scan(scan, sc.map, seg_index, rs.hist, sc.perception);
      const auto pooled = pool_clusters(classified.stf_points(), sc.inspection.pool_radius);
      const auto regions = filter_regions(pooled, sc.map, sm, sc.inspection, t_now);
      if (const auto sel = select_nearest(regions, rs.believed)) {
        offered = region_to_priority_waypoint(*sel, rs.believed, sc.inspection.standoff);
      }
    }

    rs.current_wp = rs.wm.tick(rs.true_pose, t_now, offered);
    phase_cursor = r + 1;

    TickUpdate upd;
    upd.robot = r;
    upd.tick = tick;
    upd.believed_pose = rs.believed;
    upd.lidar_fp_pose = rs.believed;
    upd.camera_fp_pose = rs.believed;
    return upd;
  }

  void apply(const TickUpdate& upd) {
    if (upd.robot != applied_cursor || upd.robot >= phase_cursor) {
      throw std::logic_error("updates must be applied in robot index order");
    }
    if (upd.tick != tick) throw std::logic_error("update tick mismatch");
    auto& rs = robots[static_cast<size_t>(upd.robot)];
    const auto& spec = sc.robots[static_cast<size_t>(upd.robot)];

    apply_footprint(sm, upd.lidar_fp_pose, spec.lidar_fp, sc.map);
    apply_footprint(sm, upd.camera_fp_pose, spec.camera_fp, sc.map);

    std::vector<std::string> candidates;
    const auto detected = camera_detect(sc.map, sc.objects, rs.true_pose, spec.camera_fp,
                                        sc.detect_prob, rs.detect_rng, &candidates);
    for (const auto& id : candidates) ever_candidates.insert(id);

    std::string event = "none";
    for (const auto& id : detected) {
      for (size_t i = 0; i < results.size(); ++i) {
        auto& res = results[i];
        if (res.id != id || res.detected) continue;
        res.detected = true;
        res.detection_time = now();
        if (res.is_target) --targets_remaining;
        if (event == "none") event = "object_detected:" + id;
      }
    }
    if (event == "none" && rs.wm.accepted_this_tick()) event = "priority_accepted";
    if (event == "none" && rs.wm.arrived_this_tick()) event = "waypoint_reached";

    if (log) {
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%d,%.3f,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%s,%s\n", tick,
                    now(), spec.name.c_str(), rs.true_pose.x, rs.true_pose.y, rs.true_pose.theta,
                    rs.believed.x, rs.believed.y, rs.believed.theta, wm_state_name(rs.wm.state()),
                    event.c_str());
      *log << buf;
    }
    applied_cursor = upd.robot + 1;
  }

  void end_tick() {
    const int n = static_cast<int>(robots.size());
    if (phase_cursor != n || applied_cursor != n) {
      throw std::logic_error("end_tick before all robots stepped and applied");
    }
    entropy_trace.push_back({now(), entropy(sm)});
    ++tick;
    phase_cursor = 0;
    applied_cursor = 0;

    if (targets_remaining == 0) {
      finished = true;
      return;
    }
    bool all_done = true;
    for (const auto& rs : robots) {
      if (!rs.wm.done()) {
        all_done = false;
        break;
      }
    }
    if (all_done || tick >= sc.max_ticks) finished = true;
  }

  TrialResult finish() const {
    TrialResult out;
    out.success = targets_remaining == 0;
    out.objects = results;
    if (!out.success) {
      // A target the camera never even saw is a path failure; a seen but
      // missed target is a detection failure.
      bool never_seen = false;
      for (const auto& res : results) {
        if (!res.is_target || res.detected) continue;
        if (ever_candidates.find(res.id) == ever_candidates.end()) never_seen = true;
      }
      out.failure_mode = never_seen ? FailureMode::kPathFailure : FailureMode::kDetectionFailure;
    }
    for (const auto& rs : robots) {
      out.executed_length.push_back(rs.executed);
      out.priority_count.push_back(rs.wm.priorities_accepted());
    }
    out.entropy_trace = entropy_trace;
    out.ticks = tick;
    return out;
  }
};

TrialSim::TrialSim(const Scenario& sc, std::ostream* trajectory_log, const CoveragePlan* plan)
    : impl_(std::make_unique<Impl>(sc, trajectory_log, plan)) {}

TrialSim::~TrialSim() = default;

const CoveragePlan& TrialSim::plan() const { return impl_->plan; }
int TrialSim::robot_count() const { return static_cast<int>(impl_->robots.size()); }
int TrialSim::current_tick() const { return impl_->tick; }
bool TrialSim::finished() const { return impl_->finished; }

TickUpdate TrialSim::step_robot_phase(int r) { return impl_->step_robot(r); }
void TrialSim::apply_phase(const TickUpdate& upd) { impl_->apply(upd); }
void TrialSim::end_tick() { impl_->end_tick(); }

void TrialSim::step_tick() {
  for (int r = 0; r < robot_count(); ++r) {
    apply_phase(step_robot_phase(r));
  }
  end_tick();
}

TrialResult TrialSim::finish() { return impl_->finish(); }

bool trial_results_equal(const TrialResult& a, const TrialResult& b) {
  if (a.success != b.success || a.failure_mode != b.failure_mode || a.ticks != b.ticks) {
    return false;
  }
  if (a.objects.size() != b.objects.size()) return false;
  for (size_t i = 0; i < a.objects.size(); ++i) {
    const auto& x = a.objects[i];
    const auto& y = b.objects[i];
    if (x.id != y.id || x.difficulty != y.difficulty || x.is_target != y.is_target ||
        x.detected != y.detected || x.detection_time != y.detection_time) {
      return false;
    }
  }
  return a.executed_length == b.executed_length && a.priority_count == b.priority_count &&
         a.entropy_trace == b.entropy_trace;
}

std::string trial_result_to_json(const TrialResult& res) {
  json j;
  j["success"] = res.success;
  j["failure_mode"] = failure_mode_name(res.failure_mode);
  j["ticks"] = res.ticks;
  j["objects"] = json::array();
  for (const auto& o : res.objects) {
    j["objects"].push_back({{"id", o.id},
                            {"difficulty", difficulty_name(o.difficulty)},
                            {"is_target", o.is_target},
                            {"detected", o.detected},
                            {"detection_time", o.detection_time}});
  }
  j["executed_length"] = res.executed_length;
  j["priority_count"] = res.priority_count;
  j["entropy_trace"] = json::array();
  for (const auto& [t, bits] : res.entropy_trace) {
    j["entropy_trace"].push_back({t, bits});
  }
  return j.dump();
}

TrialResult trial_result_from_json(const std::string& text) {
  const json j = json::parse(text);
  TrialResult res;
  res.success = j.at("success").get<bool>();
  const std::string failure = j.at("failure_mode").get<std::string>();
  if (failure == "none") {
    res.failure_mode = FailureMode::kNone;
  } else if (failure == "path_failure") {
    res.failure_mode = FailureMode::kPathFailure;
  } else if (failure == "detection_failure") {
    res.failure_mode = FailureMode::kDetectionFailure;
  } else {
    throw std::invalid_argument("unknown failure mode '" + failure + "'");
  }
  res.ticks = j.at("ticks").get<int>();
  for (const auto& jo : j.at("objects")) {
    ObjectResult o;
    o.id = jo.at("id").get<std::string>();
    o.difficulty = difficulty_from_name(jo.at("difficulty").get<std::string>());
    o.is_target = jo.at("is_target").get<bool>();
    o.detected = jo.at("detected").get<bool>();
    o.detection_time = jo.at("detection_time").get<double>();
    res.objects.push_back(o);
  }
  res.executed_length = j.at("executed_length").get<std::vector<double>>();
  res.priority_count = j.at("priority_count").get<std::vector<int>>();
  for (const auto& jt : j.at("entropy_trace")) {
    res.entropy_trace.emplace_back(jt.at(0).get<double>(), jt.at(1).get<double>());
  }
  return res;
}

TrialResult run_trial(const Scenario& sc) {
  TrialSim sim(sc);
  while (!sim.finished()) sim.step_tick();
  return sim.finish();
}

TrialResult run_trial(const Scenario& sc, const std::string& trajectory_path) {
  std::ofstream f(trajectory_path);
  if (!f) throw std::runtime_error("cannot write trajectory log: " + trajectory_path);
  TrialSim sim(sc, &f);
  while (!sim.finished()) sim.step_tick();
  return sim.finish();
}

TrialResult run_trial(const Scenario& sc, const std::string& trajectory_path,
                      const CoveragePlan& plan) {
  std::ofstream f(trajectory_path);
  if (!f) throw std::runtime_error("cannot write trajectory log: " + trajectory_path);
  TrialSim sim(sc, &f, &plan);
  while (!sim.finished()) sim.step_tick();
  return sim.finish();
}

}  // namespace live
