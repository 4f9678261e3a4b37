#include "live/harness.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "live/worldgen.hpp"

namespace live {

using nlohmann::json;

namespace {

int ic_index_from_json(const json& v) {
  if (v.is_number_integer()) return v.get<int>();
  if (v.is_string()) {
    const auto& ics = apartment_ics();
    const std::string name = v.get<std::string>();
    for (size_t i = 0; i < ics.size(); ++i) {
      if (ics[i].name == name) return static_cast<int>(i);
    }
    throw std::invalid_argument("unknown initial condition '" + name + "'");
  }
  throw std::invalid_argument("matrix ics entries must be names or indices");
}

}  // namespace

ExperimentMatrix parse_matrix(const std::string& json_text) {
  const json j = json::parse(json_text);
  ExperimentMatrix m;
  for (const auto& v : j.at("modes")) {
    m.modes.push_back(planner_mode_from_name(v.get<std::string>()));
  }
  for (const auto& v : j.at("ics")) m.ics.push_back(ic_index_from_json(v));
  for (const auto& v : j.at("layouts")) m.layouts.push_back(v.get<int>());
  for (const auto& v : j.at("seeds")) m.seeds.push_back(v.get<uint64_t>());
  if (m.modes.empty() || m.ics.empty() || m.layouts.empty() || m.seeds.empty()) {
    throw std::invalid_argument("matrix needs non-empty modes, ics, layouts and seeds");
  }
  const int n_ics = static_cast<int>(apartment_ics().size());
  const int n_layouts = static_cast<int>(apartment_layouts().size());
  for (const int ic : m.ics) {
    if (ic < 0 || ic >= n_ics) throw std::invalid_argument("matrix ic index out of range");
  }
  for (const int l : m.layouts) {
    if (l < 0 || l >= n_layouts) throw std::invalid_argument("matrix layout index out of range");
  }
  if (j.contains("detect_prob")) m.detect_prob = j.at("detect_prob").get<double>();
  if (j.contains("max_ticks")) m.max_ticks = j.at("max_ticks").get<int>();
  if (j.contains("drift")) m.drift_enabled = j.at("drift").get<bool>();
  if (j.contains("target_coverage")) m.target_coverage = j.at("target_coverage").get<double>();
  if (j.contains("sample_budget")) m.sample_budget = j.at("sample_budget").get<int>();
  return m;
}

ExperimentMatrix load_matrix(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open matrix file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_matrix(ss.str());
}

namespace {

std::string csv_row(const TrialRecord& rec) {
  double len0 = 0.0, len1 = 0.0, len_total = 0.0;
  double t0 = -1.0, t1 = -1.0;
  int found = 0, prio = 0;
  int success = 0;
  std::string failure = "error";
  if (rec.error.empty()) {
    const auto& res = rec.result;
    success = res.success ? 1 : 0;
    failure = failure_mode_name(res.failure_mode);
    for (const auto& o : res.objects) {
      if (o.is_target && o.detected) ++found;
    }
    if (!res.executed_length.empty()) len0 = res.executed_length[0];
    if (res.executed_length.size() > 1) len1 = res.executed_length[1];
    for (const double l : res.executed_length) len_total += l;
    if (!res.objects.empty()) t0 = res.objects[0].detection_time;
    if (res.objects.size() > 1) t1 = res.objects[1].detection_time;
    for (const int p : res.priority_count) prio += p;
  }
  char buf[360];
  std::snprintf(buf, sizeof(buf), "%s,%s,%d,%llu,%d,%d,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%d\n",
                planner_mode_name(rec.mode), rec.ic.c_str(), rec.layout,
                static_cast<unsigned long long>(rec.seed), success, found, failure.c_str(), len0,
                len1, len_total, t0, t1, prio);
  return buf;
}

}  // namespace

void write_results_csv(const std::vector<TrialRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write results csv: " + path);
  f << "mode,ic,layout,seed,success,objects_found,failure_mode,len_robot0,len_robot1,"
       "len_total,detect_t0,detect_t1,priority_count\n";
  for (const auto& rec : records) f << csv_row(rec);
}

void write_report_csv(const std::vector<ModeReport>& report, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write report csv: " + path);
  f << "mode,trials,successes,success_rate,targets_found,targets_total,easy_found,easy_total,"
       "medium_found,medium_total,hard_found,hard_total,path_failures,detection_failures,"
       "errors,mean_len_total,std_len_total,mean_priority_count\n";
  for (const auto& r : report) {
    char buf[360];
    std::snprintf(buf, sizeof(buf),
                  "%s,%d,%d,%.6f,%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%d,%.6f,%.6f,%.6f\n",
                  planner_mode_name(r.mode), r.trials, r.successes, r.success_rate(),
                  r.targets_found, r.targets_total, r.easy_found, r.easy_total, r.medium_found,
                  r.medium_total, r.hard_found, r.hard_total, r.path_failures,
                  r.detection_failures, r.errors, r.mean_len_total, r.std_len_total,
                  r.mean_priority_count);
    f << buf;
  }
}

namespace {

std::vector<ModeReport> aggregate(const ExperimentMatrix& m,
                                  const std::vector<TrialRecord>& records) {
  std::vector<ModeReport> out;
  for (const auto mode : m.modes) {
    ModeReport rep;
    rep.mode = mode;
    double len_sum = 0.0, len_sq = 0.0, prio_sum = 0.0;
    int measured = 0;
    for (const auto& rec : records) {
      if (rec.mode != mode) continue;
      ++rep.trials;
      if (!rec.error.empty()) {
        ++rep.errors;
        continue;
      }
      const auto& res = rec.result;
      if (res.success) ++rep.successes;
      if (res.failure_mode == FailureMode::kPathFailure) ++rep.path_failures;
      if (res.failure_mode == FailureMode::kDetectionFailure) ++rep.detection_failures;
      for (const auto& o : res.objects) {
        if (!o.is_target) continue;
        ++rep.targets_total;
        if (o.detected) ++rep.targets_found;
        int* found = nullptr;
        int* total = nullptr;
        switch (o.difficulty) {
          case WorldObject::Difficulty::kEasy:
            found = &rep.easy_found;
            total = &rep.easy_total;
            break;
          case WorldObject::Difficulty::kMedium:
            found = &rep.medium_found;
            total = &rep.medium_total;
            break;
          case WorldObject::Difficulty::kHard:
            found = &rep.hard_found;
            total = &rep.hard_total;
            break;
        }
        ++*total;
        if (o.detected) ++*found;
      }
      double len = 0.0;
      for (const double l : res.executed_length) len += l;
      len_sum += len;
      len_sq += len * len;
      int prio = 0;
      for (const int p : res.priority_count) prio += p;
      prio_sum += prio;
      ++measured;
    }
    if (measured > 0) {
      rep.mean_len_total = len_sum / measured;
      const double var = len_sq / measured - rep.mean_len_total * rep.mean_len_total;
      rep.std_len_total = std::sqrt(std::max(0.0, var));
      rep.mean_priority_count = prio_sum / measured;
    }
    out.push_back(rep);
  }
  return out;
}

}  // namespace

BatchResult run_batch(const ExperimentMatrix& m, const std::string& out_dir) {
  namespace fs = std::filesystem;
  const fs::path base(out_dir);
  fs::create_directories(base / "traj");
  save_vector_map(apartment_map(0), (base / "apartment.map").string());

  // Plans depend on (mode, ic, seed) but not on the object layout.
  std::map<std::tuple<int, int, uint64_t>, CoveragePlan> plan_cache;

  BatchResult out;
  for (const auto mode : m.modes) {
    for (const int ic : m.ics) {
      for (const int layout : m.layouts) {
        for (const uint64_t seed : m.seeds) {
          TrialRecord rec;
          rec.mode = mode;
          rec.ic = apartment_ics()[static_cast<size_t>(ic)].name;
          rec.layout = layout;
          rec.seed = seed;

          Scenario sc = make_apartment_scenario(ic, layout, mode, seed);
          if (m.detect_prob) sc.detect_prob = *m.detect_prob;
          if (m.max_ticks) sc.max_ticks = *m.max_ticks;
          if (m.drift_enabled) sc.drift.enabled = *m.drift_enabled;
          if (m.target_coverage) sc.target_coverage = *m.target_coverage;
          if (m.sample_budget) sc.planner.sample_budget = *m.sample_budget;

          char traj_name[128];
          std::snprintf(traj_name, sizeof(traj_name), "%s_%s_L%d_s%llu.csv",
                        planner_mode_name(mode), rec.ic.c_str(), layout,
                        static_cast<unsigned long long>(seed));
          try {
            const auto key = std::make_tuple(static_cast<int>(mode), ic, seed);
            auto it = plan_cache.find(key);
            if (it == plan_cache.end()) {
              it = plan_cache
                       .emplace(key, plan_coverage(sc.map, sc.robots, sc.mode,
                                                   sc.target_coverage, sc.seed, sc.planner))
                       .first;
            }
            rec.result = run_trial(sc, (base / "traj" / traj_name).string(), it->second);
          } catch (const std::exception& e) {
            rec.error = e.what();
          }
          out.records.push_back(std::move(rec));
        }
      }
    }
  }

  out.report = aggregate(m, out.records);
  write_results_csv(out.records, (base / "results.csv").string());
  write_report_csv(out.report, (base / "report.csv").string());
  return out;
}

}  // namespace live
