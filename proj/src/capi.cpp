#include "live/live_c.h"

#include <json.hpp>

#include <cstring>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "live/harness.hpp"
#include "live/net.hpp"
#include "live/planner.hpp"
#include "live/protocol.hpp"
#include "live/simulator.hpp"
#include "live/worldgen.hpp"

struct live_scenario_s {
  live::Scenario sc;
};

struct live_result_s {
  live::TrialResult res;
};

namespace {

thread_local std::string g_error;

void set_error(std::string msg) { g_error = std::move(msg); }

live_status classify(const std::exception& e) {
  if (dynamic_cast<const live::ProtocolError*>(&e)) return LIVE_ERR_PROTOCOL;
  if (dynamic_cast<const live::PlanError*>(&e)) return LIVE_ERR_PLAN;
  if (dynamic_cast<const std::invalid_argument*>(&e)) return LIVE_ERR_INVALID;
  if (dynamic_cast<const nlohmann::json::exception*>(&e)) return LIVE_ERR_INVALID;
  if (dynamic_cast<const std::runtime_error*>(&e)) return LIVE_ERR_IO;
  return LIVE_ERR_INTERNAL;
}

template <typename Fn>
live_status wrap(Fn&& fn) {
  g_error.clear();
  try {
    fn();
    return LIVE_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return classify(e);
  } catch (...) {
    set_error("unknown error");
    return LIVE_ERR_INTERNAL;
  }
}

live_status require(bool ok, const char* what) {
  if (ok) return LIVE_OK;
  set_error(std::string("invalid argument: ") + what);
  return LIVE_ERR_INVALID;
}

const live::ObjectResult* object_at(const live_result_t* res, int i) {
  if (res == nullptr || i < 0 || size_t(i) >= res->res.objects.size()) return nullptr;
  return &res->res.objects[size_t(i)];
}

bool robot_in_range(const live_result_t* res, int r) {
  return res != nullptr && r >= 0 && size_t(r) < res->res.executed_length.size();
}

}  // namespace

extern "C" {

const char* live_version(void) { return "0.1.0"; }

const char* live_last_error(void) { return g_error.c_str(); }

live_status live_scenario_load(const char* path, live_scenario_t** out) {
  if (auto s = require(path && out, "path and out must be non-null")) return s;
  return wrap([&] { *out = new live_scenario_s{live::load_scenario(path)}; });
}

live_status live_scenario_parse(const char* json_text, const char* base_dir,
                                live_scenario_t** out) {
  if (auto s = require(json_text && out, "json_text and out must be non-null")) return s;
  return wrap([&] {
    *out = new live_scenario_s{live::parse_scenario(json_text, base_dir ? base_dir : "")};
  });
}

void live_scenario_free(live_scenario_t* sc) { delete sc; }

live_status live_scenario_set_mode(live_scenario_t* sc, const char* mode) {
  if (auto s = require(sc && mode, "scenario and mode must be non-null")) return s;
  return wrap([&] { sc->sc.mode = live::planner_mode_from_name(mode); });
}

live_status live_scenario_set_seed(live_scenario_t* sc, uint64_t seed) {
  if (auto s = require(sc != nullptr, "scenario must be non-null")) return s;
  sc->sc.seed = seed;
  g_error.clear();
  return LIVE_OK;
}

const char* live_scenario_mode(const live_scenario_t* sc) {
  return sc ? live::planner_mode_name(sc->sc.mode) : "";
}

uint64_t live_scenario_seed(const live_scenario_t* sc) { return sc ? sc->sc.seed : 0; }

int live_scenario_robot_count(const live_scenario_t* sc) {
  return sc ? int(sc->sc.robots.size()) : 0;
}

const char* live_scenario_robot_name(const live_scenario_t* sc, int robot) {
  if (sc == nullptr || robot < 0 || size_t(robot) >= sc->sc.robots.size()) return "";
  return sc->sc.robots[size_t(robot)].name.c_str();
}

live_status live_plan(const live_scenario_t* sc, const char* plan_path,
                      double* covered_fraction, double* total_length) {
  if (auto s = require(sc != nullptr, "scenario must be non-null")) return s;
  return wrap([&] {
    const auto plan = live::plan_coverage(sc->sc.map, sc->sc.robots, sc->sc.mode,
                                          sc->sc.target_coverage, sc->sc.seed, sc->sc.planner);
    if (plan_path != nullptr) live::save_plan(plan, plan_path);
    if (covered_fraction != nullptr) *covered_fraction = plan.covered_fraction;
    if (total_length != nullptr)
      *total_length =
          std::accumulate(plan.planned_length.begin(), plan.planned_length.end(), 0.0);
  });
}

live_status live_run_trial(const live_scenario_t* sc, const char* trajectory_csv,
                           live_result_t** out) {
  if (auto s = require(sc && out, "scenario and out must be non-null")) return s;
  return wrap([&] {
    auto res = trajectory_csv ? live::run_trial(sc->sc, trajectory_csv)
                              : live::run_trial(sc->sc);
    *out = new live_result_s{std::move(res)};
  });
}

live_status live_serve(const live_scenario_t* sc, const char* listen_addr,
                       void (*on_listening)(int port, void* user), void* user,
                       live_result_t** out) {
  if (auto s = require(sc && listen_addr && out,
                       "scenario, listen_addr and out must be non-null"))
    return s;
  return wrap([&] {
    auto cb = on_listening != nullptr
                  ? std::function<void(int)>([=](int port) { on_listening(port, user); })
                  : std::function<void(int)>();
    *out = new live_result_s{live::serve_trial(sc->sc, listen_addr, cb)};
  });
}

live_status live_client(const live_scenario_t* sc, const char* robot_name,
                        const char* connect_addr, live_result_t** out) {
  if (auto s = require(sc && robot_name && connect_addr && out,
                       "scenario, robot_name, connect_addr and out must be non-null"))
    return s;
  return wrap(
      [&] { *out = new live_result_s{live::client_trial(sc->sc, robot_name, connect_addr)}; });
}

live_status live_run_batch(const char* matrix_path, const char* out_dir, int* trials,
                           int* errors) {
  if (auto s = require(matrix_path && out_dir, "matrix_path and out_dir must be non-null"))
    return s;
  return wrap([&] {
    const auto batch = live::run_batch(live::load_matrix(matrix_path), out_dir);
    if (trials != nullptr) *trials = int(batch.records.size());
    if (errors != nullptr) {
      int n = 0;
      for (const auto& rec : batch.records) n += rec.error.empty() ? 0 : 1;
      *errors = n;
    }
  });
}

live_status live_write_demo_assets(const char* dir) {
  if (auto s = require(dir != nullptr, "dir must be non-null")) return s;
  return wrap([&] { live::write_demo_assets(dir); });
}

void live_result_free(live_result_t* res) { delete res; }

live_status live_result_save_json(const live_result_t* res, const char* path) {
  if (auto s = require(res && path, "result and path must be non-null")) return s;
  return wrap([&] {
    std::ofstream f(path);
    if (!f) throw std::runtime_error(std::string("cannot write result json: ") + path);
    f << live::trial_result_to_json(res->res) << "\n";
  });
}

int live_result_success(const live_result_t* res) {
  return res != nullptr && res->res.success ? 1 : 0;
}

const char* live_result_failure_mode(const live_result_t* res) {
  return res ? live::failure_mode_name(res->res.failure_mode) : "";
}

int live_result_ticks(const live_result_t* res) { return res ? res->res.ticks : 0; }

int live_result_robot_count(const live_result_t* res) {
  return res ? int(res->res.executed_length.size()) : 0;
}

double live_result_executed_length(const live_result_t* res, int robot) {
  return robot_in_range(res, robot) ? res->res.executed_length[size_t(robot)] : -1.0;
}

int live_result_priority_count(const live_result_t* res, int robot) {
  return robot_in_range(res, robot) ? res->res.priority_count[size_t(robot)] : -1;
}

int live_result_object_count(const live_result_t* res) {
  return res ? int(res->res.objects.size()) : 0;
}

const char* live_result_object_id(const live_result_t* res, int i) {
  const auto* o = object_at(res, i);
  return o ? o->id.c_str() : "";
}

const char* live_result_object_difficulty(const live_result_t* res, int i) {
  const auto* o = object_at(res, i);
  return o ? live::difficulty_name(o->difficulty) : "";
}

int live_result_object_detected(const live_result_t* res, int i) {
  const auto* o = object_at(res, i);
  return o != nullptr && o->detected ? 1 : 0;
}

double live_result_object_detection_time(const live_result_t* res, int i) {
  const auto* o = object_at(res, i);
  return o ? o->detection_time : -1.0;
}

int live_result_entropy_points(const live_result_t* res) {
  return res ? int(res->res.entropy_trace.size()) : 0;
}

double live_result_entropy_time(const live_result_t* res, int i) {
  if (res == nullptr || i < 0 || size_t(i) >= res->res.entropy_trace.size()) return -1.0;
  return res->res.entropy_trace[size_t(i)].first;
}

double live_result_entropy_bits(const live_result_t* res, int i) {
  if (res == nullptr || i < 0 || size_t(i) >= res->res.entropy_trace.size()) return -1.0;
  return res->res.entropy_trace[size_t(i)].second;
}

}  // extern "C"
