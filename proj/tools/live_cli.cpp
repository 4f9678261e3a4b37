#include <CLI11.hpp>

#include <live/live_c.h>

#include <cstdio>
#include <cstring>
#include <string>

// Exit codes: 0 success, 1 usage or unreadable input, 2 trial failure
// (planning, protocol or I/O after inputs were accepted).

namespace {

struct ScenarioHandle {
  live_scenario_t* sc = nullptr;
  ~ScenarioHandle() { live_scenario_free(sc); }
};

struct ResultHandle {
  live_result_t* res = nullptr;
  ~ResultHandle() { live_result_free(res); }
};

int load_scenario_or_die(const std::string& path, const std::string& mode, bool seed_set,
                         uint64_t seed, ScenarioHandle& h) {
  if (live_scenario_load(path.c_str(), &h.sc) != LIVE_OK) {
    std::fprintf(stderr, "live_cli: cannot load scenario '%s': %s\n", path.c_str(),
                 live_last_error());
    return 1;
  }
  if (!mode.empty() && live_scenario_set_mode(h.sc, mode.c_str()) != LIVE_OK) {
    std::fprintf(stderr, "live_cli: bad mode '%s': %s\n", mode.c_str(), live_last_error());
    return 1;
  }
  if (seed_set) live_scenario_set_seed(h.sc, seed);
  return 0;
}

void print_result(const live_scenario_t* sc, const live_result_t* res) {
  std::printf("success: %s\n", live_result_success(res) ? "yes" : "no");
  std::printf("failure_mode: %s\n", live_result_failure_mode(res));
  std::printf("ticks: %d\n", live_result_ticks(res));
  const int robots = live_result_robot_count(res);
  for (int r = 0; r < robots; ++r) {
    std::printf("robot %s: executed %.3f m, priority waypoints %d\n",
                live_scenario_robot_name(sc, r), live_result_executed_length(res, r),
                live_result_priority_count(res, r));
  }
  const int objects = live_result_object_count(res);
  for (int i = 0; i < objects; ++i) {
    if (live_result_object_detected(res, i)) {
      std::printf("object %s (%s): detected at %.1f s\n", live_result_object_id(res, i),
                  live_result_object_difficulty(res, i),
                  live_result_object_detection_time(res, i));
    } else {
      std::printf("object %s (%s): not detected\n", live_result_object_id(res, i),
                  live_result_object_difficulty(res, i));
    }
  }
  const int n = live_result_entropy_points(res);
  if (n > 0) {
    std::printf("entropy: %.3f -> %.3f bits (%d samples)\n", live_result_entropy_bits(res, 0),
                live_result_entropy_bits(res, n - 1), n);
  }
}

void print_port(int port, void*) {
  std::printf("listening on port %d\n", port);
  std::fflush(stdout);
}

int emit_result(const live_scenario_t* sc, const live_result_t* res,
                const std::string& json_path) {
  print_result(sc, res);
  if (!json_path.empty() && live_result_save_json(res, json_path.c_str()) != LIVE_OK) {
    std::fprintf(stderr, "live_cli: cannot write %s: %s\n", json_path.c_str(),
                 live_last_error());
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"live: multi-robot visual search simulation"};
  app.require_subcommand(1);
  app.footer("Set LIVE_LOG=info or LIVE_LOG=debug for progress on stderr.");

  std::string scenario_path, mode, out_path, traj_path, matrix_path, addr, robot;
  std::string result_json;
  uint64_t seed = 0;
  const auto is_mode = CLI::IsMember({"lidar", "visual", "live"});

  auto* gen = app.add_subcommand("gen", "write demo map, scenario and matrix files");
  gen->add_option("--out", out_path, "output directory")->required();

  auto* plan = app.add_subcommand("plan", "compute a coverage plan and report its stats");
  plan->add_option("--scenario", scenario_path, "scenario json")->required();
  plan->add_option("--mode", mode, "planner mode override")->check(is_mode);
  auto* plan_seed = plan->add_option("--seed", seed, "seed override");
  plan->add_option("--out", out_path, "write the plan to this file");

  auto* run = app.add_subcommand("run", "run one trial in-process");
  run->add_option("--scenario", scenario_path, "scenario json")->required();
  run->add_option("--mode", mode, "planner mode override")->check(is_mode);
  auto* run_seed = run->add_option("--seed", seed, "seed override");
  run->add_option("--traj", traj_path, "trajectory csv output");
  run->add_option("--result-json", result_json, "full result as json");

  auto* batch = app.add_subcommand("batch", "run an experiment matrix");
  batch->add_option("--matrix", matrix_path, "matrix json")->required();
  batch->add_option("--out", out_path, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "coordinate one networked trial");
  serve->add_option("--scenario", scenario_path, "scenario json")->required();
  serve->add_option("--listen", addr, "host:port to listen on (port 0 picks one)")
      ->required();
  serve->add_option("--mode", mode, "planner mode override")->check(is_mode);
  auto* serve_seed = serve->add_option("--seed", seed, "seed override");
  serve->add_option("--result-json", result_json, "full result as json");

  auto* client = app.add_subcommand("client", "drive one robot against a server");
  client->add_option("--scenario", scenario_path, "scenario json")->required();
  client->add_option("--robot", robot, "robot name from the scenario")->required();
  client->add_option("--connect", addr, "server host:port")->required();
  client->add_option("--mode", mode, "planner mode override")->check(is_mode);
  auto* client_seed = client->add_option("--seed", seed, "seed override");
  client->add_option("--result-json", result_json, "full result as json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (gen->parsed()) {
    if (live_write_demo_assets(out_path.c_str()) != LIVE_OK) {
      std::fprintf(stderr, "live_cli: gen failed: %s\n", live_last_error());
      return 2;
    }
    std::printf("wrote demo assets under %s\n", out_path.c_str());
    return 0;
  }

  if (batch->parsed()) {
    if (std::FILE* f = std::fopen(matrix_path.c_str(), "rb")) {
      std::fclose(f);
    } else {
      std::fprintf(stderr, "live_cli: cannot open matrix '%s'\n", matrix_path.c_str());
      return 1;
    }
    int trials = 0, errors = 0;
    const live_status st =
        live_run_batch(matrix_path.c_str(), out_path.c_str(), &trials, &errors);
    if (st != LIVE_OK) {
      std::fprintf(stderr, "live_cli: batch failed: %s\n", live_last_error());
      return st == LIVE_ERR_INVALID ? 1 : 2;
    }
    std::printf("ran %d trials (%d errors); results under %s\n", trials, errors,
                out_path.c_str());
    return errors == 0 ? 0 : 2;
  }

  ScenarioHandle sc;
  bool seed_set = false;
  if (plan->parsed()) seed_set = plan_seed->count() > 0;
  if (run->parsed()) seed_set = run_seed->count() > 0;
  if (serve->parsed()) seed_set = serve_seed->count() > 0;
  if (client->parsed()) seed_set = client_seed->count() > 0;
  if (const int rc = load_scenario_or_die(scenario_path, mode, seed_set, seed, sc)) return rc;

  if (plan->parsed()) {
    double covered = 0.0, length = 0.0;
    const char* file = out_path.empty() ? nullptr : out_path.c_str();
    if (live_plan(sc.sc, file, &covered, &length) != LIVE_OK) {
      std::fprintf(stderr, "live_cli: planning failed: %s\n", live_last_error());
      return 2;
    }
    std::printf("mode %s seed %llu: covered %.4f, planned length %.2f m\n",
                live_scenario_mode(sc.sc), (unsigned long long)live_scenario_seed(sc.sc),
                covered, length);
    if (file != nullptr) std::printf("plan written to %s\n", file);
    return 0;
  }

  if (run->parsed()) {
    ResultHandle res;
    const char* traj = traj_path.empty() ? nullptr : traj_path.c_str();
    if (live_run_trial(sc.sc, traj, &res.res) != LIVE_OK) {
      std::fprintf(stderr, "live_cli: trial failed: %s\n", live_last_error());
      return 2;
    }
    return emit_result(sc.sc, res.res, result_json);
  }

  if (serve->parsed()) {
    ResultHandle res;
    if (live_serve(sc.sc, addr.c_str(), print_port, nullptr, &res.res) != LIVE_OK) {
      std::fprintf(stderr, "live_cli: serve failed: %s\n", live_last_error());
      return 2;
    }
    return emit_result(sc.sc, res.res, result_json);
  }

  // client
  bool known = false;
  for (int r = 0; r < live_scenario_robot_count(sc.sc); ++r) {
    known = known || robot == live_scenario_robot_name(sc.sc, r);
  }
  if (!known) {
    std::fprintf(stderr, "live_cli: robot '%s' is not in the scenario\n", robot.c_str());
    return 1;
  }
  ResultHandle res;
  if (live_client(sc.sc, robot.c_str(), addr.c_str(), &res.res) != LIVE_OK) {
    std::fprintf(stderr, "live_cli: client failed: %s\n", live_last_error());
    return 2;
  }
  return emit_result(sc.sc, res.res, result_json);
}
