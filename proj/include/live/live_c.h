#ifndef LIVE_C_H
#define LIVE_C_H

/* C interface to the live simulation library. All functions returning
 * live_status report failure details through live_last_error(). Objects
 * returned through ** out-parameters are owned by the caller and released
 * with the matching _free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum live_status {
  LIVE_OK = 0,
  LIVE_ERR_IO = 1,       /* file or socket I/O failed */
  LIVE_ERR_INVALID = 2,  /* bad argument or malformed input */
  LIVE_ERR_PLAN = 3,     /* coverage planning failed */
  LIVE_ERR_PROTOCOL = 4, /* wire-protocol violation or peer divergence */
  LIVE_ERR_INTERNAL = 5
} live_status;

typedef struct live_scenario_s live_scenario_t;
typedef struct live_result_s live_result_t;

const char* live_version(void);

/* Message for the most recent failure on this thread; empty string when the
 * last call succeeded. The pointer stays valid until the next library call
 * from the same thread. */
const char* live_last_error(void);

/* ---- scenarios ---- */

live_status live_scenario_load(const char* path, live_scenario_t** out);
live_status live_scenario_parse(const char* json_text, const char* base_dir,
                                live_scenario_t** out);
void live_scenario_free(live_scenario_t* sc);

/* mode is one of "lidar", "visual", "live". */
live_status live_scenario_set_mode(live_scenario_t* sc, const char* mode);
live_status live_scenario_set_seed(live_scenario_t* sc, uint64_t seed);
const char* live_scenario_mode(const live_scenario_t* sc);
uint64_t live_scenario_seed(const live_scenario_t* sc);
int live_scenario_robot_count(const live_scenario_t* sc);
const char* live_scenario_robot_name(const live_scenario_t* sc, int robot);

/* ---- planning and single trials ---- */

/* Computes the coverage plan for the scenario's mode. Writes it to
 * plan_path unless that is NULL; covered_fraction / total_length are also
 * optional. */
live_status live_plan(const live_scenario_t* sc, const char* plan_path,
                      double* covered_fraction, double* total_length);

/* Runs one trial in-process. trajectory_csv may be NULL. */
live_status live_run_trial(const live_scenario_t* sc, const char* trajectory_csv,
                           live_result_t** out);

/* ---- networked trials (loopback coordination server) ---- */

/* Serves one trial at listen_addr ("host:port", port 0 picks one) and
 * blocks until every robot finishes. on_listening, if non-NULL, is invoked
 * with the bound port before the first accept. */
live_status live_serve(const live_scenario_t* sc, const char* listen_addr,
                       void (*on_listening)(int port, void* user), void* user,
                       live_result_t** out);

/* Drives the named robot against a server at connect_addr and blocks until
 * the trial ends. The scenario must be the server's scenario. */
live_status live_client(const live_scenario_t* sc, const char* robot_name,
                        const char* connect_addr, live_result_t** out);

/* ---- batch harness ---- */

/* Runs the experiment matrix (JSON file), writing results.csv, report.csv
 * and per-trial trajectories under out_dir. trials/errors are optional
 * counters. */
live_status live_run_batch(const char* matrix_path, const char* out_dir, int* trials,
                           int* errors);

/* Writes apartment.map, scenario.json and matrix.json into dir. */
live_status live_write_demo_assets(const char* dir);

/* ---- results ---- */

void live_result_free(live_result_t* res);

/* Writes the result as JSON; doubles are reproduced exactly on re-parse. */
live_status live_result_save_json(const live_result_t* res, const char* path);

int live_result_success(const live_result_t* res); /* 0 or 1 */
const char* live_result_failure_mode(const live_result_t* res);
int live_result_ticks(const live_result_t* res);
int live_result_robot_count(const live_result_t* res);
double live_result_executed_length(const live_result_t* res, int robot);
int live_result_priority_count(const live_result_t* res, int robot);
int live_result_object_count(const live_result_t* res);
const char* live_result_object_id(const live_result_t* res, int i);
const char* live_result_object_difficulty(const live_result_t* res, int i);
int live_result_object_detected(const live_result_t* res, int i);
double live_result_object_detection_time(const live_result_t* res, int i);
int live_result_entropy_points(const live_result_t* res);
double live_result_entropy_time(const live_result_t* res, int i);
double live_result_entropy_bits(const live_result_t* res, int i);

#ifdef __cplusplus
}
#endif

#endif /* LIVE_C_H */
