#pragma once

#include <optional>
#include <string>
#include <vector>

#include "live/simulator.hpp"

namespace live {

// Batch description: the cross product of modes x ics x layouts x seeds on
// the canonical apartment, with optional knob overrides applied to every
// trial.
struct ExperimentMatrix {
  std::vector<PlannerMode> modes;
  std::vector<int> ics;      // indices into apartment_ics()
  std::vector<int> layouts;  // indices into apartment_layouts()
  std::vector<uint64_t> seeds;
  std::optional<double> detect_prob;
  std::optional<int> max_ticks;
  std::optional<bool> drift_enabled;
  std::optional<double> target_coverage;
  std::optional<int> sample_budget;
};

// JSON object with "modes", "ics" (names or indices), "layouts", "seeds"
// and any of the override keys ("detect_prob", "max_ticks", "drift",
// "target_coverage", "sample_budget").
ExperimentMatrix parse_matrix(const std::string& json_text);
ExperimentMatrix load_matrix(const std::string& path);

struct TrialRecord {
  PlannerMode mode = PlannerMode::kLidarCPP;
  std::string ic;
  int layout = 0;
  uint64_t seed = 0;
  TrialResult result;
  std::string error;  // non-empty when the trial could not run
};

struct ModeReport {
  PlannerMode mode = PlannerMode::kLidarCPP;
  int trials = 0;
  int successes = 0;
  int targets_found = 0;
  int targets_total = 0;
  int easy_found = 0, easy_total = 0;
  int medium_found = 0, medium_total = 0;
  int hard_found = 0, hard_total = 0;
  int path_failures = 0;
  int detection_failures = 0;
  int errors = 0;
  double mean_len_total = 0.0;
  double std_len_total = 0.0;
  double mean_priority_count = 0.0;

  double success_rate() const { return trials ? double(successes) / trials : 0.0; }
  double path_failure_rate() const { return trials ? double(path_failures) / trials : 0.0; }
};

struct BatchResult {
  std::vector<TrialRecord> records;       // modes -> ics -> layouts -> seeds order
  std::vector<ModeReport> report;         // matrix mode order
};

// Runs every trial in matrix order with per-(mode, ic, seed) plan reuse,
// writing results.csv, report.csv, apartment.map and per-trial trajectory
// logs under out_dir. Identical matrices yield byte-identical outputs.
BatchResult run_batch(const ExperimentMatrix& m, const std::string& out_dir);

void write_results_csv(const std::vector<TrialRecord>& records, const std::string& path);
void write_report_csv(const std::vector<ModeReport>& report, const std::string& path);

}  // namespace live
