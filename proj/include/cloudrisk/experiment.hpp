#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudrisk/config.hpp"
#include "cloudrisk/records.hpp"
#include "cloudrisk/simulator.hpp"

namespace cloudrisk {

struct CellSpec {
  PolicyKind policy = PolicyKind::kFfd;
  double malicious_fraction = 0.0;
  std::uint64_t seed = 1;
  bool predictor = true;

  // e.g. "ffd_m0.05_s1_tp"; "wtp" when the predictor is off.
  std::string id() const;
};

// Cells in plan order: policy, then fraction, then seed, then predictor off/on.
std::vector<CellSpec> expand(const ExperimentPlan& plan);

SimConfig cell_config(const ExperimentConfig& config, const CellSpec& cell);
// Ingested traces when the workload names a file, else synthetic ones sized
// for history + burn-in + intervals.
std::vector<UtilizationSeries> cell_traces(const ExperimentConfig& config,
                                           const CellSpec& cell);
SimResult run_cell(const ExperimentConfig& config, const CellSpec& cell,
                   const SimObserver& observer = {});

// Totals over the live intervals of one cell.
struct CellSummary {
  long at = 0, pt = 0, tp = 0, fp = 0, tn = 0, fn = 0;
  int intervals = 0;
  bool metrics_defined = false;  // at least one interval was predicted
  double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
  double mse = 0.0, mae = 0.0;  // means over predicted intervals
  double ru_dc = 0.0, pw_dc = 0.0, active_servers = 0.0;  // interval means
  long migrations = 0;
  double migration_cost = 0.0;
};

CellSummary summarize(const std::vector<IntervalReport>& reports);

struct CellOutcome {
  CellSpec cell;
  bool completed = false;
  bool truncated = false;
  std::string error;
  std::vector<IntervalReport> reports;
};

struct ExperimentOutcome {
  std::vector<CellOutcome> cells;
  bool all_completed() const;
};

// Runs every cell and writes, under `out_dir`: cells/<id>/{reports.jsonl,
// threats.csv, users.csv, access_log.csv[, model.json]}, summary.csv,
// performance.csv, load_metrics.csv, threat_timeseries.csv,
// load_timeseries.csv and manifest.json. A failing cell is recorded in the
// manifest and the remaining cells still run.
ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 const std::string& out_dir, int jobs = 1);

// CLOUDRISK_OUT when set, else "out".
std::string default_output_dir();

}  // namespace cloudrisk
