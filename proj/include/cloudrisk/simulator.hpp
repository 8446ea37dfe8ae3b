#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cloudrisk/behavior.hpp"
#include "cloudrisk/cluster.hpp"
#include "cloudrisk/forecaster.hpp"
#include "cloudrisk/forest.hpp"
#include "cloudrisk/gbt.hpp"
#include "cloudrisk/metrics.hpp"
#include "cloudrisk/migration.hpp"
#include "cloudrisk/placement.hpp"
#include "cloudrisk/records.hpp"
#include "cloudrisk/risk.hpp"

namespace cloudrisk {

struct SimConfig {
  ClusterConfig cluster;
  Thresholds thresholds;
  RiskOptions risk;
  GbtParams gbt;
  RfParams forest;
  ForecasterConfig forecaster;
  PolicyKind policy = PolicyKind::kFfd;
  Topology topology;

  int intervals = 100;
  int interval_minutes = 5;
  int history = 24;   // trace samples before the first simulated interval
  int burn_in = 20;   // intervals that only build the threat database
  bool predictor = true;  // false: no prediction and no migration (W-TP)
  bool use_forest = true;  // classify users with the forest, else the rule
  int retrain_every = 10;
  std::size_t retrain_window = 2000;
  int forecaster_retrain_every = 20;
  double train_ratio = 0.8;
  std::size_t rfe_keep = 8;
  double transition_energy = kTransitionEnergy;
};

// State handed to an observer once per simulated interval.
struct IntervalSnapshot {
  int interval = 0;  // negative during burn-in
  bool live = false;
  const ClusterState* cluster = nullptr;
  PlacementMap placement_before;  // after arrivals, before migration
  PlacementMap placement_after;   // after migration
  VmScores l_of;
  ServerScores h_of;
  VmMask malicious;  // ground truth
  VmMask flagged;    // VMs of users currently classified non-trusted
  std::vector<bool> forecast_active;  // per VM
  std::vector<VmId> scored;           // VMs with a risk vector this interval
  std::vector<ThreatRecord> records;
  std::vector<double> probabilities;  // aligned with `scored` when predicting
  std::vector<AccessEvent> events;    // recorded this interval
  MigrationPlan plan;
};

using SimObserver = std::function<void(const IntervalSnapshot&)>;

struct BootstrapInfo {
  std::vector<std::size_t> selected_features;  // indices into the full list
  std::vector<std::string> selected_names;
  std::size_t train_rows = 0;
  std::size_t test_rows = 0;
  std::optional<MetricBundle> test_metrics;
};

struct SimResult {
  std::vector<IntervalReport> reports;      // live intervals only
  std::vector<ThreatRecord> threat_db;      // every row, burn-in included
  std::vector<UserRecord> users;            // final classification
  MaliciousLedger ledger;
  std::optional<GbtModel> model;
  std::optional<BootstrapInfo> bootstrap;
  bool truncated = false;
};

// Seeds the threat database before burn-in, e.g. from an ingested file.
struct SimInputs {
  std::vector<UtilizationSeries> traces;  // traces[i] drives VM i
  std::vector<ThreatRecord> initial_db;
};

// Runs burn-in followed by `config.intervals` live intervals.
SimResult run(const SimConfig& config, const SimInputs& inputs,
              const SimObserver& observer = {});

// Actual threats among `scored` with the access events they produce.
struct GroundTruth {
  std::vector<int> labels;  // aligned with `scored`
  std::vector<std::optional<VmId>> attackers;
  std::vector<AccessEvent> events;  // de-duplicated
};

GroundTruth generate_threats(const std::vector<VmId>& scored,
                             const ClusterState& cluster,
                             const PlacementMap& placement,
                             const VmScores& l_of, const ServerScores& h_of,
                             const Thresholds& thresholds,
                             const VmMask& malicious, int max_chain,
                             int interval);

}  // namespace cloudrisk
