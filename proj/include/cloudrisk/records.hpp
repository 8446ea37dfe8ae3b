#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace cloudrisk {

// One labeled row of the threat database. The first thirteen fields follow
// the published schema; the rest are extra predictor features.
struct ThreatRecord {
  std::uint32_t victim_vm_id = 0;
  std::uint32_t server_id = 0;
  std::optional<std::uint32_t> attacker_vm_id;
  double vm_cpu = 0.0;
  double vm_bw = 0.0;
  double vm_mem = 0.0;
  double r_score = 0.0;
  double L = 0.0;
  double H = 0.0;
  double C = 0.0;
  double N = 0.0;
  int vm_status = 0;  // label: 1 = actual threat
  int interval = 0;   // negative during burn-in

  double w_p = 0.0;
  int owner_class = -1;
  int coresident_behavior = 0;
  int has_malicious_coresident = 0;
  double cascade_exposure = 0.0;
  int coresident_count = 0;
  int threat_indicator = 0;  // allocation indicator against flagged users

  friend bool operator==(const ThreatRecord&, const ThreatRecord&) = default;
};

// Names and values of the predictor inputs drawn from a record.
const std::vector<std::string>& threat_feature_names();
std::vector<double> threat_features(const ThreatRecord& r);

struct IntervalReport {
  int interval = 0;
  int minutes = 0;  // elapsed at the end of the interval
  int active_vms = 0;
  int deferred_vms = 0;
  long at = 0;  // actual threats
  long pt = 0;  // predicted threats
  long ut = 0;  // unpredicted threats
  long true_positives = 0;
  long false_positives = 0;
  long true_negatives = 0;
  bool metrics_defined = false;
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double mse = 0.0;
  double mae = 0.0;
  int migrations = 0;
  int quarantined = 0;
  int woken_servers = 0;
  double migration_cost = 0.0;
  double ru_dc = 0.0;
  double pw_dc = 0.0;
  int active_servers = 0;
  int nontrusted_users = 0;
  int unknown_users = 0;
  bool model_retrained = false;

  friend bool operator==(const IntervalReport&, const IntervalReport&) = default;
};

inline constexpr int kReportSchemaVersion = 1;

nlohmann::ordered_json report_to_json(const IntervalReport& r);
IntervalReport report_from_json(const nlohmann::json& j);

}  // namespace cloudrisk
