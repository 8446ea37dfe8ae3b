#include "cloudrisk/records.hpp"

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

const std::vector<std::string>& threat_feature_names() {
  static const std::vector<std::string> names = {
      "L",          "H",   "C",   "N",   "r_score",
      "vm_cpu",     "vm_mem", "vm_bw", "w_p", "owner_class",
      "coresident_behavior", "has_malicious_coresident", "cascade_exposure",
      "coresident_count", "threat_indicator"};
  return names;
}

std::vector<double> threat_features(const ThreatRecord& r) {
  return {r.L,
          r.H,
          r.C,
          r.N,
          r.r_score,
          r.vm_cpu,
          r.vm_mem,
          r.vm_bw,
          r.w_p,
          static_cast<double>(r.owner_class),
          static_cast<double>(r.coresident_behavior),
          static_cast<double>(r.has_malicious_coresident),
          r.cascade_exposure,
          static_cast<double>(r.coresident_count),
          static_cast<double>(r.threat_indicator)};
}

nlohmann::ordered_json report_to_json(const IntervalReport& r) {
  nlohmann::ordered_json j;
  j["schema_version"] = kReportSchemaVersion;
  j["interval"] = r.interval;
  j["minutes"] = r.minutes;
  j["active_vms"] = r.active_vms;
  j["deferred_vms"] = r.deferred_vms;
  j["AT"] = r.at;
  j["PT"] = r.pt;
  j["UT"] = r.ut;
  j["true_positives"] = r.true_positives;
  j["false_positives"] = r.false_positives;
  j["true_negatives"] = r.true_negatives;
  if (r.metrics_defined) {
    j["accuracy"] = r.accuracy;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    j["mse"] = r.mse;
    j["mae"] = r.mae;
  } else {
    for (const char* k : {"accuracy", "precision", "recall", "f1", "mse", "mae"}) {
      j[k] = nullptr;
    }
  }
  j["migrations"] = r.migrations;
  j["quarantined"] = r.quarantined;
  j["woken_servers"] = r.woken_servers;
  j["migration_cost"] = r.migration_cost;
  j["ru_dc"] = r.ru_dc;
  j["pw_dc"] = r.pw_dc;
  j["active_servers"] = r.active_servers;
  j["nontrusted_users"] = r.nontrusted_users;
  j["unknown_users"] = r.unknown_users;
  j["model_retrained"] = r.model_retrained;
  return j;
}

IntervalReport report_from_json(const nlohmann::json& j) {
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kReportSchemaVersion) {
      throw VersionError("interval report", version, kReportSchemaVersion);
    }
    IntervalReport r;
    r.interval = j.at("interval").get<int>();
    r.minutes = j.at("minutes").get<int>();
    r.active_vms = j.at("active_vms").get<int>();
    r.deferred_vms = j.at("deferred_vms").get<int>();
    r.at = j.at("AT").get<long>();
    r.pt = j.at("PT").get<long>();
    r.ut = j.at("UT").get<long>();
    r.true_positives = j.at("true_positives").get<long>();
    r.false_positives = j.at("false_positives").get<long>();
    r.true_negatives = j.at("true_negatives").get<long>();
    r.metrics_defined = !j.at("accuracy").is_null();
    if (r.metrics_defined) {
      r.accuracy = j.at("accuracy").get<double>();
      r.precision = j.at("precision").get<double>();
      r.recall = j.at("recall").get<double>();
      r.f1 = j.at("f1").get<double>();
      r.mse = j.at("mse").get<double>();
      r.mae = j.at("mae").get<double>();
    }
    r.migrations = j.at("migrations").get<int>();
    r.quarantined = j.at("quarantined").get<int>();
    r.woken_servers = j.at("woken_servers").get<int>();
    r.migration_cost = j.at("migration_cost").get<double>();
    r.ru_dc = j.at("ru_dc").get<double>();
    r.pw_dc = j.at("pw_dc").get<double>();
    r.active_servers = j.at("active_servers").get<int>();
    r.nontrusted_users = j.at("nontrusted_users").get<int>();
    r.unknown_users = j.at("unknown_users").get<int>();
    r.model_retrained = j.at("model_retrained").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed interval report: ") + e.what());
  }
}

}  // namespace cloudrisk
