#include "cloudrisk/experiment.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <tuple>
#include <thread>

#include "cloudrisk/csv.hpp"
#include "cloudrisk/errors.hpp"
#include "cloudrisk/trace_io.hpp"

namespace cloudrisk {

namespace fs = std::filesystem;

std::string CellSpec::id() const {
  return std::string(to_string(policy)) + "_m" + format_double(malicious_fraction) +
         "_s" + std::to_string(seed) + (predictor ? "_tp" : "_wtp");
}

std::vector<CellSpec> expand(const ExperimentPlan& plan) {
  validate(plan);
  std::vector<bool> toggles;
  if (plan.predictor != PredictorToggle::kOn) toggles.push_back(false);
  if (plan.predictor != PredictorToggle::kOff) toggles.push_back(true);
  std::vector<CellSpec> cells;
  for (PolicyKind p : plan.policies) {
    for (double f : plan.malicious_fractions) {
      for (std::uint64_t s : plan.seeds) {
        for (bool t : toggles) cells.push_back({p, f, s, t});
      }
    }
  }
  return cells;
}

SimConfig cell_config(const ExperimentConfig& config, const CellSpec& cell) {
  SimConfig s = config.sim;
  s.policy = cell.policy;
  s.cluster.malicious_fraction = cell.malicious_fraction;
  s.cluster.seed = cell.seed;
  s.forecaster.seed = cell.seed;
  s.predictor = cell.predictor;
  s.intervals = config.plan.intervals;
  return s;
}

std::vector<UtilizationSeries> cell_traces(const ExperimentConfig& config,
                                           const CellSpec& cell) {
  const SimConfig s = cell_config(config, cell);
  if (config.workload.trace_path) {
    return ingest(*config.workload.trace_path, config.workload.mapping).series;
  }
  SynthesisSpec spec;
  spec.vm_count = 0;
  for (const auto& [type, count] : s.cluster.vm_counts) {
    spec.vm_count += static_cast<std::size_t>(count);
  }
  spec.samples = static_cast<std::size_t>(s.history + s.burn_in + s.intervals);
  spec.mix = config.workload.mix;
  spec.malicious_fraction = cell.malicious_fraction;
  spec.mean_on = config.workload.mean_on;
  spec.mean_off = config.workload.mean_off;
  spec.seed = cell.seed;
  return synthesize_traces(spec);
}

SimResult run_cell(const ExperimentConfig& config, const CellSpec& cell,
                   const SimObserver& observer) {
  return run(cell_config(config, cell), SimInputs{cell_traces(config, cell), {}},
             observer);
}

CellSummary summarize(const std::vector<IntervalReport>& reports) {
  CellSummary c;
  int predicted = 0;
  for (const auto& r : reports) {
    ++c.intervals;
    c.at += r.at;
    c.ru_dc += r.ru_dc;
    c.pw_dc += r.pw_dc;
    c.active_servers += r.active_servers;
    c.migrations += r.migrations;
    c.migration_cost += r.migration_cost;
    if (!r.metrics_defined) continue;
    ++predicted;
    c.pt += r.pt;
    c.tp += r.true_positives;
    c.fp += r.false_positives;
    c.tn += r.true_negatives;
    c.fn += r.at - r.true_positives;
    c.mse += r.mse;
    c.mae += r.mae;
  }
  if (c.intervals > 0) {
    c.ru_dc /= c.intervals;
    c.pw_dc /= c.intervals;
    c.active_servers /= c.intervals;
  }
  if (predicted > 0) {
    c.metrics_defined = true;
    c.mse /= predicted;
    c.mae /= predicted;
    const double total = static_cast<double>(c.tp + c.fp + c.tn + c.fn);
    c.accuracy = total > 0 ? static_cast<double>(c.tp + c.tn) / total : 1.0;
    c.precision = c.pt > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.pt) : 1.0;
    const long actual = c.tp + c.fn;
    c.recall = actual > 0 ? static_cast<double>(c.tp) / static_cast<double>(actual) : 1.0;
    c.f1 = c.precision + c.recall > 0
               ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
               : 0.0;
  }
  return c;
}

bool ExperimentOutcome::all_completed() const {
  return std::all_of(cells.begin(), cells.end(),
                     [](const CellOutcome& c) { return c.completed; });
}

std::string default_output_dir() {
  const char* env = std::getenv("CLOUDRISK_OUT");
  return env && *env ? std::string(env) : std::string("out");
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

CellOutcome execute(const ExperimentConfig& config, const CellSpec& cell,
                    const fs::path& out_dir) {
  CellOutcome o;
  o.cell = cell;
  try {
    SimResult r = run_cell(config, cell);
    const fs::path dir = out_dir / "cells" / cell.id();
    fs::create_directories(dir);
    save_reports((dir / "reports.jsonl").string(), r.reports);
    save_threat_db((dir / "threats.csv").string(), r.threat_db);
    save_user_db((dir / "users.csv").string(), (dir / "access_log.csv").string(),
                 r.users);
    if (r.model) save_gbt(*r.model, (dir / "model.json").string());
    o.reports = std::move(r.reports);
    o.truncated = r.truncated;
    o.completed = true;
  } catch (const std::exception& e) {
    o.error = e.what();
    spdlog::error("cell {} failed: {}", cell.id(), e.what());
  }
  return o;
}

std::string opt(bool defined, double v) { return defined ? format_double(v) : ""; }

void write_performance(const fs::path& path, const std::vector<CellOutcome>& cells) {
  auto out = open_out(path);
  write_csv_row(out, {"cell", "policy", "malicious_fraction", "seed", "predictor",
                      "intervals", "AT", "PT", "TP", "FP", "TN", "FN", "accuracy",
                      "precision", "recall", "f1", "mse", "mae"});
  for (const auto& c : cells) {
    if (!c.completed) continue;
    const CellSummary s = summarize(c.reports);
    const bool d = s.metrics_defined;
    write_csv_row(out, {c.cell.id(), to_string(c.cell.policy),
                        format_double(c.cell.malicious_fraction),
                        std::to_string(c.cell.seed), c.cell.predictor ? "1" : "0",
                        std::to_string(s.intervals), std::to_string(s.at),
                        std::to_string(s.pt), std::to_string(s.tp),
                        std::to_string(s.fp), std::to_string(s.tn),
                        std::to_string(s.fn), opt(d, s.accuracy),
                        opt(d, s.precision), opt(d, s.recall), opt(d, s.f1),
                        opt(d, s.mse), opt(d, s.mae)});
  }
}

void write_load(const fs::path& path, const std::vector<CellOutcome>& cells) {
  auto out = open_out(path);
  write_csv_row(out, {"cell", "policy", "malicious_fraction", "seed", "predictor",
                      "ru_dc", "pw_dc", "active_servers", "migrations",
                      "migration_cost"});
  for (const auto& c : cells) {
    if (!c.completed) continue;
    const CellSummary s = summarize(c.reports);
    write_csv_row(out, {c.cell.id(), to_string(c.cell.policy),
                        format_double(c.cell.malicious_fraction),
                        std::to_string(c.cell.seed), c.cell.predictor ? "1" : "0",
                        format_double(s.ru_dc), format_double(s.pw_dc),
                        format_double(s.active_servers), std::to_string(s.migrations),
                        format_double(s.migration_cost)});
  }
}

void write_timeseries(const fs::path& threats_path, const fs::path& load_path,
                      const std::vector<CellOutcome>& cells) {
  auto t = open_out(threats_path);
  auto l = open_out(load_path);
  write_csv_row(t, {"cell", "interval", "minutes", "AT", "PT", "UT"});
  write_csv_row(l, {"cell", "interval", "minutes", "ru_dc", "pw_dc",
                    "active_servers"});
  for (const auto& c : cells) {
    if (!c.completed) continue;
    for (const auto& r : c.reports) {
      const std::string id = c.cell.id();
      write_csv_row(t, {id, std::to_string(r.interval), std::to_string(r.minutes),
                        std::to_string(r.at), std::to_string(r.pt),
                        std::to_string(r.ut)});
      write_csv_row(l, {id, std::to_string(r.interval), std::to_string(r.minutes),
                        format_double(r.ru_dc), format_double(r.pw_dc),
                        std::to_string(r.active_servers)});
    }
  }
}

// AT per 100-minute window for each (policy, fraction, seed), with and without
// the predictor, plus totals over all seeds.
void write_summary(const fs::path& path, const ExperimentConfig& config,
                   const std::vector<CellOutcome>& cells) {
  const int per_window = std::max(1, 100 / config.sim.interval_minutes);
  using Key = std::tuple<std::size_t, double, std::string>;  // policy, fraction, seed
  struct Counts {
    std::map<int, long> at[2];
    bool present[2] = {false, false};
  };
  std::map<Key, Counts> table;
  auto add = [&](const Key& key, const CellOutcome& c) {
    Counts& k = table[key];
    const int side = c.cell.predictor ? 1 : 0;
    k.present[side] = true;
    for (const auto& r : c.reports) {
      k.at[side][r.interval / per_window] += r.at;
      k.at[side][-1] += r.at;
    }
  };
  for (const auto& c : cells) {
    if (!c.completed) continue;
    const auto p = static_cast<std::size_t>(c.cell.policy);
    add({p, c.cell.malicious_fraction, std::to_string(c.cell.seed)}, c);
    add({p, c.cell.malicious_fraction, "all"}, c);
  }

  auto out = open_out(path);
  write_csv_row(out, {"policy", "malicious_fraction", "seed", "window",
                      "minutes_from", "minutes_to", "AT_without", "AT_with",
                      "reduction"});
  const int minutes = per_window * config.sim.interval_minutes;
  for (const auto& [key, k] : table) {
    std::set<int> windows;
    for (int side = 0; side < 2; ++side) {
      for (const auto& [w, n] : k.at[side]) windows.insert(w);
    }
    std::vector<int> order(windows.begin(), windows.end());
    std::rotate(order.begin(), std::find(order.begin(), order.end(), 0), order.end());
    for (int w : order) {
      auto count = [&](int side) -> std::string {
        if (!k.present[side]) return "";
        const auto it = k.at[side].find(w);
        return std::to_string(it == k.at[side].end() ? 0 : it->second);
      };
      std::string reduction;
      if (k.present[0] && k.present[1]) {
        const auto without = k.at[0].count(w) ? k.at[0].at(w) : 0;
        const auto with = k.at[1].count(w) ? k.at[1].at(w) : 0;
        if (without > 0) {
          reduction = format_double(1.0 - static_cast<double>(with) /
                                              static_cast<double>(without));
        }
      }
      const bool all = w < 0;
      write_csv_row(out, {to_string(static_cast<PolicyKind>(std::get<0>(key))),
                          format_double(std::get<1>(key)), std::get<2>(key),
                          all ? "all" : std::to_string(w + 1),
                          all ? "0" : std::to_string(w * minutes),
                          all ? std::to_string(config.plan.intervals *
                                               config.sim.interval_minutes)
                              : std::to_string((w + 1) * minutes),
                          count(0), count(1), reduction});
    }
  }
}

void write_manifest(const fs::path& path, const ExperimentConfig& config,
                    const std::vector<CellOutcome>& cells) {
  nlohmann::ordered_json m;
  m["tool"] = "cloudrisk";
  m["manifest_version"] = 1;
  m["scenario"] = config.plan.scenario;
  nlohmann::ordered_json plan;
  std::vector<std::string> policies;
  for (auto p : config.plan.policies) policies.emplace_back(to_string(p));
  plan["policies"] = policies;
  plan["malicious"] = config.plan.malicious_fractions;
  plan["intervals"] = config.plan.intervals;
  plan["seeds"] = config.plan.seeds;
  plan["predictor"] = to_string(config.plan.predictor);
  m["plan"] = plan;
  m["workload"] = config.workload.trace_path ? *config.workload.trace_path
                                             : std::string("synthetic");
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  std::size_t done = 0;
  for (const auto& c : cells) {
    nlohmann::ordered_json e;
    e["id"] = c.cell.id();
    e["policy"] = to_string(c.cell.policy);
    e["malicious_fraction"] = c.cell.malicious_fraction;
    e["seed"] = c.cell.seed;
    e["predictor"] = c.cell.predictor;
    e["status"] = c.completed ? "completed" : "failed";
    if (c.completed) {
      ++done;
      e["intervals"] = c.reports.size();
      e["truncated"] = c.truncated;
      e["reports"] = "cells/" + c.cell.id() + "/reports.jsonl";
      e["threats"] = "cells/" + c.cell.id() + "/threats.csv";
    } else {
      e["error"] = c.error;
    }
    list.push_back(e);
  }
  m["cells"] = list;
  m["completed"] = done;
  m["failed"] = cells.size() - done;
  m["files"] = {"summary.csv", "performance.csv", "load_metrics.csv",
                "threat_timeseries.csv", "load_timeseries.csv"};
  auto out = open_out(path);
  out << m.dump(2) << '\n';
}

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& config,
                                 const std::string& out_dir, int jobs) {
  const std::vector<CellSpec> cells = expand(config.plan);
  const fs::path root(out_dir);
  fs::create_directories(root);

  ExperimentOutcome outcome;
  outcome.cells.resize(cells.size());
  const auto workers = static_cast<std::size_t>(std::clamp(jobs, 1, 64));
  if (workers == 1 || cells.size() < 2) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      spdlog::info("cell {}/{}: {}", i + 1, cells.size(), cells[i].id());
      outcome.cells[i] = execute(config, cells[i], root);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, cells.size()); ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
          outcome.cells[i] = execute(config, cells[i], root);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  write_summary(root / "summary.csv", config, outcome.cells);
  write_performance(root / "performance.csv", outcome.cells);
  write_load(root / "load_metrics.csv", outcome.cells);
  write_timeseries(root / "threat_timeseries.csv", root / "load_timeseries.csv",
                   outcome.cells);
  write_manifest(root / "manifest.json", config, outcome.cells);
  return outcome;
}

}  // namespace cloudrisk
