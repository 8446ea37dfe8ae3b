#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cloudrisk/config.hpp"
#include "cloudrisk/csv.hpp"
#include "cloudrisk/errors.hpp"
#include "cloudrisk/experiment.hpp"
#include "cloudrisk/gbt.hpp"
#include "cloudrisk/trace_io.hpp"

namespace fs = std::filesystem;
using namespace cloudrisk;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> policies;
  std::vector<double> malicious;
  std::vector<std::uint64_t> seeds;
  int intervals = 0;
  bool no_predictor = false;
  std::string out;
  int jobs = 1;
};

ExperimentConfig resolve(const Common& c) {
  ExperimentConfig cfg =
      c.config_path.empty() ? standard_config() : load_config(c.config_path);
  if (!c.policies.empty()) {
    cfg.plan.policies.clear();
    for (const auto& p : c.policies) cfg.plan.policies.push_back(parse_policy(p));
  }
  if (!c.malicious.empty()) cfg.plan.malicious_fractions = c.malicious;
  if (!c.seeds.empty()) cfg.plan.seeds = c.seeds;
  if (c.intervals != 0) cfg.plan.intervals = c.intervals;
  if (c.no_predictor) cfg.plan.predictor = PredictorToggle::kOff;
  validate(cfg.plan);
  return cfg;
}

std::string output_dir(const Common& c, const ExperimentConfig& cfg) {
  if (!c.out.empty()) return c.out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  return default_output_dir();
}

int cmd_run(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const std::string out = output_dir(c, cfg);
  const ExperimentOutcome o = run_experiment(cfg, out, c.jobs);
  std::size_t done = 0;
  for (const auto& cell : o.cells) done += cell.completed ? 1 : 0;
  std::cout << "completed " << done << " of " << o.cells.size() << " cells; results in "
            << out << '\n';
  for (const auto& cell : o.cells) {
    if (!cell.completed) std::cerr << "failed: " << cell.cell.id() << ": " << cell.error << '\n';
  }
  return o.all_completed() ? 0 : 1;
}

int cmd_synth(const Common& c) {
  const ExperimentConfig cfg = resolve(c);
  const std::string out = output_dir(c, cfg);
  fs::create_directories(out);
  SynthesisSpec spec;
  spec.vm_count = 0;
  for (const auto& [type, count] : cfg.sim.cluster.vm_counts) {
    spec.vm_count += static_cast<std::size_t>(count);
  }
  spec.samples = static_cast<std::size_t>(cfg.sim.history + cfg.sim.burn_in +
                                          cfg.plan.intervals);
  spec.mix = cfg.workload.mix;
  spec.mean_on = cfg.workload.mean_on;
  spec.mean_off = cfg.workload.mean_off;
  spec.malicious_fraction = cfg.plan.malicious_fractions.front();
  spec.seed = cfg.plan.seeds.front();
  const Synthesis s = synthesize(spec, cfg.sim);
  const fs::path dir(out);
  save_traces((dir / "traces.csv").string(), s.traces);
  save_user_db((dir / "users.csv").string(), (dir / "access_log.csv").string(),
               s.users);
  save_threat_db((dir / "threats.csv").string(), s.threat_db);
  long positives = 0;
  for (const auto& r : s.threat_db) positives += r.vm_status;
  std::cout << "traces: " << s.traces.size() << " series x " << spec.samples
            << " samples\nusers: " << s.users.size() << "\nthreat rows: "
            << s.threat_db.size() << " (" << positives << " labelled 1)\nwritten to "
            << out << '\n';
  return 0;
}

int cmd_ingest(const std::string& input, const std::string& config_path,
               const std::string& out) {
  const ExperimentConfig cfg =
      config_path.empty() ? standard_config() : load_config(config_path);
  const IngestResult r = ingest(input, cfg.workload.mapping);
  for (const auto& w : r.rejected) {
    std::cerr << input << ":" << w.line << ": rejected: " << w.message << '\n';
  }
  for (const auto& w : r.warnings) {
    std::cerr << input << ":" << w.line << ": warning: " << w.message << '\n';
  }
  const std::size_t length = r.series.empty() ? 0 : r.series.front().length();
  std::cout << "rows: " << r.rows << "\nrejected: " << r.rejected.size()
            << "\nseries: " << r.series.size() << "\nlength: " << length
            << "\nclamped: " << r.clamped << "\nduplicates: " << r.duplicates
            << "\ngaps: " << r.gaps << '\n';
  if (!out.empty()) {
    save_traces(out, r.series);
    std::cout << "written to " << out << '\n';
  }
  if (!r.rejected.empty()) {
    std::cerr << "error: " << r.rejected.size() << " malformed rows; first bad line "
              << r.rejected.front().line << '\n';
    return 1;
  }
  return 0;
}

int inspect_model(const std::string& path) {
  const GbtModel m = load_gbt(path);
  std::cout << "trees: " << m.trees().size() << "\nfeatures: " << m.feature_names().size()
            << "\nbase_score: " << format_double(m.base_score())
            << "\nlearning_rate: " << format_double(m.params().learning_rate)
            << "\nfeature\ttotal_gain\n";
  const std::vector<double> gain = m.feature_importance();
  for (std::size_t f = 0; f < gain.size(); ++f) {
    std::cout << m.feature_names()[f] << '\t' << format_double(gain[f]) << '\n';
  }
  return 0;
}

int inspect_db(const std::string& path) {
  const auto rows = load_threat_db(path);
  long positives = 0;
  std::map<int, long> per_interval;
  for (const auto& r : rows) {
    positives += r.vm_status;
    ++per_interval[r.interval];
  }
  std::cout << "rows: " << rows.size() << "\nlabel_1: " << positives
            << "\nlabel_0: " << static_cast<long>(rows.size()) - positives
            << "\nintervals: " << per_interval.size() << '\n';
  if (!rows.empty()) {
    std::cout << "positive_share: "
              << format_double(static_cast<double>(positives) /
                               static_cast<double>(rows.size()))
              << '\n';
  }
  return 0;
}

int inspect_reports(const std::string& path) {
  const auto reports = load_reports(path);
  const CellSummary s = summarize(reports);
  std::cout << "intervals: " << s.intervals << "\nAT: " << s.at << "\nPT: " << s.pt
            << "\nTP: " << s.tp << '\n';
  if (s.metrics_defined) {
    std::cout << "accuracy: " << format_double(s.accuracy)
              << "\nprecision: " << format_double(s.precision)
              << "\nrecall: " << format_double(s.recall)
              << "\nf1: " << format_double(s.f1) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"Threat prediction and migration simulator for multi-tenant clouds"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "YAML experiment file")
        ->check(CLI::ExistingFile);
    sub->add_option("--policy", common.policies, "Placement policies (ffd,bf,rf,pssf)")
        ->delimiter(',');
    sub->add_option("--malicious", common.malicious, "Malicious user fractions")
        ->delimiter(',');
    sub->add_option("--intervals", common.intervals, "Live intervals")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", common.seeds, "Seeds")->delimiter(',');
    sub->add_option("--out", common.out, "Output directory");
  };

  auto* run = app.add_subcommand("run", "Run an experiment plan");
  add_common(run);
  run->add_flag("--no-predictor", common.no_predictor,
                "Only run cells without prediction and migration");
  run->add_option("--jobs", common.jobs, "Parallel cells")->check(CLI::PositiveNumber);

  auto* synth = app.add_subcommand("synth", "Synthesize traces and databases");
  add_common(synth);

  std::string ingest_in;
  std::string ingest_out;
  std::string ingest_config;
  auto* ing = app.add_subcommand("ingest", "Normalize a utilization trace CSV");
  ing->add_option("input", ingest_in, "Trace CSV")->required()->check(CLI::ExistingFile);
  ing->add_option("--config", ingest_config, "YAML file with workload.mapping")
      ->check(CLI::ExistingFile);
  ing->add_option("--out", ingest_out, "Write the gridded series here");

  std::string kind;
  std::string target;
  auto* insp = app.add_subcommand("inspect", "Summarize a model, threat DB or reports");
  insp->add_option("kind", kind, "model | db | reports")
      ->required()
      ->check(CLI::IsMember({"model", "db", "reports"}));
  insp->add_option("path", target, "File to inspect")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);
  if (verbose) spdlog::set_level(spdlog::level::info);

  try {
    if (*run) return cmd_run(common);
    if (*synth) return cmd_synth(common);
    if (*ing) return cmd_ingest(ingest_in, ingest_config, ingest_out);
    if (kind == "model") return inspect_model(target);
    if (kind == "db") return inspect_db(target);
    return inspect_reports(target);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
