#include "cloudrisk/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

PredictorToggle parse_toggle(const std::string& text) {
  std::string s = text;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "both") return PredictorToggle::kBoth;
  if (s == "on" || s == "true") return PredictorToggle::kOn;
  if (s == "off" || s == "false") return PredictorToggle::kOff;
  throw ConfigError("predictor toggle must be both, on or off (got '" + text + "')");
}

const char* to_string(PredictorToggle t) {
  switch (t) {
    case PredictorToggle::kBoth:
      return "both";
    case PredictorToggle::kOn:
      return "on";
    case PredictorToggle::kOff:
      return "off";
  }
  return "?";
}

void validate(const ExperimentPlan& plan) {
  if (plan.policies.empty() || plan.malicious_fractions.empty() ||
      plan.seeds.empty()) {
    throw ConfigError("plan needs at least one policy, fraction and seed");
  }
  if (plan.intervals < 1) throw ConfigError("plan intervals must be at least 1");
  for (double f : plan.malicious_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw ConfigError("malicious fraction outside [0, 1]");
    }
  }
}

ExperimentConfig standard_config() {
  ExperimentConfig c;
  c.sim.cluster.server_counts = {{"S3", 3}, {"S2", 3}, {"S1", 3}};
  c.sim.cluster.vm_counts = {{1, 48}, {2, 36}, {3, 24}, {4, 12}};
  c.sim.cluster.user_fraction = 0.3;
  return c;
}

namespace {

class Reader {
 public:
  explicit Reader(std::string base_dir) : base_dir_(std::move(base_dir)) {}

  void apply(const YAML::Node& root, ExperimentConfig& c) {
    if (!root || root.IsNull()) return;
    expect_map(root, "");
    keys(root, "", {"scenario", "cluster", "thresholds", "risk", "gbt", "forest",
                    "forecaster", "topology", "simulation", "workload", "plan",
                    "output"});
    if (auto n = root["scenario"]) c.plan.scenario = get<std::string>(n, "scenario");
    if (auto n = root["cluster"]) cluster(n, c.sim.cluster);
    if (auto n = root["thresholds"]) thresholds(n, c.sim.thresholds);
    if (auto n = root["risk"]) {
      keys(n, "risk", {"side_channel_coresidents_only", "max_chain"});
      set(n, "risk", "side_channel_coresidents_only",
          c.sim.risk.side_channel_coresidents_only);
      set(n, "risk", "max_chain", c.sim.risk.max_chain);
    }
    if (auto n = root["gbt"]) gbt(n, c.sim.gbt);
    if (auto n = root["forest"]) {
      keys(n, "forest", {"trees", "max_depth", "min_samples_split"});
      set(n, "forest", "trees", c.sim.forest.trees);
      set(n, "forest", "max_depth", c.sim.forest.max_depth);
      set(n, "forest", "min_samples_split", c.sim.forest.min_samples_split);
    }
    if (auto n = root["forecaster"]) forecaster(n, c.sim.forecaster);
    if (auto n = root["topology"]) topology(n, c.sim.topology);
    if (auto n = root["simulation"]) simulation(n, c.sim);
    if (auto n = root["workload"]) workload(n, c.workload);
    if (auto n = root["plan"]) plan(n, c.plan);
    if (auto n = root["output"]) c.output_dir = get<std::string>(n, "output");
  }

 private:
  template <class T>
  static T get(const YAML::Node& n, const std::string& path) {
    try {
      return n.as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("config key '" + path + "' has an invalid value");
    }
  }

  template <class T>
  static void set(const YAML::Node& parent, const std::string& section,
                  const char* key, T& target) {
    if (auto n = parent[key]) target = get<T>(n, section + "." + key);
  }

  static void expect_map(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) {
      throw ConfigError("config section '" + (path.empty() ? "<root>" : path) +
                        "' must be a mapping");
    }
  }

  static void keys(const YAML::Node& n, const std::string& path,
                   const std::set<std::string>& allowed) {
    expect_map(n, path);
    for (const auto& kv : n) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) {
        throw ConfigError("unknown config key '" +
                          (path.empty() ? key : path + "." + key) + "'");
      }
    }
  }

  static ScoreRange range(const YAML::Node& n, const std::string& path) {
    const auto v = get<std::vector<double>>(n, path);
    if (v.size() != 2 || v[0] > v[1]) {
      throw ConfigError("config key '" + path + "' must be [lo, hi]");
    }
    return {v[0], v[1]};
  }

  static void cluster(const YAML::Node& n, ClusterConfig& c) {
    keys(n, "cluster", {"servers", "vms", "user_fraction", "la_mean_degree",
                        "la_cross_user_prob", "la_transitive_closure",
                        "vul_score", "hyp_score"});
    if (auto s = n["servers"]) {
      c.server_counts.clear();
      for (const auto& e : s) {
        keys(e, "cluster.servers[]", {"type", "count"});
        c.server_counts.emplace_back(get<std::string>(e["type"], "cluster.servers[].type"),
                                     get<int>(e["count"], "cluster.servers[].count"));
      }
    }
    if (auto s = n["vms"]) {
      c.vm_counts.clear();
      for (const auto& e : s) {
        keys(e, "cluster.vms[]", {"type", "count"});
        c.vm_counts.emplace_back(get<int>(e["type"], "cluster.vms[].type"),
                                 get<int>(e["count"], "cluster.vms[].count"));
      }
    }
    set(n, "cluster", "user_fraction", c.user_fraction);
    set(n, "cluster", "la_mean_degree", c.la_mean_degree);
    set(n, "cluster", "la_cross_user_prob", c.la_cross_user_prob);
    set(n, "cluster", "la_transitive_closure", c.la_transitive_closure);
    if (auto r = n["vul_score"]) c.vul_score = range(r, "cluster.vul_score");
    if (auto r = n["hyp_score"]) c.hyp_score = range(r, "cluster.hyp_score");
  }

  static void thresholds(const YAML::Node& n, Thresholds& t) {
    keys(n, "thresholds", {"l", "h", "c", "n", "inclusive"});
    set(n, "thresholds", "l", t.l_thr);
    set(n, "thresholds", "h", t.h_thr);
    set(n, "thresholds", "c", t.c_thr);
    set(n, "thresholds", "n", t.n_thr);
    set(n, "thresholds", "inclusive", t.inclusive);
  }

  static void gbt(const YAML::Node& n, GbtParams& p) {
    keys(n, "gbt", {"rounds", "max_depth", "learning_rate", "lambda", "gamma",
                    "decision_threshold"});
    set(n, "gbt", "rounds", p.rounds);
    set(n, "gbt", "max_depth", p.max_depth);
    set(n, "gbt", "learning_rate", p.learning_rate);
    set(n, "gbt", "lambda", p.lambda);
    set(n, "gbt", "gamma", p.gamma);
    set(n, "gbt", "decision_threshold", p.decision_threshold);
  }

  static void forecaster(const YAML::Node& n, ForecasterConfig& f) {
    keys(n, "forecaster", {"kind", "window", "hidden", "epochs", "batch",
                           "learning_rate", "smoothing_alpha", "max_windows"});
    if (auto k = n["kind"]) {
      const auto s = get<std::string>(k, "forecaster.kind");
      if (s == "feed_forward") {
        f.kind = ForecasterKind::kFeedForward;
      } else if (s == "smoothing") {
        f.kind = ForecasterKind::kExponentialSmoothing;
      } else {
        throw ConfigError("forecaster.kind must be feed_forward or smoothing");
      }
    }
    set(n, "forecaster", "window", f.window);
    set(n, "forecaster", "hidden", f.hidden);
    set(n, "forecaster", "epochs", f.epochs);
    set(n, "forecaster", "batch", f.batch);
    set(n, "forecaster", "learning_rate", f.learning_rate);
    set(n, "forecaster", "smoothing_alpha", f.smoothing_alpha);
    set(n, "forecaster", "max_windows", f.max_windows);
  }

  static void topology(const YAML::Node& n, Topology& t) {
    keys(n, "topology", {"kind", "hosts_per_edge", "edges_per_pod"});
    if (auto k = n["kind"]) {
      const auto s = get<std::string>(k, "topology.kind");
      if (s == "tree") {
        t.kind = TopologyKind::kTree;
      } else if (s == "flat") {
        t.kind = TopologyKind::kFlat;
      } else {
        throw ConfigError("topology.kind must be tree or flat");
      }
    }
    set(n, "topology", "hosts_per_edge", t.hosts_per_edge);
    set(n, "topology", "edges_per_pod", t.edges_per_pod);
  }

  static void simulation(const YAML::Node& n, SimConfig& s) {
    keys(n, "simulation",
         {"interval_minutes", "history", "burn_in", "use_forest", "retrain_every",
          "retrain_window", "forecaster_retrain_every", "train_ratio", "rfe_keep",
          "transition_energy"});
    set(n, "simulation", "interval_minutes", s.interval_minutes);
    set(n, "simulation", "history", s.history);
    set(n, "simulation", "burn_in", s.burn_in);
    set(n, "simulation", "use_forest", s.use_forest);
    set(n, "simulation", "retrain_every", s.retrain_every);
    set(n, "simulation", "retrain_window", s.retrain_window);
    set(n, "simulation", "forecaster_retrain_every", s.forecaster_retrain_every);
    set(n, "simulation", "train_ratio", s.train_ratio);
    set(n, "simulation", "rfe_keep", s.rfe_keep);
    set(n, "simulation", "transition_energy", s.transition_energy);
  }

  void workload(const YAML::Node& n, WorkloadConfig& w) const {
    keys(n, "workload", {"trace_path", "mapping", "mix", "mean_on", "mean_off"});
    if (auto p = n["trace_path"]) {
      std::filesystem::path path = get<std::string>(p, "workload.trace_path");
      if (path.is_relative()) path = std::filesystem::path(base_dir_) / path;
      w.trace_path = path.lexically_normal().string();
    }
    if (auto m = n["mapping"]) {
      keys(m, "workload.mapping", {"id", "timestamp", "cpu", "mem", "bw",
                                   "interval_seconds", "max_reject_fraction"});
      set(m, "workload.mapping", "id", w.mapping.id_column);
      set(m, "workload.mapping", "timestamp", w.mapping.timestamp_column);
      set(m, "workload.mapping", "cpu", w.mapping.cpu_column);
      set(m, "workload.mapping", "mem", w.mapping.mem_column);
      set(m, "workload.mapping", "bw", w.mapping.bw_column);
      set(m, "workload.mapping", "interval_seconds", w.mapping.interval_seconds);
      set(m, "workload.mapping", "max_reject_fraction",
          w.mapping.max_reject_fraction);
    }
    if (auto m = n["mix"]) {
      keys(m, "workload.mix", {"constant", "periodic", "bursty"});
      set(m, "workload.mix", "constant", w.mix.constant);
      set(m, "workload.mix", "periodic", w.mix.periodic);
      set(m, "workload.mix", "bursty", w.mix.bursty);
    }
    set(n, "workload", "mean_on", w.mean_on);
    set(n, "workload", "mean_off", w.mean_off);
  }

  static void plan(const YAML::Node& n, ExperimentPlan& p) {
    keys(n, "plan", {"policies", "malicious", "intervals", "seeds", "predictor"});
    if (auto l = n["policies"]) {
      p.policies.clear();
      for (const auto& s : get<std::vector<std::string>>(l, "plan.policies")) {
        try {
          p.policies.push_back(parse_policy(s));
        } catch (const Error& e) {
          throw ConfigError(e.what());
        }
      }
    }
    set(n, "plan", "malicious", p.malicious_fractions);
    set(n, "plan", "intervals", p.intervals);
    set(n, "plan", "seeds", p.seeds);
    if (auto t = n["predictor"]) {
      p.predictor = t.IsScalar() && (t.as<std::string>() == "true" ||
                                     t.as<std::string>() == "false")
                        ? (t.as<bool>() ? PredictorToggle::kOn : PredictorToggle::kOff)
                        : parse_toggle(get<std::string>(t, "plan.predictor"));
    }
  }

  std::string base_dir_;
};

}  // namespace

ExperimentConfig parse_config(const std::string& yaml_text,
                              const std::string& base_dir) {
  ExperimentConfig c = standard_config();
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("invalid YAML: ") + e.what());
  }
  Reader(base_dir).apply(root, c);
  validate(c.plan);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto dir = std::filesystem::path(path).parent_path();
  return parse_config(ss.str(), dir.empty() ? "." : dir.string());
}

}  // namespace cloudrisk
