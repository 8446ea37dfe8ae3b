#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cloudrisk/placement.hpp"
#include "cloudrisk/simulator.hpp"
#include "cloudrisk/trace_io.hpp"

namespace cloudrisk {

enum class PredictorToggle { kBoth, kOn, kOff };

PredictorToggle parse_toggle(const std::string& text);
const char* to_string(PredictorToggle t);

struct ExperimentPlan {
  std::string scenario = "standard";
  std::vector<PolicyKind> policies{PolicyKind::kFfd};
  std::vector<double> malicious_fractions{0.05};
  int intervals = 100;
  std::vector<std::uint64_t> seeds{1};
  PredictorToggle predictor = PredictorToggle::kBoth;
};

// Throws ConfigError on an empty list, intervals < 1 or a fraction outside
// [0, 1].
void validate(const ExperimentPlan& plan);

struct WorkloadConfig {
  std::optional<std::string> trace_path;  // synthetic traces when unset
  TraceMapping mapping;
  PatternMix mix;
  double mean_on = 30.0;
  double mean_off = 220.0;
};

struct ExperimentConfig {
  SimConfig sim;
  WorkloadConfig workload;
  ExperimentPlan plan;
  std::string output_dir;  // empty: caller decides
};

// 9 servers (three per catalog type, largest first), 120 VMs in four sizes
// and 36 users.
ExperimentConfig standard_config();

// YAML overlay on the standard configuration; unknown keys are rejected.
// Relative trace paths resolve against `base_dir`.
ExperimentConfig parse_config(const std::string& yaml_text,
                              const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);

}  // namespace cloudrisk
