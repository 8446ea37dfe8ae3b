#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace cloudrisk {

// Per-VM utilization samples on the 5-minute grid, fractions in [0, 1].
struct UtilizationSeries {
  std::uint32_t vm_id = 0;
  std::vector<double> cpu;
  std::vector<double> mem;
  std::vector<double> bw;
  std::vector<bool> gap;  // sample was zero-filled during ingestion

  std::size_t length() const { return cpu.size(); }
};

enum class ForecasterKind { kFeedForward, kExponentialSmoothing };

struct ForecasterConfig {
  ForecasterKind kind = ForecasterKind::kFeedForward;
  int window = 6;
  int hidden = 8;
  int epochs = 200;
  int batch = 32;
  double learning_rate = 0.05;
  double smoothing_alpha = 0.6;
  std::size_t max_windows = 4000;  // most recent training windows kept
  std::uint64_t seed = 1;
};

// One-hidden-layer ReLU regressor without bias terms, so an all-zero window
// always forecasts exactly zero. The smoothing kind ignores the weights.
class ForecasterModel {
 public:
  ForecasterModel() = default;
  explicit ForecasterModel(ForecasterConfig config) : config_(config) {}

  const ForecasterConfig& config() const { return config_; }
  ForecasterKind kind() const { return config_.kind; }
  int window() const { return config_.window; }

  // Raw model output for the last `window` samples (may be negative).
  double raw(const std::vector<double>& window) const;

  std::vector<double>& w1() { return w1_; }  // hidden x window, row-major
  std::vector<double>& w2() { return w2_; }  // hidden
  const std::vector<double>& w1() const { return w1_; }
  const std::vector<double>& w2() const { return w2_; }

  friend bool operator==(const ForecasterModel&, const ForecasterModel&);

 private:
  ForecasterConfig config_;
  std::vector<double> w1_;
  std::vector<double> w2_;
};

// Throws InputError when every series is empty.
ForecasterModel train_forecaster(const std::vector<UtilizationSeries>& db,
                                 const ForecasterConfig& config);

struct ActivityForecast {
  double w_p = 0.0;
  bool active = false;
  bool padded = false;  // history shorter than the window
};

// Forecasts from the tail of `cpu_history`; a short history is left-padded
// with zeros and flagged.
ActivityForecast predict_active(const ForecasterModel& model,
                                const std::vector<double>& cpu_history);

nlohmann::json forecaster_to_json(const ForecasterModel& model);
ForecasterModel forecaster_from_json(const nlohmann::json& doc);

}  // namespace cloudrisk
