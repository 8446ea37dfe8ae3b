#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cloudrisk/cluster.hpp"

namespace cloudrisk {

struct Confusion {
  long tp = 0;
  long fp = 0;
  long tn = 0;
  long fn = 0;

  long actual() const { return tp + fn; }     // AT
  long predicted() const { return tp + fp; }  // PT
  long unpredicted() const { return fn; }     // UT
  long total() const { return tp + fp + tn + fn; }

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    tn += o.tn;
    fn += o.fn;
    return *this;
  }
};

struct MetricBundle {
  Confusion confusion;
  double accuracy = 0.0;
  double precision = 0.0;  // 1 when nothing was predicted positive
  double recall = 0.0;     // 1 when nothing was actually positive
  double f1 = 0.0;
  double mse = 0.0;
  double mae = 0.0;
};

// Binary metrics of probabilities against {0,1} labels; nullopt for an empty
// pair set. A probability at or above `threshold` is a positive prediction.
std::optional<MetricBundle> evaluate(std::span<const double> probabilities,
                                     std::span<const int> actuals,
                                     double threshold = 0.5);

// Accuracy, precision, recall and F1 from counts alone (mse/mae left 0).
MetricBundle rates_from(const Confusion& c);

struct VmUsage {
  double cpu = 0.0;  // fraction of the VM's own cpu demand in use
  double mem = 0.0;  // fraction of the VM's own memory in use
};

// Per-server cpu utilization: used MIPS over server MIPS.
double server_cpu_utilization(const ServerSpec& server,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage);

double server_mem_utilization(const ServerSpec& server,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage);

// Mean over {cpu, mem} of summed per-server utilization divided by the
// active server count; 0 when no server is active.
double datacenter_utilization(std::span<const ServerSpec> servers,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage);

// Linear power model summed over active servers; sleeping servers draw 0.
double server_power(const ServerSpec& server, double cpu_utilization);
double datacenter_power(std::span<const ServerSpec> servers,
                        const PlacementMap& placement,
                        std::span<const VmSpec> vms,
                        std::span<const VmUsage> usage);

}  // namespace cloudrisk
