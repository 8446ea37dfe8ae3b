#include "cloudrisk/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

MetricBundle rates_from(const Confusion& c) {
  MetricBundle m;
  m.confusion = c;
  const double n = static_cast<double>(c.total());
  m.accuracy = n > 0 ? static_cast<double>(c.tp + c.tn) / n : 0.0;
  m.precision = c.predicted() > 0 ? static_cast<double>(c.tp) /
                                        static_cast<double>(c.predicted())
                                  : 1.0;
  m.recall = c.actual() > 0
                 ? static_cast<double>(c.tp) / static_cast<double>(c.actual())
                 : 1.0;
  const double denom = m.precision + m.recall;
  m.f1 = denom > 0 ? 2.0 * m.precision * m.recall / denom : 0.0;
  return m;
}

std::optional<MetricBundle> evaluate(std::span<const double> probabilities,
                                     std::span<const int> actuals,
                                     double threshold) {
  if (probabilities.size() != actuals.size()) {
    throw InputError("predictions and actuals differ in length");
  }
  if (probabilities.empty()) return std::nullopt;
  Confusion c;
  double se = 0.0;
  double ae = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const bool pred = probabilities[i] >= threshold;
    const bool act = actuals[i] == 1;
    if (pred && act) ++c.tp;
    if (pred && !act) ++c.fp;
    if (!pred && act) ++c.fn;
    if (!pred && !act) ++c.tn;
    const double d = probabilities[i] - actuals[i];
    se += d * d;
    ae += std::abs(d);
  }
  MetricBundle m = rates_from(c);
  m.mse = se / static_cast<double>(probabilities.size());
  m.mae = ae / static_cast<double>(probabilities.size());
  return m;
}

namespace {

const VmUsage& usage_of(std::span<const VmUsage> usage, VmId vm) {
  if (vm.value >= usage.size()) {
    throw InputError("no usage sample for VM " + std::to_string(vm.value));
  }
  return usage[vm.value];
}

}  // namespace

double server_cpu_utilization(const ServerSpec& server,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage) {
  double used = 0.0;
  for (VmId vm : placement.hosted(server.id)) {
    used += usage_of(usage, vm).cpu * vms[vm.value].mips_demand();
  }
  return used / server.mips_capacity();
}

double server_mem_utilization(const ServerSpec& server,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage) {
  double used = 0.0;
  for (VmId vm : placement.hosted(server.id)) {
    used += usage_of(usage, vm).mem * vms[vm.value].ram_gb;
  }
  return used / server.ram_gb;
}

double datacenter_utilization(std::span<const ServerSpec> servers,
                              const PlacementMap& placement,
                              std::span<const VmSpec> vms,
                              std::span<const VmUsage> usage) {
  double cpu = 0.0;
  double mem = 0.0;
  int active = 0;
  for (const auto& s : servers) {
    if (!placement.is_active(s.id)) continue;
    ++active;
    cpu += server_cpu_utilization(s, placement, vms, usage);
    mem += server_mem_utilization(s, placement, vms, usage);
  }
  if (active == 0) return 0.0;
  return (cpu + mem) / (2.0 * active);
}

double server_power(const ServerSpec& server, double cpu_utilization) {
  return (server.pw_max - server.pw_min) * cpu_utilization + server.pw_idle;
}

double datacenter_power(std::span<const ServerSpec> servers,
                        const PlacementMap& placement,
                        std::span<const VmSpec> vms,
                        std::span<const VmUsage> usage) {
  double total = 0.0;
  for (const auto& s : servers) {
    if (!placement.is_active(s.id)) continue;
    total += server_power(s, server_cpu_utilization(s, placement, vms, usage));
  }
  return total;
}

}  // namespace cloudrisk
