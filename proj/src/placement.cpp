#include "cloudrisk/placement.hpp"

#include <algorithm>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

PolicyKind parse_policy(const std::string& name) {
  std::string n = name;
  std::transform(n.begin(), n.end(), n.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (n == "ffd") return PolicyKind::kFfd;
  if (n == "bf" || n == "greedy") return PolicyKind::kBf;
  if (n == "rf") return PolicyKind::kRf;
  if (n == "pssf") return PolicyKind::kPssf;
  throw ConfigError("unknown placement policy '" + name + "'");
}

const char* to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFfd:
      return "ffd";
    case PolicyKind::kBf:
      return "bf";
    case PolicyKind::kRf:
      return "rf";
    case PolicyKind::kPssf:
      return "pssf";
  }
  return "?";
}

void PlacementPolicy::order_batch(std::vector<VmId>&,
                                  std::span<const VmSpec>) const {}

namespace {

class FirstFitDecreasing : public PlacementPolicy {
 public:
  std::string name() const override { return "ffd"; }

  void order_batch(std::vector<VmId>& batch,
                   std::span<const VmSpec> vms) const override {
    std::stable_sort(batch.begin(), batch.end(), [&](VmId a, VmId b) {
      return vms[a.value].pe > vms[b.value].pe;
    });
  }

  std::optional<ServerId> choose(PolicyContext&, const PlacementMap& placement,
                                 const VmSpec& vm,
                                 std::span<const ServerSpec> servers) override {
    for (const auto& s : servers) {
      if (placement.fits(s.id, vm)) return s.id;
    }
    return std::nullopt;
  }
};

class BestFit : public PlacementPolicy {
 public:
  std::string name() const override { return "bf"; }

  std::optional<ServerId> choose(PolicyContext&, const PlacementMap& placement,
                                 const VmSpec& vm,
                                 std::span<const ServerSpec> servers) override {
    std::optional<ServerId> best;
    Resources best_left;
    for (const auto& s : servers) {
      if (!placement.fits(s.id, vm)) continue;
      const Resources left = placement.residual(s.id) - vm.demand();
      if (!best || left.pe < best_left.pe ||
          (left.pe == best_left.pe && left.ram_gb < best_left.ram_gb)) {
        best = s.id;
        best_left = left;
      }
    }
    return best;
  }
};

class RandomFit : public PlacementPolicy {
 public:
  std::string name() const override { return "rf"; }

  std::optional<ServerId> choose(PolicyContext& ctx,
                                 const PlacementMap& placement,
                                 const VmSpec& vm,
                                 std::span<const ServerSpec> servers) override {
    std::vector<ServerId> feasible;
    for (const auto& s : servers) {
      if (placement.fits(s.id, vm)) feasible.push_back(s.id);
    }
    if (feasible.empty()) return std::nullopt;
    return feasible[ctx.rng.index(feasible.size())];
  }
};

class PreviouslySelectedFirst : public PlacementPolicy {
 public:
  std::string name() const override { return "pssf"; }

  std::optional<ServerId> choose(PolicyContext& ctx,
                                 const PlacementMap& placement,
                                 const VmSpec& vm,
                                 std::span<const ServerSpec> servers) override {
    if (auto it = ctx.history.find(vm.owner); it != ctx.history.end()) {
      for (ServerId s : it->second) {
        if (placement.has_server(s) && placement.fits(s, vm)) return s;
      }
    }
    // Otherwise the server with the largest share of its cores still free.
    std::optional<ServerId> best;
    double best_share = -1.0;
    for (const auto& s : servers) {
      if (!placement.fits(s.id, vm)) continue;
      const double share = static_cast<double>(placement.residual(s.id).pe) /
                           static_cast<double>(s.pe);
      if (share > best_share) {
        best = s.id;
        best_share = share;
      }
    }
    return best;
  }
};

}  // namespace

std::unique_ptr<PlacementPolicy> make_policy(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::kFfd:
      return std::make_unique<FirstFitDecreasing>();
    case PolicyKind::kBf:
      return std::make_unique<BestFit>();
    case PolicyKind::kRf:
      return std::make_unique<RandomFit>();
    case PolicyKind::kPssf:
      return std::make_unique<PreviouslySelectedFirst>();
  }
  throw ConfigError("unknown placement policy");
}

PolicyContext::PolicyContext(PolicyKind kind, std::uint64_t seed)
    : policy(make_policy(kind)), rng(seed) {}

PolicyContext::PolicyContext(std::unique_ptr<PlacementPolicy> p,
                             std::uint64_t seed)
    : policy(std::move(p)), rng(seed) {
  if (!policy) throw ConfigError("placement policy is null");
}

void PolicyContext::remember(UserId user, ServerId server) {
  auto& used = history[user];
  if (std::find(used.begin(), used.end(), server) == used.end()) {
    used.push_back(server);
  }
}

ServerId place(PolicyContext& ctx, const PlacementMap& placement,
               const VmSpec& vm, std::span<const ServerSpec> servers) {
  const auto choice = ctx.policy->choose(ctx, placement, vm, servers);
  if (!choice) {
    throw PlacementError("no feasible server for VM " +
                         std::to_string(vm.id.value));
  }
  return *choice;
}

BatchPlacement place_batch(PolicyContext& ctx, PlacementMap& placement,
                           std::vector<VmId> batch,
                           std::span<const VmSpec> vms,
                           std::span<const ServerSpec> servers) {
  ctx.policy->order_batch(batch, vms);
  BatchPlacement out;
  for (VmId id : batch) {
    const VmSpec& vm = vms[id.value];
    const auto choice = ctx.policy->choose(ctx, placement, vm, servers);
    if (!choice) {
      out.deferred.push_back(id);
      continue;
    }
    placement.assign(vm, *choice);
    ctx.remember(vm.owner, *choice);
    out.placed.emplace_back(id, *choice);
  }
  return out;
}

int hop_distance(ServerId a, ServerId b, const Topology& topology) {
  if (a == b) return 0;
  if (topology.kind == TopologyKind::kFlat) return 1;
  if (topology.hosts_per_edge < 1 || topology.edges_per_pod < 1) {
    throw ConfigError("topology fan-out must be positive");
  }
  const auto edge_a = a.value / static_cast<std::uint32_t>(topology.hosts_per_edge);
  const auto edge_b = b.value / static_cast<std::uint32_t>(topology.hosts_per_edge);
  if (edge_a == edge_b) return 2;
  const auto pod_a = edge_a / static_cast<std::uint32_t>(topology.edges_per_pod);
  const auto pod_b = edge_b / static_cast<std::uint32_t>(topology.edges_per_pod);
  return pod_a == pod_b ? 4 : 6;
}

}  // namespace cloudrisk
