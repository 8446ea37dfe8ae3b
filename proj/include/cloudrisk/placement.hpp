#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cloudrisk/cluster.hpp"
#include "cloudrisk/rng.hpp"

namespace cloudrisk {

enum class PolicyKind { kFfd, kBf, kRf, kPssf };

// Accepts ffd, bf, greedy (same as bf), rf and pssf.
PolicyKind parse_policy(const std::string& name);
const char* to_string(PolicyKind kind);

struct PolicyContext;

// Placement policy plug-in point.
class PlacementPolicy {
 public:
  virtual ~PlacementPolicy() = default;
  virtual std::string name() const = 0;

  // Reorders a batch of arrivals before they are placed one by one.
  virtual void order_batch(std::vector<VmId>& batch,
                           std::span<const VmSpec> vms) const;

  // A feasible server for `vm`, or nullopt when none exists.
  virtual std::optional<ServerId> choose(PolicyContext& ctx,
                                         const PlacementMap& placement,
                                         const VmSpec& vm,
                                         std::span<const ServerSpec> servers) = 0;
};

std::unique_ptr<PlacementPolicy> make_policy(PolicyKind kind);

struct PolicyContext {
  explicit PolicyContext(PolicyKind kind, std::uint64_t seed = 1);
  PolicyContext(std::unique_ptr<PlacementPolicy> policy, std::uint64_t seed);

  std::unique_ptr<PlacementPolicy> policy;
  // Servers each user has used, in first-use order; only ever appended to.
  std::map<UserId, std::vector<ServerId>> history;
  Rng rng;

  void remember(UserId user, ServerId server);
};

// Throws PlacementError when no server can take the VM.
ServerId place(PolicyContext& ctx, const PlacementMap& placement,
               const VmSpec& vm, std::span<const ServerSpec> servers);

struct BatchPlacement {
  std::vector<std::pair<VmId, ServerId>> placed;
  std::vector<VmId> deferred;  // no feasible server this round
};

// Orders the batch through the policy, assigns each VM and records the
// owner's server history.
BatchPlacement place_batch(PolicyContext& ctx, PlacementMap& placement,
                           std::vector<VmId> batch,
                           std::span<const VmSpec> vms,
                           std::span<const ServerSpec> servers);

enum class TopologyKind { kTree, kFlat };

// Three-level tree (host -> edge -> aggregation -> core) laid over server ids:
// `hosts_per_edge` consecutive ids share an edge switch and `edges_per_pod`
// consecutive edge switches share a pod.
struct Topology {
  TopologyKind kind = TopologyKind::kTree;
  int hosts_per_edge = 2;
  int edges_per_pod = 2;
};

int hop_distance(ServerId a, ServerId b, const Topology& topology);

}  // namespace cloudrisk
