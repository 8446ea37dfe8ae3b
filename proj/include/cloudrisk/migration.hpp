#pragma once

#include <optional>
#include <set>
#include <span>
#include <vector>

#include "cloudrisk/cluster.hpp"
#include "cloudrisk/placement.hpp"
#include "cloudrisk/risk.hpp"

namespace cloudrisk {

inline constexpr double kTransitionEnergy = 4260.0;  // joules to wake a server

struct Move {
  VmId vm;
  ServerId source;
  ServerId destination;
  int hops = 0;
  double size = 0.0;  // WW: cpu demand (pe) times memory demand (GB)
};

struct MigrationPlan {
  std::vector<Move> moves;
  std::set<ServerId> woken;  // destinations that were asleep before the plan
  std::vector<VmId> quarantined;  // no feasible destination
  double total_cost = 0.0;
};

int mig_status(int predicted_threat);

double migration_size(const VmSpec& vm);

// Sum of hops * size over the moves plus one transition energy per distinct
// destination that was asleep before the plan.
double migration_cost(std::span<const Move> moves,
                      const std::set<ServerId>& asleep_before,
                      double transition_energy = kTransitionEnergy);

// Read-only view of everything destination scoring needs.
struct RiskView {
  std::span<const ServerSpec> servers;
  std::span<const VmSpec> vms;
  const LegalAccessGraph* la = nullptr;
  const VmScores* l_of = nullptr;
  const VmMask* flagged = nullptr;  // VMs treated as malicious
  Thresholds thresholds;
  int max_chain = 3;
};

// C + N + amount by which H exceeds its threshold, for `vm` where it sits.
double combined_risk(VmId vm, const PlacementMap& placement,
                     const RiskView& view);

struct DestinationChoice {
  std::optional<ServerId> server;
  bool clean = false;   // the threat indicators are 0 at the destination
  double score = 0.0;   // combined risk at the destination
};

// Clean feasible servers win by fewest hops then lowest id; without one the
// lowest combined risk wins (ties by hops, then id). The source is excluded.
DestinationChoice select_destination(VmId vm, const PlacementMap& placement,
                                     const RiskView& view,
                                     const Topology& topology);

// Moves each candidate, riskiest first, and returns the executed plan.
MigrationPlan migrate_threatened(const std::vector<VmId>& candidates,
                                 PlacementMap& placement, const RiskView& view,
                                 const Topology& topology,
                                 double transition_energy = kTransitionEnergy);

}  // namespace cloudrisk
