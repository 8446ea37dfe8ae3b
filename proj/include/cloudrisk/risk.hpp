#pragma once

#include <optional>
#include <span>
#include <vector>

#include "cloudrisk/cluster.hpp"

namespace cloudrisk {

// Per-VM values indexed by VmId::value; per-server values by ServerId::value.
using VmScores = std::vector<double>;
using ServerScores = std::vector<double>;
using VmMask = std::vector<bool>;

struct Thresholds {
  double l_thr = 0.5;
  double h_thr = 0.5;
  double c_thr = 0.5;
  double n_thr = 0.5;
  bool inclusive = false;  // compare with >= instead of >

  bool exceeds(double value, double thr) const {
    return inclusive ? value >= thr : value > thr;
  }
};

struct RiskOptions {
  bool side_channel_coresidents_only = false;
  int max_chain = 3;
};

struct RiskVector {
  VmId vm_id;
  double L = 0.0;
  double H = 0.0;
  double C = 0.0;
  double N = 0.0;
  BehaviorClass coresident_behavior = BehaviorClass::kUnknown;
  bool has_malicious_coresident = false;
};

double vm_vulnerability(double vul_score);

double hypervisor_vulnerability(const ServerSpec& server,
                                const PlacementMap& placement,
                                const VmScores& l_of);

double side_channel_score(VmId vm, const PlacementMap& placement,
                          const VmScores& l_of, bool coresidents_only = false);

double network_cascade_score(VmId vm, const PlacementMap& placement,
                             const LegalAccessGraph& la, const VmScores& l_of);

// Why a VM is (or is not) exposed to a malicious VM under a placement.
struct ThreatFinding {
  bool l_clause = false;    // own L over threshold, malicious co-resident
  bool h_clause = false;    // host H over threshold, malicious co-resident
  bool cascade = false;     // an LA chain product over threshold
  std::vector<VmId> coresident_attackers;  // ascending
  std::optional<VmId> chain_attacker;
  std::vector<VmId> chain;  // k1..kz of the strongest chain
  double chain_product = 0.0;

  bool config() const { return l_clause || h_clause; }
  bool alloc() const { return config() || cascade; }
};

ThreatFinding assess_threat(VmId vm, const PlacementMap& placement,
                            const LegalAccessGraph& la, const VmScores& l_of,
                            const ServerScores& h_of,
                            const Thresholds& thresholds,
                            const VmMask& malicious, int max_chain = 3);

int config_threat_indicator(VmId vm, const PlacementMap& placement,
                            const VmScores& l_of, const ServerScores& h_of,
                            const Thresholds& thresholds,
                            const VmMask& malicious);

int alloc_threat_indicator(VmId vm, const PlacementMap& placement,
                           const LegalAccessGraph& la, const VmScores& l_of,
                           const ServerScores& h_of,
                           const Thresholds& thresholds,
                           const VmMask& malicious, int max_chain = 3);

// L for every VM of the cluster.
VmScores vulnerability_scores(std::span<const VmSpec> vms);
// H for every server under the placement.
ServerScores hypervisor_scores(std::span<const ServerSpec> servers,
                               const PlacementMap& placement,
                               const VmScores& l_of);

// Aggregate stored in the threat database's r_score column.
double aggregate_risk(double L, double H, double C, double N);

// Risk vector for one assigned VM. `owner_class` gives the current class of
// each VM's owner (indexed by VmId) and drives the co-resident features.
RiskVector risk_vector(VmId vm, const PlacementMap& placement,
                       const LegalAccessGraph& la, const VmScores& l_of,
                       const ServerScores& h_of,
                       const std::vector<BehaviorClass>& owner_class,
                       const RiskOptions& options = {});

}  // namespace cloudrisk
