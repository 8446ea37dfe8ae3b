#include "cloudrisk/risk.hpp"

#include <algorithm>
#include <cmath>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

namespace {

double score_of(const VmScores& l_of, VmId vm) {
  if (vm.value >= l_of.size()) {
    throw InputError("no L score for VM " + std::to_string(vm.value));
  }
  return l_of[vm.value];
}

bool flagged(const VmMask& mask, VmId vm) {
  return vm.value < mask.size() && mask[vm.value];
}

int rank(BehaviorClass c) {
  switch (c) {
    case BehaviorClass::kNonTrusted:
      return 2;
    case BehaviorClass::kUnknown:
      return 1;
    case BehaviorClass::kTrusted:
      return 0;
  }
  return 0;
}

struct ChainSearch {
  const PlacementMap& placement;
  const LegalAccessGraph& la;
  const VmScores& l_of;
  const Thresholds& thr;
  const VmMask& malicious;
  VmId victim;
  int max_chain;

  std::vector<VmId> path;  // built from the victim side: kz, ..., k1
  ThreatFinding* best;

  // Lowest-id malicious VM sharing k's host, other than k.
  std::optional<VmId> attacker_near(VmId k) const {
    for (VmId other : placement.hosted(placement.host(k))) {
      if (other != k && flagged(malicious, other)) return other;
    }
    return std::nullopt;
  }

  void extend(VmId tail, double product) {
    if (static_cast<int>(path.size()) >= max_chain) return;
    for (VmId k : la.neighbors(tail)) {
      if (k == victim || flagged(malicious, k)) continue;
      if (!placement.is_assigned(k)) continue;
      if (std::find(path.begin(), path.end(), k) != path.end()) continue;
      const double p = product * score_of(l_of, k);
      if (!thr.exceeds(p, thr.l_thr)) continue;
      // Every L is at most 1, so a product at or under the best so far can
      // never recover along a longer chain.
      if (best->cascade && p <= best->chain_product) continue;
      path.push_back(k);
      if (auto m = attacker_near(k)) {
        best->cascade = true;
        best->chain_product = p;
        best->chain_attacker = m;
        best->chain.assign(path.rbegin(), path.rend());
      }
      extend(k, p);
      path.pop_back();
    }
  }
};

}  // namespace

double vm_vulnerability(double vul_score) {
  if (!(vul_score >= 0.0 && vul_score <= 10.0)) {
    throw DomainError("vulnerability score outside [0, 10]");
  }
  return vul_score / 10.0;
}

double hypervisor_vulnerability(const ServerSpec& server,
                                const PlacementMap& placement,
                                const VmScores& l_of) {
  if (!(server.hyp_score >= 0.0 && server.hyp_score <= 10.0)) {
    throw DomainError("hypervisor score outside [0, 10]");
  }
  double worst = 0.0;
  for (VmId vm : placement.hosted(server.id)) {
    worst = std::max(worst, score_of(l_of, vm));
  }
  return (server.hyp_score / 10.0) * (1.0 + worst);
}

double side_channel_score(VmId vm, const PlacementMap& placement,
                          const VmScores& l_of, bool coresidents_only) {
  double safe = 1.0;
  for (VmId other : placement.hosted(placement.host(vm))) {
    if (coresidents_only && other == vm) continue;
    safe *= 1.0 - score_of(l_of, other);
  }
  return 1.0 - safe;
}

double network_cascade_score(VmId vm, const PlacementMap& placement,
                             const LegalAccessGraph& la, const VmScores& l_of) {
  const ServerId home = placement.host(vm);
  double safe = 1.0;
  for (VmId other : la.neighbors(vm)) {
    const auto where = placement.host_of(other);
    if (!where || *where == home) continue;
    safe *= 1.0 - score_of(l_of, other);
  }
  return 1.0 - safe;
}

ThreatFinding assess_threat(VmId vm, const PlacementMap& placement,
                            const LegalAccessGraph& la, const VmScores& l_of,
                            const ServerScores& h_of,
                            const Thresholds& thresholds,
                            const VmMask& malicious, int max_chain) {
  ThreatFinding out;
  const ServerId home = placement.host(vm);
  for (VmId other : placement.hosted(home)) {
    if (other != vm && flagged(malicious, other)) {
      out.coresident_attackers.push_back(other);
    }
  }
  if (!out.coresident_attackers.empty()) {
    if (home.value >= h_of.size()) {
      throw InputError("no H score for server " + std::to_string(home.value));
    }
    out.l_clause = thresholds.exceeds(score_of(l_of, vm), thresholds.l_thr);
    out.h_clause = thresholds.exceeds(h_of[home.value], thresholds.h_thr);
  }
  if (max_chain > 0) {
    ChainSearch search{placement, la,  l_of, thresholds, malicious,
                       vm,        max_chain, {}, &out};
    search.extend(vm, 1.0);
    if (!out.cascade) out.chain_product = 0.0;
  }
  return out;
}

int config_threat_indicator(VmId vm, const PlacementMap& placement,
                            const VmScores& l_of, const ServerScores& h_of,
                            const Thresholds& thresholds,
                            const VmMask& malicious) {
  static const LegalAccessGraph kNoLinks;
  return assess_threat(vm, placement, kNoLinks, l_of, h_of, thresholds,
                       malicious, 0)
                 .config()
             ? 1
             : 0;
}

int alloc_threat_indicator(VmId vm, const PlacementMap& placement,
                           const LegalAccessGraph& la, const VmScores& l_of,
                           const ServerScores& h_of,
                           const Thresholds& thresholds,
                           const VmMask& malicious, int max_chain) {
  return assess_threat(vm, placement, la, l_of, h_of, thresholds, malicious,
                       max_chain)
                 .alloc()
             ? 1
             : 0;
}

VmScores vulnerability_scores(std::span<const VmSpec> vms) {
  VmScores out(vms.size(), 0.0);
  for (const auto& vm : vms) {
    if (vm.id.value >= out.size()) out.resize(vm.id.value + 1, 0.0);
    out[vm.id.value] = vm_vulnerability(vm.vul_score);
  }
  return out;
}

ServerScores hypervisor_scores(std::span<const ServerSpec> servers,
                               const PlacementMap& placement,
                               const VmScores& l_of) {
  ServerScores out(servers.size(), 0.0);
  for (const auto& s : servers) {
    if (s.id.value >= out.size()) out.resize(s.id.value + 1, 0.0);
    out[s.id.value] = hypervisor_vulnerability(s, placement, l_of);
  }
  return out;
}

double aggregate_risk(double L, double H, double C, double N) {
  return std::max({L, H / 2.0, C, N});
}

RiskVector risk_vector(VmId vm, const PlacementMap& placement,
                       const LegalAccessGraph& la, const VmScores& l_of,
                       const ServerScores& h_of,
                       const std::vector<BehaviorClass>& owner_class,
                       const RiskOptions& options) {
  RiskVector rv;
  rv.vm_id = vm;
  rv.L = score_of(l_of, vm);
  const ServerId home = placement.host(vm);
  rv.H = h_of.at(home.value);
  rv.C = side_channel_score(vm, placement, l_of,
                            options.side_channel_coresidents_only);
  rv.N = network_cascade_score(vm, placement, la, l_of);
  rv.coresident_behavior = BehaviorClass::kTrusted;
  for (VmId other : placement.hosted(home)) {
    if (other == vm) continue;
    const BehaviorClass c = other.value < owner_class.size()
                                ? owner_class[other.value]
                                : BehaviorClass::kUnknown;
    if (rank(c) > rank(rv.coresident_behavior)) rv.coresident_behavior = c;
    if (c == BehaviorClass::kNonTrusted) rv.has_malicious_coresident = true;
  }
  return rv;
}

}  // namespace cloudrisk
