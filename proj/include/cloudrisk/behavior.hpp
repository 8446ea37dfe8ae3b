#pragma once

#include <map>
#include <vector>

#include "cloudrisk/cluster.hpp"
#include "cloudrisk/risk.hpp"

namespace cloudrisk {

// Counters of unauthorized accesses, per server (H‡) and per user (Θ).
// Θ is kept split by access path: VM-to-VM accesses and hypervisor accesses.
class MaliciousLedger {
 public:
  int server_count(ServerId s) const;
  int user_total(UserId u) const { return user_vm(u) + user_server(u); }
  int user_vm(UserId u) const;
  int user_server(UserId u) const;

  // Unauthorized events in the order they were counted.
  const std::vector<AccessEvent>& events() const { return events_; }

  const std::map<ServerId, int>& server_counts() const { return server_; }
  std::vector<UserId> users() const;  // users with a nonzero total

  // Internal mutator used by record_access.
  void count(const AccessEvent& event, ServerId where);

 private:
  std::map<ServerId, int> server_;
  std::map<UserId, int> user_vm_;
  std::map<UserId, int> user_server_;
  std::vector<AccessEvent> events_;
};

// Inputs for deciding whether a hypervisor access is unauthorized.
struct ServerAccessGate {
  const ServerScores* h_of = nullptr;
  Thresholds thresholds;
};

// Evaluates the unauthorized-access relation for `event` and counts it when
// it holds. Returns the event with `authorized` filled in.
//
// VM targets must be co-resident with the actor (StateError otherwise); they
// are unauthorized iff the pair is not LA-linked.
// Server targets are unauthorized iff H‡ of that server is already positive and
// its H exceeds the hypervisor threshold.
AccessEvent record_access(MaliciousLedger& ledger, AccessEvent event,
                          const LegalAccessGraph& la,
                          const PlacementMap& placement,
                          const ServerAccessGate& gate);

// Records a batch belonging to one interval: VM-targeted events first, then
// server-targeted ones, so the outcome does not depend on event order within
// the batch.
std::vector<AccessEvent> record_batch(MaliciousLedger& ledger,
                                      std::vector<AccessEvent> events,
                                      const LegalAccessGraph& la,
                                      const PlacementMap& placement,
                                      const ServerAccessGate& gate);

// Usage history accumulated from the VMs a user ran.
struct UserUsage {
  int active_intervals = 0;  // intervals with at least one hosted VM
  int first_interval = -1;
  long coresident_sum = 0;   // co-residents summed over hosted VM-intervals
  double l_sum = 0.0;        // owned-VM L summed over hosted VM-intervals
  long vm_intervals = 0;

  bool has_history() const { return active_intervals > 0; }
};

class UsageTracker {
 public:
  explicit UsageTracker(std::size_t users = 0) : usage_(users) {}

  // Folds one interval of hosting into the history.
  void observe(int interval, std::span<const VmSpec> vms,
               const PlacementMap& placement, const VmScores& l_of);

  const UserUsage& usage(UserId u) const { return usage_.at(u.value); }
  std::size_t size() const { return usage_.size(); }

 private:
  std::vector<UserUsage> usage_;
};

BehaviorClass classify_user_rule(const UserRecord& user,
                                 const MaliciousLedger& ledger,
                                 bool has_history);

inline constexpr std::size_t kUserFeatureCount = 6;

// {total Θ, VM-path Θ, server-path Θ, mean co-resident count, mean owned L,
//  account age in intervals}
std::vector<double> user_features(UserId user, const MaliciousLedger& ledger,
                                  const UserUsage& usage, int now);

}  // namespace cloudrisk
