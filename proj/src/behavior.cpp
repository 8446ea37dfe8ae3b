#include "cloudrisk/behavior.hpp"

#include <algorithm>
#include <set>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

namespace {

int lookup(const std::map<UserId, int>& m, UserId u) {
  auto it = m.find(u);
  return it == m.end() ? 0 : it->second;
}

}  // namespace

int MaliciousLedger::server_count(ServerId s) const {
  auto it = server_.find(s);
  return it == server_.end() ? 0 : it->second;
}

int MaliciousLedger::user_vm(UserId u) const { return lookup(user_vm_, u); }

int MaliciousLedger::user_server(UserId u) const {
  return lookup(user_server_, u);
}

std::vector<UserId> MaliciousLedger::users() const {
  std::set<UserId> all;
  for (const auto& [u, n] : user_vm_) all.insert(u);
  for (const auto& [u, n] : user_server_) all.insert(u);
  return {all.begin(), all.end()};
}

void MaliciousLedger::count(const AccessEvent& event, ServerId where) {
  ++server_[where];
  if (event.targets_vm()) {
    ++user_vm_[event.actor_user];
  } else {
    ++user_server_[event.actor_user];
  }
  events_.push_back(event);
}

AccessEvent record_access(MaliciousLedger& ledger, AccessEvent event,
                          const LegalAccessGraph& la,
                          const PlacementMap& placement,
                          const ServerAccessGate& gate) {
  if (const auto* target = std::get_if<VmId>(&event.target)) {
    if (*target == event.actor_vm) {
      throw StateError("access event targets its own VM");
    }
    const ServerId where = placement.host(event.actor_vm);
    if (placement.host(*target) != where) {
      throw StateError("VM access between VMs that are not co-resident");
    }
    event.authorized = la.linked(event.actor_vm, *target);
    if (!event.authorized) ledger.count(event, where);
    return event;
  }
  const ServerId where = std::get<ServerId>(event.target);
  if (!placement.has_server(where)) {
    throw LookupError("unknown server " + std::to_string(where.value));
  }
  if (gate.h_of == nullptr || where.value >= gate.h_of->size()) {
    throw InputError("server access needs the hypervisor score of the target");
  }
  const double h = (*gate.h_of)[where.value];
  event.authorized = !(ledger.server_count(where) > 0 &&
                       gate.thresholds.exceeds(h, gate.thresholds.h_thr));
  if (!event.authorized) ledger.count(event, where);
  return event;
}

std::vector<AccessEvent> record_batch(MaliciousLedger& ledger,
                                      std::vector<AccessEvent> events,
                                      const LegalAccessGraph& la,
                                      const PlacementMap& placement,
                                      const ServerAccessGate& gate) {
  std::stable_partition(events.begin(), events.end(),
                        [](const AccessEvent& e) { return e.targets_vm(); });
  std::vector<AccessEvent> out;
  out.reserve(events.size());
  for (auto& e : events) {
    if (e.targets_vm()) {
      out.push_back(record_access(ledger, e, la, placement, gate));
    }
  }
  // Server-path gating sees H‡ as it stands after every VM-path event.
  std::map<ServerId, int> before;
  for (const auto& e : events) {
    if (!e.targets_vm()) {
      const ServerId s = std::get<ServerId>(e.target);
      before.emplace(s, ledger.server_count(s));
    }
  }
  for (auto& e : events) {
    if (e.targets_vm()) continue;
    const ServerId s = std::get<ServerId>(e.target);
    if (gate.h_of == nullptr || s.value >= gate.h_of->size()) {
      throw InputError("server access needs the hypervisor score of the target");
    }
    const double h = (*gate.h_of)[s.value];
    e.authorized = !(before[s] > 0 &&
                     gate.thresholds.exceeds(h, gate.thresholds.h_thr));
    if (!e.authorized) ledger.count(e, s);
    out.push_back(e);
  }
  return out;
}

void UsageTracker::observe(int interval, std::span<const VmSpec> vms,
                           const PlacementMap& placement,
                           const VmScores& l_of) {
  std::vector<bool> seen(usage_.size(), false);
  for (VmId id : placement.assigned_vms()) {
    const VmSpec& vm = vms[id.value];
    if (vm.owner.value >= usage_.size()) usage_.resize(vm.owner.value + 1);
    if (seen.size() < usage_.size()) seen.resize(usage_.size(), false);
    UserUsage& u = usage_[vm.owner.value];
    u.coresident_sum +=
        static_cast<long>(placement.hosted(placement.host(id)).size()) - 1;
    u.l_sum += l_of.at(id.value);
    ++u.vm_intervals;
    if (!seen[vm.owner.value]) {
      seen[vm.owner.value] = true;
      ++u.active_intervals;
      if (u.first_interval < 0) u.first_interval = interval;
    }
  }
}

BehaviorClass classify_user_rule(const UserRecord& user,
                                 const MaliciousLedger& ledger,
                                 bool has_history) {
  if (ledger.user_total(user.id) > 0) return BehaviorClass::kNonTrusted;
  if (!has_history) return BehaviorClass::kUnknown;
  return BehaviorClass::kTrusted;
}

std::vector<double> user_features(UserId user, const MaliciousLedger& ledger,
                                  const UserUsage& usage, int now) {
  const double n = usage.vm_intervals > 0
                       ? static_cast<double>(usage.vm_intervals)
                       : 1.0;
  const double age = usage.first_interval < 0
                        ? 0.0
                        : static_cast<double>(now - usage.first_interval + 1);
  return {static_cast<double>(ledger.user_total(user)),
          static_cast<double>(ledger.user_vm(user)),
          static_cast<double>(ledger.user_server(user)),
          static_cast<double>(usage.coresident_sum) / n,
          usage.l_sum / n,
          age};
}

}  // namespace cloudrisk
