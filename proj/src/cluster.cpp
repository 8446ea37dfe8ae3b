#include "cloudrisk/cluster.hpp"

#include <algorithm>
#include <cmath>

#include "cloudrisk/errors.hpp"
#include "cloudrisk/rng.hpp"

namespace cloudrisk {

const std::vector<ServerType>& server_catalog() {
  static const std::vector<ServerType> catalog = {
      {"S1", 2, 2660, 4.0, 160.0, 135.0, 93.7, 93.7},
      {"S2", 4, 3067, 8.0, 250.0, 113.0, 42.3, 42.3},
      {"S3", 12, 3067, 16.0, 500.0, 222.0, 58.4, 58.4},
  };
  return catalog;
}

const std::vector<VmType>& vm_catalog() {
  static const std::vector<VmType> catalog = {
      {1, 1, 500, 0.5, 40.0},
      {2, 2, 1000, 1.0, 60.0},
      {3, 3, 1500, 2.0, 80.0},
      {4, 4, 2000, 3.0, 100.0},
  };
  return catalog;
}

const ServerType& server_type(const std::string& name) {
  for (const auto& t : server_catalog()) {
    if (t.name == name) return t;
  }
  throw ConfigError("unknown server type '" + name + "'");
}

const VmType& vm_type(int code) {
  for (const auto& t : vm_catalog()) {
    if (t.code == code) return t;
  }
  throw ConfigError("unknown VM type " + std::to_string(code));
}

void validate(const ServerSpec& s) {
  if (s.pe < 1) throw DomainError("server pe must be >= 1");
  if (s.pw_min > s.pw_max) throw DomainError("server pw_min exceeds pw_max");
  if (!(s.hyp_score >= 0.0 && s.hyp_score <= 10.0)) {
    throw DomainError("server hyp_score outside [0, 10]");
  }
}

void validate(const VmSpec& vm) {
  if (vm.vtype < 1 || vm.vtype > 4) throw DomainError("VM type outside 1..4");
  if (!(vm.vul_score >= 0.0 && vm.vul_score <= 10.0)) {
    throw DomainError("VM vul_score outside [0, 10]");
  }
}

const char* to_string(BehaviorClass c) {
  switch (c) {
    case BehaviorClass::kUnknown:
      return "unknown";
    case BehaviorClass::kTrusted:
      return "trusted";
    case BehaviorClass::kNonTrusted:
      return "non-trusted";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// PlacementMap

PlacementMap::PlacementMap(std::span<const ServerSpec> servers) {
  for (const auto& s : servers) add_server(s);
}

void PlacementMap::add_server(const ServerSpec& server) {
  if (slots_.count(server.id)) {
    throw StateError("server " + std::to_string(server.id.value) +
                     " registered twice");
  }
  Slot slot;
  slot.capacity = server.capacity();
  slot.residual = slot.capacity;
  slots_.emplace(server.id, std::move(slot));
}

const PlacementMap::Slot& PlacementMap::slot(ServerId s) const {
  auto it = slots_.find(s);
  if (it == slots_.end()) {
    throw LookupError("unknown server " + std::to_string(s.value));
  }
  return it->second;
}

PlacementMap::Slot& PlacementMap::slot(ServerId s) {
  auto it = slots_.find(s);
  if (it == slots_.end()) {
    throw LookupError("unknown server " + std::to_string(s.value));
  }
  return it->second;
}

void PlacementMap::refresh(Slot& slot) {
  Resources used;
  for (VmId vm : slot.hosted) used = used + hosts_.at(vm).demand;
  slot.residual = slot.capacity - used;
}

void PlacementMap::assign(const VmSpec& vm, ServerId server) {
  Slot& target = slot(server);
  if (hosts_.count(vm.id)) {
    throw StateError("VM " + std::to_string(vm.id.value) +
                     " is already assigned");
  }
  if (!target.residual.covers(vm.demand())) {
    throw PlacementError("VM " + std::to_string(vm.id.value) +
                         " does not fit on server " +
                         std::to_string(server.value));
  }
  hosts_.emplace(vm.id, Hosting{server, vm.demand()});
  auto pos = std::lower_bound(target.hosted.begin(), target.hosted.end(), vm.id);
  target.hosted.insert(pos, vm.id);
  refresh(target);
}

void PlacementMap::remove(VmId vm) {
  auto it = hosts_.find(vm);
  if (it == hosts_.end()) {
    throw LookupError("VM " + std::to_string(vm.value) + " is not assigned");
  }
  Slot& source = slot(it->second.server);
  source.hosted.erase(
      std::find(source.hosted.begin(), source.hosted.end(), vm));
  hosts_.erase(it);
  refresh(source);
}

void PlacementMap::move(const VmSpec& vm, ServerId destination) {
  const ServerId source = host(vm.id);
  remove(vm.id);
  try {
    assign(vm, destination);
  } catch (...) {
    assign(vm, source);
    throw;
  }
}

std::optional<ServerId> PlacementMap::host_of(VmId vm) const {
  auto it = hosts_.find(vm);
  if (it == hosts_.end()) return std::nullopt;
  return it->second.server;
}

ServerId PlacementMap::host(VmId vm) const {
  auto it = hosts_.find(vm);
  if (it == hosts_.end()) {
    throw LookupError("VM " + std::to_string(vm.value) + " is not assigned");
  }
  return it->second.server;
}

const std::vector<VmId>& PlacementMap::hosted(ServerId s) const {
  return slot(s).hosted;
}

Resources PlacementMap::capacity(ServerId s) const { return slot(s).capacity; }

Resources PlacementMap::residual(ServerId s) const { return slot(s).residual; }

bool PlacementMap::fits(ServerId s, const VmSpec& vm) const {
  return slot(s).residual.covers(vm.demand());
}

Resources PlacementMap::recomputed_usage(ServerId s) const {
  Resources used;
  for (const auto& [vm, hosting] : hosts_) {
    if (hosting.server == s) used = used + hosting.demand;
  }
  return used;
}

std::vector<VmId> PlacementMap::coresidents(VmId vm) const {
  std::vector<VmId> out;
  for (VmId other : hosted(host(vm))) {
    if (other != vm) out.push_back(other);
  }
  return out;
}

std::size_t PlacementMap::active_server_count() const {
  std::size_t n = 0;
  for (const auto& [id, slot] : slots_) n += slot.hosted.empty() ? 0 : 1;
  return n;
}

std::vector<ServerId> PlacementMap::servers() const {
  std::vector<ServerId> out;
  out.reserve(slots_.size());
  for (const auto& [id, slot] : slots_) out.push_back(id);
  return out;
}

std::vector<VmId> PlacementMap::assigned_vms() const {
  std::vector<VmId> out;
  out.reserve(hosts_.size());
  for (const auto& [id, hosting] : hosts_) out.push_back(id);
  return out;
}

PlacementMap assign(PlacementMap placement, const VmSpec& vm,
                    const ServerSpec& server) {
  placement.assign(vm, server.id);
  return placement;
}

std::vector<VmId> coresidents(const PlacementMap& placement, VmId vm) {
  return placement.coresidents(vm);
}

// ---------------------------------------------------------------------------
// LegalAccessGraph

void LegalAccessGraph::add_edge(VmId a, VmId b) {
  if (a == b) return;
  adj_[a].insert(b);
  adj_[b].insert(a);
}

bool LegalAccessGraph::linked(VmId a, VmId b) const {
  if (a == b) return true;
  auto it = adj_.find(a);
  return it != adj_.end() && it->second.count(b) != 0;
}

const std::set<VmId>& LegalAccessGraph::neighbors(VmId vm) const {
  static const std::set<VmId> kEmpty;
  auto it = adj_.find(vm);
  return it == adj_.end() ? kEmpty : it->second;
}

void LegalAccessGraph::close_transitively() {
  std::set<VmId> seen;
  for (const auto& [start, unused] : adj_) {
    if (seen.count(start)) continue;
    std::vector<VmId> component;
    std::vector<VmId> stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      VmId v = stack.back();
      stack.pop_back();
      component.push_back(v);
      for (VmId w : adj_[v]) {
        if (seen.insert(w).second) stack.push_back(w);
      }
    }
    for (VmId a : component) {
      for (VmId b : component) {
        if (a != b) adj_[a].insert(b);
      }
    }
  }
}

std::size_t LegalAccessGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [v, nbrs] : adj_) twice += nbrs.size();
  return twice / 2;
}

std::vector<std::pair<VmId, VmId>> LegalAccessGraph::edges() const {
  std::vector<std::pair<VmId, VmId>> out;
  for (const auto& [v, nbrs] : adj_) {
    for (VmId w : nbrs) {
      if (v < w) out.emplace_back(v, w);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// ClusterState

const ServerSpec& ClusterState::server(ServerId id) const {
  if (id.value >= servers.size()) {
    throw LookupError("unknown server " + std::to_string(id.value));
  }
  return servers[id.value];
}

const VmSpec& ClusterState::vm(VmId id) const {
  if (id.value >= vms.size()) {
    throw LookupError("unknown VM " + std::to_string(id.value));
  }
  return vms[id.value];
}

VmSpec& ClusterState::vm(VmId id) {
  if (id.value >= vms.size()) {
    throw LookupError("unknown VM " + std::to_string(id.value));
  }
  return vms[id.value];
}

const UserRecord& ClusterState::user(UserId id) const {
  if (id.value >= users.size()) {
    throw LookupError("unknown user " + std::to_string(id.value));
  }
  return users[id.value];
}

UserRecord& ClusterState::user(UserId id) {
  if (id.value >= users.size()) {
    throw LookupError("unknown user " + std::to_string(id.value));
  }
  return users[id.value];
}

std::size_t user_count_for(std::size_t vm_count, double user_fraction) {
  const double raw = std::floor(user_fraction * static_cast<double>(vm_count) +
                                1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(raw, 0.0)));
}

std::size_t malicious_count_for(std::size_t users, double malicious_fraction) {
  const auto k = static_cast<std::size_t>(
      std::llround(malicious_fraction * static_cast<double>(users)));
  return std::min(k, users);
}

namespace {

double draw_score(Rng& rng, const ScoreRange& range) {
  if (range.lo < 0.0 || range.hi > 10.0 || range.lo > range.hi) {
    throw ConfigError("score range must satisfy 0 <= lo <= hi <= 10");
  }
  return rng.uniform(range.lo, range.hi);
}

}  // namespace

ClusterState build_cluster(const ClusterConfig& config) {
  ClusterState state;
  Rng server_rng = Rng(config.seed).fork(1);
  Rng vm_rng = Rng(config.seed).fork(2);
  Rng user_rng = Rng(config.seed).fork(3);
  Rng la_rng = Rng(config.seed).fork(4);

  for (const auto& [name, count] : config.server_counts) {
    if (count < 0) throw ConfigError("negative server count for " + name);
    const ServerType& t = server_type(name);
    for (int i = 0; i < count; ++i) {
      ServerSpec s;
      s.id = ServerId(static_cast<std::uint32_t>(state.servers.size()));
      s.type_name = t.name;
      s.pe = t.pe;
      s.mips = t.mips;
      s.ram_gb = t.ram_gb;
      s.storage_gb = t.storage_gb;
      s.pw_max = t.pw_max;
      s.pw_min = t.pw_min;
      s.pw_idle = t.pw_idle;
      s.hyp_score = draw_score(server_rng, config.hyp_score);
      state.servers.push_back(s);
    }
  }
  std::size_t vm_total = 0;
  for (const auto& [code, count] : config.vm_counts) {
    if (count < 0) throw ConfigError("negative VM count");
    vm_total += static_cast<std::size_t>(count);
  }
  if (state.servers.empty()) throw ConfigError("cluster has zero servers");
  if (vm_total == 0) throw ConfigError("cluster has zero VMs");
  if (config.user_fraction <= 0.0) {
    throw ConfigError("user_fraction must be positive");
  }
  if (config.malicious_fraction < 0.0 || config.malicious_fraction > 1.0) {
    throw ConfigError("malicious_fraction must lie in [0, 1]");
  }

  const std::size_t n_users = user_count_for(vm_total, config.user_fraction);
  for (std::size_t u = 0; u < n_users; ++u) {
    UserRecord rec;
    rec.id = UserId(static_cast<std::uint32_t>(u));
    state.users.push_back(rec);
  }
  std::vector<std::size_t> order(n_users);
  for (std::size_t i = 0; i < n_users; ++i) order[i] = i;
  user_rng.shuffle(order);
  const std::size_t n_mal =
      malicious_count_for(n_users, config.malicious_fraction);
  for (std::size_t i = 0; i < n_mal; ++i) {
    state.users[order[i]].is_malicious_ground_truth = true;
  }

  for (const auto& [code, count] : config.vm_counts) {
    const VmType& t = vm_type(code);
    for (int i = 0; i < count; ++i) {
      VmSpec vm;
      vm.id = VmId(static_cast<std::uint32_t>(state.vms.size()));
      vm.vtype = t.code;
      vm.pe = t.pe;
      vm.mips = t.mips;
      vm.ram_gb = t.ram_gb;
      vm.storage_gb = t.storage_gb;
      vm.vul_score = draw_score(vm_rng, config.vul_score);
      vm.owner = UserId(static_cast<std::uint32_t>(vm_rng.index(n_users)));
      state.vms.push_back(vm);
    }
  }

  // Application groups: random graph of the requested mean degree among each
  // user's VMs, plus sparse cross-user links.
  std::vector<std::vector<VmId>> by_user(n_users);
  for (const auto& vm : state.vms) by_user[vm.owner.value].push_back(vm.id);
  for (const auto& group : by_user) {
    if (group.size() < 2) continue;
    const double p = std::min(
        1.0, config.la_mean_degree / static_cast<double>(group.size() - 1));
    for (std::size_t i = 0; i < group.size(); ++i) {
      for (std::size_t j = i + 1; j < group.size(); ++j) {
        if (la_rng.bernoulli(p)) state.la.add_edge(group[i], group[j]);
      }
    }
  }
  if (config.la_cross_user_prob > 0.0) {
    for (std::size_t i = 0; i < state.vms.size(); ++i) {
      for (std::size_t j = i + 1; j < state.vms.size(); ++j) {
        if (state.vms[i].owner == state.vms[j].owner) continue;
        if (la_rng.bernoulli(config.la_cross_user_prob)) {
          state.la.add_edge(state.vms[i].id, state.vms[j].id);
        }
      }
    }
  }
  if (config.la_transitive_closure) state.la.close_transitively();

  state.placement = PlacementMap(state.servers);
  return state;
}

}  // namespace cloudrisk
