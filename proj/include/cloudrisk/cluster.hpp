#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cloudrisk/ids.hpp"

namespace cloudrisk {

// Resource vector used for capacity accounting. PE counts are integral and the
// catalog RAM/storage values are exact binary fractions, so sums never drift.
struct Resources {
  int pe = 0;
  double ram_gb = 0.0;
  double storage_gb = 0.0;

  friend Resources operator+(Resources a, const Resources& b) {
    a.pe += b.pe;
    a.ram_gb += b.ram_gb;
    a.storage_gb += b.storage_gb;
    return a;
  }
  friend Resources operator-(Resources a, const Resources& b) {
    a.pe -= b.pe;
    a.ram_gb -= b.ram_gb;
    a.storage_gb -= b.storage_gb;
    return a;
  }
  friend bool operator==(const Resources&, const Resources&) = default;

  // True when `demand` fits inside this vector on every axis.
  bool covers(const Resources& demand) const {
    return demand.pe <= pe && demand.ram_gb <= ram_gb &&
           demand.storage_gb <= storage_gb;
  }
};

struct ServerType {
  std::string name;
  int pe;
  int mips;
  double ram_gb;
  double storage_gb;
  double pw_max;
  double pw_min;
  double pw_idle;
};

struct VmType {
  int code;  // 1..4
  int pe;
  int mips;
  double ram_gb;
  double storage_gb;
};

// Hardware catalogs used by the experiments (HP ProLiant / IBM x-series hosts,
// EC2-like VM sizes). PW_min and PW_idle share one published column.
const std::vector<ServerType>& server_catalog();
const std::vector<VmType>& vm_catalog();
const ServerType& server_type(const std::string& name);
const VmType& vm_type(int code);

struct ServerSpec {
  ServerId id;
  std::string type_name;
  int pe = 1;
  int mips = 1;
  double ram_gb = 0.0;
  double storage_gb = 0.0;
  double pw_max = 0.0;
  double pw_min = 0.0;
  double pw_idle = 0.0;
  double hyp_score = 0.0;  // CVSS-style, [0, 10]

  Resources capacity() const { return {pe, ram_gb, storage_gb}; }
  double mips_capacity() const { return static_cast<double>(pe) * mips; }
};

struct VmSpec {
  VmId id;
  int vtype = 1;
  int pe = 1;
  int mips = 1;
  double ram_gb = 0.0;
  double storage_gb = 0.0;
  double vul_score = 0.0;  // CVSS-style, [0, 10]
  UserId owner;

  Resources demand() const { return {pe, ram_gb, storage_gb}; }
  double mips_demand() const { return static_cast<double>(pe) * mips; }
};

// Throws DomainError when a spec breaks its invariants.
void validate(const ServerSpec& server);
void validate(const VmSpec& vm);

enum class BehaviorClass : int {
  kUnknown = -1,
  kTrusted = 0,
  kNonTrusted = 1,
};

const char* to_string(BehaviorClass c);

struct AccessEvent {
  UserId actor_user;
  VmId actor_vm;
  std::variant<VmId, ServerId> target;
  int interval = 0;
  bool authorized = true;

  bool targets_vm() const { return std::holds_alternative<VmId>(target); }
};

struct UserRecord {
  UserId id;
  double attack_threshold = 0.5;
  BehaviorClass behavior_class = BehaviorClass::kUnknown;
  bool is_malicious_ground_truth = false;  // simulation oracle only
  std::vector<AccessEvent> access_history;  // counted unauthorized accesses
};

// Assignment of VMs to servers with per-server residual capacity.
//
// Residuals are recomputed from the hosted list on every mutation, so they are
// always exactly capacity minus the sum of hosted demands.
class PlacementMap {
 public:
  PlacementMap() = default;
  explicit PlacementMap(std::span<const ServerSpec> servers);

  void add_server(const ServerSpec& server);

  // Throws PlacementError on capacity violation, StateError when the VM is
  // already assigned and LookupError for an unknown server.
  void assign(const VmSpec& vm, ServerId server);
  // Throws LookupError when the VM is not assigned.
  void remove(VmId vm);
  // Remove + assign as one step; the source slot is released first.
  void move(const VmSpec& vm, ServerId destination);

  bool is_assigned(VmId vm) const { return hosts_.count(vm) != 0; }
  std::optional<ServerId> host_of(VmId vm) const;
  // Throws LookupError when the VM is not assigned.
  ServerId host(VmId vm) const;

  bool has_server(ServerId s) const { return slots_.count(s) != 0; }
  const std::vector<VmId>& hosted(ServerId s) const;  // ascending ids
  Resources capacity(ServerId s) const;
  Resources residual(ServerId s) const;
  bool fits(ServerId s, const VmSpec& vm) const;

  // Sum of hosted demands computed from scratch; used by invariant checks.
  Resources recomputed_usage(ServerId s) const;

  std::vector<VmId> coresidents(VmId vm) const;

  bool is_active(ServerId s) const { return !hosted(s).empty(); }
  std::size_t active_server_count() const;
  std::vector<ServerId> servers() const;  // ascending ids
  std::vector<VmId> assigned_vms() const;  // ascending ids
  std::size_t size() const { return hosts_.size(); }

 private:
  struct Slot {
    Resources capacity;
    Resources residual;
    std::vector<VmId> hosted;
  };
  struct Hosting {
    ServerId server;
    Resources demand;
  };

  const Slot& slot(ServerId s) const;
  Slot& slot(ServerId s);
  void refresh(Slot& slot);

  std::map<ServerId, Slot> slots_;
  std::map<VmId, Hosting> hosts_;
};

// Free-function form: returns the placement with `vm` assigned to `server`.
PlacementMap assign(PlacementMap placement, const VmSpec& vm,
                    const ServerSpec& server);
std::vector<VmId> coresidents(const PlacementMap& placement, VmId vm);

// Undirected set of authorized inter-VM links. Every VM is linked to itself by
// convention; that self-link is implicit and never stored.
class LegalAccessGraph {
 public:
  void add_edge(VmId a, VmId b);
  bool linked(VmId a, VmId b) const;
  const std::set<VmId>& neighbors(VmId vm) const;
  // Makes every connected component a clique.
  void close_transitively();
  std::size_t edge_count() const;
  std::vector<std::pair<VmId, VmId>> edges() const;  // a < b, sorted

 private:
  std::map<VmId, std::set<VmId>> adj_;
};

struct ScoreRange {
  double lo = 0.0;
  double hi = 10.0;
};

struct ClusterConfig {
  // Type name -> count, instantiated in listed order; ids follow that order.
  std::vector<std::pair<std::string, int>> server_counts;
  // VM type code -> count.
  std::vector<std::pair<int, int>> vm_counts;
  double user_fraction = 0.3;
  double malicious_fraction = 0.0;
  double la_mean_degree = 2.0;
  double la_cross_user_prob = 0.001;
  bool la_transitive_closure = true;
  ScoreRange vul_score{0.0, 10.0};
  ScoreRange hyp_score{0.0, 10.0};
  std::uint64_t seed = 1;
};

struct ClusterState {
  std::vector<ServerSpec> servers;  // servers[i].id == i
  std::vector<VmSpec> vms;          // vms[i].id == i
  std::vector<UserRecord> users;    // users[i].id == i
  PlacementMap placement;
  LegalAccessGraph la;

  const ServerSpec& server(ServerId id) const;
  const VmSpec& vm(VmId id) const;
  VmSpec& vm(VmId id);
  const UserRecord& user(UserId id) const;
  UserRecord& user(UserId id);
};

// Deterministic in (config, seed). Throws ConfigError for an empty cluster.
ClusterState build_cluster(const ClusterConfig& config);

std::size_t user_count_for(std::size_t vm_count, double user_fraction);
std::size_t malicious_count_for(std::size_t users, double malicious_fraction);

}  // namespace cloudrisk
