#include "cloudrisk/migration.hpp"

#include <algorithm>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

int mig_status(int predicted_threat) { return predicted_threat > 0 ? 1 : 0; }

double migration_size(const VmSpec& vm) {
  return static_cast<double>(vm.pe) * vm.ram_gb;
}

double migration_cost(std::span<const Move> moves,
                      const std::set<ServerId>& asleep_before,
                      double transition_energy) {
  double cost = 0.0;
  std::set<ServerId> woken;
  for (const auto& m : moves) {
    cost += static_cast<double>(m.hops) * m.size;
    if (asleep_before.count(m.destination)) woken.insert(m.destination);
  }
  return cost + transition_energy * static_cast<double>(woken.size());
}

namespace {

void check_view(const RiskView& view) {
  if (view.la == nullptr || view.l_of == nullptr || view.flagged == nullptr) {
    throw InputError("risk view is missing inputs");
  }
}

double host_score(ServerId s, const PlacementMap& placement,
                  const RiskView& view) {
  return hypervisor_vulnerability(view.servers[s.value], placement, *view.l_of);
}

// H for the servers the indicators may read: the VM's own host.
ServerScores host_scores(VmId vm, const PlacementMap& placement,
                         const RiskView& view) {
  ServerScores h(view.servers.size(), 0.0);
  const ServerId home = placement.host(vm);
  h[home.value] = host_score(home, placement, view);
  return h;
}

}  // namespace

double combined_risk(VmId vm, const PlacementMap& placement,
                     const RiskView& view) {
  check_view(view);
  const ServerId home = placement.host(vm);
  const double h = host_score(home, placement, view);
  return side_channel_score(vm, placement, *view.l_of) +
         network_cascade_score(vm, placement, *view.la, *view.l_of) +
         std::max(0.0, h - view.thresholds.h_thr);
}

DestinationChoice select_destination(VmId vm, const PlacementMap& placement,
                                     const RiskView& view,
                                     const Topology& topology) {
  check_view(view);
  const ServerId source = placement.host(vm);
  const VmSpec& spec = view.vms[vm.value];

  DestinationChoice best;
  int best_hops = 0;
  for (const auto& s : view.servers) {
    if (s.id == source || !placement.fits(s.id, spec)) continue;
    PlacementMap trial = placement;
    trial.move(spec, s.id);
    const ServerScores h = host_scores(vm, trial, view);
    const bool clean =
        alloc_threat_indicator(vm, trial, *view.la, *view.l_of, h,
                               view.thresholds, *view.flagged,
                               view.max_chain) == 0;
    const double score = combined_risk(vm, trial, view);
    const int hops = hop_distance(source, s.id, topology);

    bool better = false;
    if (!best.server) {
      better = true;
    } else if (clean != best.clean) {
      better = clean;
    } else if (clean) {
      better = hops < best_hops;
    } else {
      better = score < best.score || (score == best.score && hops < best_hops);
    }
    if (better) {
      best.server = s.id;
      best.clean = clean;
      best.score = score;
      best_hops = hops;
    }
  }
  return best;
}

MigrationPlan migrate_threatened(const std::vector<VmId>& candidates,
                                 PlacementMap& placement, const RiskView& view,
                                 const Topology& topology,
                                 double transition_energy) {
  check_view(view);
  std::set<ServerId> asleep;
  for (ServerId s : placement.servers()) {
    if (!placement.is_active(s)) asleep.insert(s);
  }

  std::vector<std::pair<double, VmId>> order;
  order.reserve(candidates.size());
  for (VmId vm : candidates) {
    order.emplace_back(combined_risk(vm, placement, view), vm);
  }
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });

  MigrationPlan plan;
  for (const auto& [risk, vm] : order) {
    const DestinationChoice choice =
        select_destination(vm, placement, view, topology);
    if (!choice.server) {
      plan.quarantined.push_back(vm);
      continue;
    }
    const VmSpec& spec = view.vms[vm.value];
    Move m;
    m.vm = vm;
    m.source = placement.host(vm);
    m.destination = *choice.server;
    m.hops = hop_distance(m.source, m.destination, topology);
    m.size = migration_size(spec);
    placement.move(spec, m.destination);
    if (asleep.count(m.destination)) plan.woken.insert(m.destination);
    plan.moves.push_back(m);
  }
  plan.total_cost = migration_cost(plan.moves, asleep, transition_energy);
  return plan;
}

}  // namespace cloudrisk
