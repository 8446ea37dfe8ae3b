#include <gtest/gtest.h>

#include <limits>
#include <map>

#include "cloudrisk/errors.hpp"
#include "cloudrisk/migration.hpp"
#include "cloudrisk/placement.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace cloudrisk;

namespace {

VmId V(std::uint32_t v) { return VmId{v}; }
ServerId S(std::uint32_t s) { return ServerId{s}; }

std::vector<ServerSpec> servers_with(std::vector<int> pes) {
  std::vector<ServerSpec> out;
  for (std::size_t i = 0; i < pes.size(); ++i) {
    out.push_back(gen::server(static_cast<std::uint32_t>(i), pes[i], 1.0));
  }
  return out;
}

double oracle_combined(const gen::World& w, int vm, double h_thr) {
  return oracle::C(w, vm) + oracle::N(w, vm) +
         std::max(0.0, oracle::H(w, w.host[vm]) - h_thr);
}

}  // namespace

TEST(Policy, ParseNamesAndGreedyAlias) {
  EXPECT_EQ(parse_policy("ffd"), PolicyKind::kFfd);
  EXPECT_EQ(parse_policy("greedy"), PolicyKind::kBf);
  EXPECT_EQ(parse_policy("pssf"), PolicyKind::kPssf);
  EXPECT_THROW(parse_policy("sea-lb"), ConfigError);
}

TEST(Policy, FfdSortsDescendingAndFillsInIdOrder) {
  const auto servers = servers_with({4, 4});
  std::vector<VmSpec> vms{gen::vm(0, 1, 0, 0), gen::vm(1, 3, 0, 0), gen::vm(2, 2, 0, 0)};
  PlacementMap p(servers);
  PolicyContext ctx(PolicyKind::kFfd);
  const BatchPlacement out = place_batch(ctx, p, {V(0), V(1), V(2)}, vms, servers);
  EXPECT_TRUE(out.deferred.empty());
  EXPECT_EQ(p.host(V(1)), S(0));
  EXPECT_EQ(p.host(V(0)), S(0));
  EXPECT_EQ(p.host(V(2)), S(1));
  ASSERT_EQ(out.placed.size(), 3u);
  EXPECT_EQ(out.placed[0].first, V(1));
}

TEST(Policy, BestFitPicksMinimumResidual) {
  const auto servers = servers_with({4, 4});
  PlacementMap p(servers);
  p.assign(gen::vm(0, 2, 0, 0), S(1));
  PolicyContext ctx(PolicyKind::kBf);
  // Residuals after placing a pe-2 VM: S0 -> 2, S1 -> 0.
  EXPECT_EQ(place(ctx, p, gen::vm(1, 2, 0, 0), servers), S(1));
}

TEST(Policy, PssfPrefersPreviousServerElseMostFreeShare) {
  const auto servers = servers_with({4, 8, 4});
  PlacementMap p(servers);
  PolicyContext ctx(PolicyKind::kPssf);
  p.assign(gen::vm(9, 4, 5, 0), S(1));
  // No history: largest free share is S0 (1.0) before S2 (1.0) by id.
  EXPECT_EQ(place(ctx, p, gen::vm(0, 1, 3, 0), servers), S(0));
  ctx.remember(UserId{3}, S(2));
  EXPECT_EQ(place(ctx, p, gen::vm(1, 1, 3, 0), servers), S(2));
  ctx.remember(UserId{3}, S(0));
  EXPECT_EQ(ctx.history[UserId{3}], (std::vector<ServerId>{S(2), S(0)}));
  ctx.remember(UserId{3}, S(2));
  EXPECT_EQ(ctx.history[UserId{3}].size(), 2u);
}

TEST(Policy, NoFeasibleServer) {
  const auto servers = servers_with({2});
  PlacementMap p(servers);
  for (PolicyKind k : {PolicyKind::kFfd, PolicyKind::kBf, PolicyKind::kRf, PolicyKind::kPssf}) {
    PolicyContext ctx(k);
    EXPECT_THROW(place(ctx, p, gen::vm(0, 3, 0, 0), servers), PlacementError);
    std::vector<VmSpec> vms{gen::vm(0, 3, 0, 0)};
    const BatchPlacement out = place_batch(ctx, p, {V(0)}, vms, servers);
    EXPECT_EQ(out.deferred, std::vector<VmId>{V(0)});
  }
}

// Each policy against its own rule, re-derived from residuals, on random states.
TEST(PolicyProperty, ChoicesMatchRules) {
  gen::Source src(41);
  for (int trial = 0; trial < 3000; ++trial) {
    std::vector<int> pes;
    const int ns = src.integer(1, 5);
    for (int s = 0; s < ns; ++s) pes.push_back(src.integer(1, 8));
    const auto servers = servers_with(pes);
    PlacementMap p(servers);
    std::uint32_t next = 0;
    for (int k = 0; k < 6; ++k) {
      const VmSpec v = gen::vm(next, src.integer(1, 3), 0, 0);
      const ServerId s = S(static_cast<std::uint32_t>(src.integer(0, ns - 1)));
      if (p.fits(s, v)) {
        p.assign(v, s);
        ++next;
      }
    }
    const VmSpec vm = gen::vm(next, src.integer(1, 4), 1, 0);
    std::vector<int> feasible;
    for (int s = 0; s < ns; ++s) {
      if (p.residual(S(s)).pe >= vm.pe) feasible.push_back(s);
    }
    for (PolicyKind k : {PolicyKind::kFfd, PolicyKind::kBf, PolicyKind::kRf, PolicyKind::kPssf}) {
      PolicyContext ctx(k, static_cast<std::uint64_t>(trial));
      if (feasible.empty()) {
        ASSERT_THROW(place(ctx, p, vm, servers), PlacementError);
        continue;
      }
      const int got = static_cast<int>(place(ctx, p, vm, servers).value);
      ASSERT_NE(std::find(feasible.begin(), feasible.end(), got), feasible.end());
      if (k == PolicyKind::kFfd) ASSERT_EQ(got, feasible.front());
      if (k == PolicyKind::kBf) {
        int best = feasible.front();
        for (int s : feasible) {
          if (p.residual(S(s)).pe < p.residual(S(best)).pe) best = s;
        }
        ASSERT_EQ(p.residual(S(got)).pe, p.residual(S(best)).pe);
      }
      if (k == PolicyKind::kPssf) {
        double best = -1.0;
        for (int s : feasible) best = std::max(best, p.residual(S(s)).pe / double(pes[s]));
        ASSERT_EQ(p.residual(S(got)).pe / double(pes[got]), best);
      }
      if (k == PolicyKind::kRf) {
        PolicyContext again(k, static_cast<std::uint64_t>(trial));
        ASSERT_EQ(place(again, p, vm, servers).value, static_cast<std::uint32_t>(got));
      }
    }
  }
}

TEST(MigStatus, Rule) {
  EXPECT_EQ(mig_status(1), 1);
  EXPECT_EQ(mig_status(0), 0);
}

TEST(MigrationCost, Examples) {
  VmSpec v = gen::vm(0, 2, 0, 0);
  v.ram_gb = 1.0;
  EXPECT_DOUBLE_EQ(migration_size(v), 2.0);
  const Move m{V(0), S(0), S(5), 3, migration_size(v)};
  const std::vector<Move> moves{m};
  EXPECT_DOUBLE_EQ(migration_cost(moves, {}), 6.0);
  EXPECT_DOUBLE_EQ(migration_cost(moves, {S(5)}), 4266.0);
  EXPECT_DOUBLE_EQ(migration_cost({}, {S(5)}), 0.0);
  const std::vector<Move> twice{m, m};
  EXPECT_DOUBLE_EQ(migration_cost(twice, {S(5)}), 4272.0);
}

TEST(MigrationCost, AdditiveOverDisjointWakeSets) {
  gen::Source src(42);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<Move> a, b;
    std::set<ServerId> asleep;
    for (int i = 0; i < 6; ++i) {
      Move m{V(i), S(0), S(static_cast<std::uint32_t>(src.integer(1, 8))), src.integer(0, 6),
             src.real(0.5, 12.0)};
      (i < 3 ? a : b).push_back(m);
      if (src.coin(0.3)) asleep.insert(m.destination);
    }
    std::set<ServerId> da, db;
    for (const auto& m : a) da.insert(m.destination);
    for (const auto& m : b) db.insert(m.destination);
    bool overlap = false;
    for (ServerId s : da) overlap |= db.count(s) && asleep.count(s);
    if (overlap) continue;
    std::vector<Move> all = a;
    all.insert(all.end(), b.begin(), b.end());
    ASSERT_NEAR(migration_cost(all, asleep), migration_cost(a, asleep) + migration_cost(b, asleep),
                1e-9);
  }
}

TEST(HopDistance, TreeAndFlat) {
  const Topology tree;
  EXPECT_EQ(hop_distance(S(3), S(3), tree), 0);
  EXPECT_EQ(hop_distance(S(0), S(1), tree), 2);
  EXPECT_EQ(hop_distance(S(0), S(2), tree), 4);
  EXPECT_EQ(hop_distance(S(0), S(4), tree), 6);
  EXPECT_EQ(hop_distance(S(4), S(0), tree), 6);
  Topology flat;
  flat.kind = TopologyKind::kFlat;
  EXPECT_EQ(hop_distance(S(0), S(7), flat), 1);
  EXPECT_EQ(hop_distance(S(7), S(7), flat), 0);
}

TEST(SelectDestination, CleanNearestWins) {
  // VM 0 (L 0.9) sits with malicious VM 1 on S0. S1 and S4 are clean; S1 is
  // two hops away, S4 six.
  std::vector<ServerSpec> servers = servers_with({4, 4, 1, 1, 4});
  PlacementMap p(servers);
  std::vector<VmSpec> vms{gen::vm(0, 1, 0, 9.0), gen::vm(1, 1, 1, 0.0)};
  p.assign(vms[0], S(0));
  p.assign(vms[1], S(0));
  const LegalAccessGraph la;
  const VmScores l{0.9, 0.0};
  const VmMask flagged{false, true};
  RiskView view{servers, vms, &la, &l, &flagged, {}, 3};
  const DestinationChoice c = select_destination(V(0), p, view, Topology{});
  ASSERT_TRUE(c.server);
  EXPECT_EQ(*c.server, S(1));
  EXPECT_TRUE(c.clean);

  PlacementMap full = p;
  full.assign(gen::vm(2, 4, 2, 0.0), S(1));
  full.assign(gen::vm(3, 1, 2, 0.0), S(2));
  full.assign(gen::vm(4, 1, 2, 0.0), S(3));
  full.assign(gen::vm(5, 4, 2, 0.0), S(4));
  const DestinationChoice none = select_destination(V(0), full, view, Topology{});
  EXPECT_FALSE(none.server);
}

TEST(MigrateThreatened, QuarantinesWithoutDestinationAndCountsWakes) {
  std::vector<ServerSpec> servers = servers_with({2, 1, 2});
  PlacementMap p(servers);
  std::vector<VmSpec> vms{gen::vm(0, 1, 0, 9.0), gen::vm(1, 1, 1, 0.0), gen::vm(2, 2, 0, 9.0)};
  p.assign(vms[0], S(0));
  p.assign(vms[1], S(0));
  p.assign(vms[2], S(2));
  const LegalAccessGraph la;
  const VmScores l{0.9, 0.0, 0.9};
  const VmMask flagged{false, true, false};
  RiskView view{servers, vms, &la, &l, &flagged, {}, 3};
  const MigrationPlan plan = migrate_threatened({V(0), V(2)}, p, view, Topology{});
  ASSERT_EQ(plan.moves.size(), 1u);
  EXPECT_EQ(plan.moves[0].destination, S(1));
  EXPECT_EQ(plan.woken, std::set<ServerId>{S(1)});
  EXPECT_EQ(plan.quarantined, std::vector<VmId>{V(2)});
  EXPECT_DOUBLE_EQ(plan.total_cost, 2.0 * 1.0 + kTransitionEnergy);
  EXPECT_EQ(p.host(V(0)), S(1));
}

// Replays select_destination against an exhaustive scan of every feasible
// server with oracle indicators and scores.
TEST(MigrationProperty, DestinationMatchesExhaustiveOracle) {
  gen::Source src(43);
  const Topology topo;
  int clean_cases = 0;
  int dirty_cases = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    gen::World w = gen::world(src, 6, 4, 0.3);
    if (w.servers.size() < 2) continue;
    Thresholds thr;
    thr.l_thr = src.coin() ? 0.5 : src.real(0.1, 0.9);
    thr.h_thr = src.real(0.2, 1.5);
    const int vm = src.integer(0, static_cast<int>(w.vms.size()) - 1);
    RiskView view{w.servers, w.vms, &w.la, &w.l_of, &w.malicious, thr, 3};
    const DestinationChoice got = select_destination(V(vm), w.placement, view, topo);

    const int source = w.host[vm];
    int best_clean = -1;
    int best_dirty = -1;
    double best_score = std::numeric_limits<double>::infinity();
    std::map<int, double> scores;
    for (int s = 0; s < static_cast<int>(w.servers.size()); ++s) {
      if (s == source) continue;
      gen::World moved = w;
      moved.host[vm] = s;
      const std::vector<double> h = oracle::all_H(moved);
      const bool clean = oracle::alloc_indicator(moved, vm, h, w.malicious, thr.l_thr,
                                                 thr.h_thr, 3) == 0;
      const int hops = hop_distance(S(source), S(s), topo);
      if (clean) {
        if (best_clean < 0 || hops < hop_distance(S(source), S(best_clean), topo)) best_clean = s;
      }
      const double score = oracle_combined(moved, vm, thr.h_thr);
      scores[s] = score;
      if (score < best_score - 1e-12) {
        best_score = score;
        best_dirty = s;
      }
    }
    ASSERT_TRUE(got.server);
    if (best_clean >= 0) {
      ++clean_cases;
      ASSERT_TRUE(got.clean) << "trial " << trial;
      ASSERT_EQ(static_cast<int>(got.server->value), best_clean) << "trial " << trial;
    } else {
      ++dirty_cases;
      ASSERT_FALSE(got.clean);
      ASSERT_LE(scores[static_cast<int>(got.server->value)], best_score + 1e-12)
          << "trial " << trial << " expected near " << best_dirty;
    }
  }
  EXPECT_GT(clean_cases, 100);
  EXPECT_GT(dirty_cases, 100);
}

TEST(MigrationProperty, CapacityHoldsAfterPlans) {
  gen::Source src(44);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<int> pes;
    const int ns = src.integer(2, 5);
    for (int s = 0; s < ns; ++s) pes.push_back(src.integer(2, 6));
    const auto servers = servers_with(pes);
    PlacementMap p(servers);
    std::vector<VmSpec> vms;
    VmScores l;
    VmMask flagged;
    std::vector<VmId> candidates;
    for (std::uint32_t v = 0; v < 10; ++v) {
      const double score = src.score();
      const VmSpec spec = gen::vm(v, src.integer(1, 2), v % 3, score * 10.0);
      const ServerId s = S(static_cast<std::uint32_t>(src.integer(0, ns - 1)));
      vms.push_back(spec);
      l.push_back(score);
      flagged.push_back(src.coin(0.3));
      if (!p.fits(s, spec)) continue;
      p.assign(spec, s);
      if (src.coin(0.5)) candidates.push_back(spec.id);
    }
    LegalAccessGraph la;
    RiskView view{servers, vms, &la, &l, &flagged, {}, 3};
    std::set<ServerId> asleep;
    for (ServerId s : p.servers()) {
      if (!p.is_active(s)) asleep.insert(s);
    }
    const MigrationPlan plan = migrate_threatened(candidates, p, view, Topology{});
    for (ServerId s : p.servers()) {
      ASSERT_GE(p.residual(s).pe, 0);
      ASSERT_EQ(p.capacity(s) - p.recomputed_usage(s), p.residual(s));
    }
    ASSERT_EQ(plan.moves.size() + plan.quarantined.size(), candidates.size());
    ASSERT_DOUBLE_EQ(plan.total_cost, migration_cost(plan.moves, asleep));
    for (const auto& m : plan.moves) ASSERT_EQ(p.host(m.vm), m.destination);
  }
}
