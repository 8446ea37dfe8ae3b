#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "cloudrisk/behavior.hpp"
#include "cloudrisk/errors.hpp"
#include "cloudrisk/forest.hpp"
#include "support/gen.hpp"
#include "support/oracles.hpp"

using namespace cloudrisk;

namespace {

VmId V(std::uint32_t v) { return VmId{v}; }
ServerId S(std::uint32_t s) { return ServerId{s}; }
UserId U(std::uint32_t u) { return UserId{u}; }

AccessEvent vm_event(std::uint32_t user, std::uint32_t actor, std::uint32_t target,
                     int interval = 0) {
  return AccessEvent{U(user), V(actor), V(target), interval, true};
}

AccessEvent server_event(std::uint32_t user, std::uint32_t actor, std::uint32_t server,
                         int interval = 0) {
  return AccessEvent{U(user), V(actor), S(server), interval, true};
}

// Two servers; VMs 0,1,2 on server 0 and VM 3 on server 1. 0-1 is LA-linked.
struct Scene {
  std::vector<ServerSpec> servers{gen::server(0, 8, 9.0), gen::server(1, 8, 1.0)};
  PlacementMap placement{servers};
  LegalAccessGraph la;
  ServerScores h{0.9, 0.1};
  ServerAccessGate gate{&h, {}};

  Scene() {
    placement.assign(gen::vm(0, 1, 0, 0.0), S(0));
    placement.assign(gen::vm(1, 1, 1, 0.0), S(0));
    placement.assign(gen::vm(2, 1, 2, 0.0), S(0));
    placement.assign(gen::vm(3, 1, 3, 0.0), S(1));
    la.add_edge(V(0), V(1));
  }
};

bool raw_linked(const gen::World& w, const AccessEvent& e) {
  return oracle::linked(w, static_cast<int>(e.actor_vm.value),
                        static_cast<int>(std::get<VmId>(e.target).value));
}

std::vector<RfSample> rule_users(gen::Source& src, int n) {
  std::vector<RfSample> out;
  for (int i = 0; i < n; ++i) {
    const int theta_vm = src.coin(0.4) ? src.integer(1, 6) : 0;
    const int theta_s = src.coin(0.2) ? src.integer(1, 3) : 0;
    RfSample s;
    s.features = {static_cast<double>(theta_vm + theta_s), static_cast<double>(theta_vm),
                  static_cast<double>(theta_s), src.real(0.0, 6.0), src.real(0.0, 1.0),
                  static_cast<double>(src.integer(1, 100))};
    s.label = theta_vm + theta_s > 0 ? 1 : 0;
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(Ledger, AuthorizedAccessLeavesCounters) {
  Scene sc;
  MaliciousLedger ledger;
  const AccessEvent e = record_access(ledger, vm_event(0, 0, 1), sc.la, sc.placement, sc.gate);
  EXPECT_TRUE(e.authorized);
  EXPECT_EQ(ledger.user_total(U(0)), 0);
  EXPECT_EQ(ledger.server_count(S(0)), 0);
}

TEST(Ledger, UnlinkedCoresidentAccessCounts) {
  Scene sc;
  MaliciousLedger ledger;
  const AccessEvent e = record_access(ledger, vm_event(0, 0, 2), sc.la, sc.placement, sc.gate);
  EXPECT_FALSE(e.authorized);
  EXPECT_EQ(ledger.user_total(U(0)), 1);
  EXPECT_EQ(ledger.user_vm(U(0)), 1);
  EXPECT_EQ(ledger.server_count(S(0)), 1);
  EXPECT_EQ(ledger.events().size(), 1u);
}

TEST(Ledger, RejectsNonCoresidentAndSelfAccess) {
  Scene sc;
  MaliciousLedger ledger;
  EXPECT_THROW(record_access(ledger, vm_event(0, 0, 3), sc.la, sc.placement, sc.gate),
               StateError);
  EXPECT_THROW(record_access(ledger, vm_event(0, 0, 0), sc.la, sc.placement, sc.gate),
               StateError);
  EXPECT_THROW(record_access(ledger, server_event(0, 0, 7), sc.la, sc.placement, sc.gate),
               LookupError);
}

TEST(Ledger, ServerAccessNeedsPriorRecordAndHighH) {
  Scene sc;
  MaliciousLedger ledger;
  // No H‡ yet on server 0: not counted.
  EXPECT_TRUE(record_access(ledger, server_event(0, 0, 0), sc.la, sc.placement, sc.gate)
                  .authorized);
  record_access(ledger, vm_event(1, 1, 2), sc.la, sc.placement, sc.gate);
  const AccessEvent e = record_access(ledger, server_event(0, 0, 0), sc.la, sc.placement, sc.gate);
  EXPECT_FALSE(e.authorized);
  EXPECT_EQ(ledger.user_server(U(0)), 1);
  EXPECT_EQ(ledger.server_count(S(0)), 2);
  // Same server under a hypervisor threshold above its H: authorized.
  ServerAccessGate strict{&sc.h, {}};
  strict.thresholds.h_thr = 0.95;
  EXPECT_TRUE(record_access(ledger, server_event(0, 0, 0), sc.la, sc.placement, strict)
                  .authorized);
  EXPECT_EQ(ledger.user_server(U(0)), 1);
}

TEST(Ledger, BatchRunsVmEventsBeforeServerEvents) {
  Scene sc;
  MaliciousLedger ledger;
  const auto out = record_batch(
      ledger, {server_event(0, 0, 0), vm_event(1, 1, 2)}, sc.la, sc.placement, sc.gate);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_TRUE(out[0].targets_vm());
  EXPECT_FALSE(out[1].authorized);
  EXPECT_EQ(ledger.user_total(U(0)), 1);
}

TEST(RuleClassifier, Examples) {
  MaliciousLedger ledger;
  Scene sc;
  UserRecord user;
  user.id = U(0);
  EXPECT_EQ(classify_user_rule(user, ledger, true), BehaviorClass::kTrusted);
  EXPECT_EQ(classify_user_rule(user, ledger, false), BehaviorClass::kUnknown);
  record_access(ledger, vm_event(0, 0, 2), sc.la, sc.placement, sc.gate);
  record_access(ledger, vm_event(0, 0, 2), sc.la, sc.placement, sc.gate);
  EXPECT_EQ(ledger.user_total(U(0)), 2);
  EXPECT_EQ(classify_user_rule(user, ledger, true), BehaviorClass::kNonTrusted);
  EXPECT_EQ(classify_user_rule(user, ledger, false), BehaviorClass::kNonTrusted);
}

TEST(UsageTracker, FeaturesFromHistory) {
  Scene sc;
  std::vector<VmSpec> vms{gen::vm(0, 1, 0, 2.0), gen::vm(1, 1, 1, 0.0),
                          gen::vm(2, 1, 2, 0.0), gen::vm(3, 1, 0, 6.0)};
  UsageTracker tracker(4);
  const VmScores l{0.2, 0.0, 0.0, 0.6};
  tracker.observe(3, vms, sc.placement, l);
  tracker.observe(4, vms, sc.placement, l);
  const UserUsage& u = tracker.usage(U(0));
  EXPECT_EQ(u.active_intervals, 2);
  EXPECT_EQ(u.first_interval, 3);
  EXPECT_EQ(u.vm_intervals, 4);
  MaliciousLedger ledger;
  const auto f = user_features(U(0), ledger, u, 4);
  ASSERT_EQ(f.size(), kUserFeatureCount);
  EXPECT_DOUBLE_EQ(f[3], (2.0 + 0.0 + 2.0 + 0.0) / 4.0);
  EXPECT_DOUBLE_EQ(f[4], (0.2 + 0.6 + 0.2 + 0.6) / 4.0);
  EXPECT_DOUBLE_EQ(f[5], 2.0);
}

// Random event streams: replaying the recorded outcomes reproduces Θ, any
// user with Θ >= 1 has at least one unauthorized event, every counted server
// access saw H‡ > 0, and shuffling events inside an interval changes nothing.
TEST(LedgerProperty, ReplayAndOrderInvariance) {
  gen::Source src(31);
  for (int trial = 0; trial < 2000; ++trial) {
    gen::World w = gen::world(src, 6, 3, 0.3);
    const ServerScores h = hypervisor_scores(w.servers, w.placement, w.l_of);
    Thresholds thr;
    thr.h_thr = src.real(0.0, 1.5);
    const ServerAccessGate gate{&h, thr};
    const int nv = static_cast<int>(w.vms.size());
    const int ns = static_cast<int>(w.servers.size());

    std::vector<std::vector<AccessEvent>> intervals(3);
    for (int t = 0; t < 3; ++t) {
      for (int e = 0; e < 6; ++e) {
        const int a = src.integer(0, nv - 1);
        const std::uint32_t owner = w.vms[a].owner.value;
        if (src.coin(0.6)) {
          std::vector<int> mates;
          for (int b = 0; b < nv; ++b) {
            if (b != a && w.host[b] == w.host[a]) mates.push_back(b);
          }
          if (mates.empty()) continue;
          intervals[t].push_back(vm_event(owner, a, mates[src.integer(0, static_cast<int>(mates.size()) - 1)], t));
        } else {
          intervals[t].push_back(server_event(owner, a, src.integer(0, ns - 1), t));
        }
      }
    }

    MaliciousLedger first;
    MaliciousLedger second;
    std::vector<AccessEvent> outcomes;
    std::mt19937 shuffle(static_cast<unsigned>(trial));
    for (auto& batch : intervals) {
      std::map<ServerId, int> before = first.server_counts();
      auto out = record_batch(first, batch, w.la, w.placement, gate);
      int vm_hits = 0;
      for (const auto& e : out) {
        if (e.targets_vm()) {
          ASSERT_EQ(e.authorized, raw_linked(w, e));
          vm_hits += e.authorized ? 0 : 1;
        }
      }
      for (const auto& e : out) {
        if (!e.targets_vm() && !e.authorized) {
          const ServerId s = std::get<ServerId>(e.target);
          int counted_before = before.count(s) ? before[s] : 0;
          for (const auto& x : out) {
            if (x.targets_vm() && !x.authorized && w.host[std::get<VmId>(x.target).value] ==
                                                       static_cast<int>(s.value)) {
              ++counted_before;
            }
          }
          ASSERT_GT(counted_before, 0);
          ASSERT_TRUE(thr.exceeds(h[s.value], thr.h_thr));
        }
      }
      outcomes.insert(outcomes.end(), out.begin(), out.end());
      std::shuffle(batch.begin(), batch.end(), shuffle);
      record_batch(second, batch, w.la, w.placement, gate);
    }
    ASSERT_EQ(first.server_counts(), second.server_counts());
    for (std::uint32_t u = 0; u < 3; ++u) {
      ASSERT_EQ(first.user_vm(U(u)), second.user_vm(U(u)));
      ASSERT_EQ(first.user_server(U(u)), second.user_server(U(u)));
      int replay = 0;
      for (const auto& e : outcomes) {
        if (e.actor_user == U(u) && !e.authorized) ++replay;
      }
      ASSERT_EQ(first.user_total(U(u)), replay);
      ASSERT_EQ(first.user_total(U(u)) >= 1, replay >= 1);
    }
  }
}

TEST(Forest, SeparableTrainingSetFitsExactly) {
  gen::Source src(8);
  const auto users = rule_users(src, 300);
  const RfModel model = rf_train(users, RfParams{});
  EXPECT_EQ(model.trees().size(), 21u);
  for (const auto& u : users) ASSERT_EQ(rf_predict(model, u.features), u.label);
}

TEST(Forest, HeldOutAccuracyOnRuleLabels) {
  gen::Source src(9);
  const auto train = rule_users(src, 400);
  const auto test = rule_users(src, 2000);
  const RfModel model = rf_train(train, RfParams{});
  int correct = 0;
  for (const auto& u : test) correct += rf_predict(model, u.features) == u.label ? 1 : 0;
  EXPECT_GE(correct, 0.99 * static_cast<double>(test.size()));
}

TEST(Forest, MajorityVoteMatchesVoteShare) {
  gen::Source src(10);
  auto train = rule_users(src, 200);
  for (auto& u : train) {
    if (src.coin(0.15)) u.label = 1 - u.label;  // noisy labels make trees disagree
  }
  RfParams params;
  params.trees = 3;
  const RfModel model = rf_train(train, params);
  int split_votes = 0;
  for (const auto& u : rule_users(src, 500)) {
    int ones = 0;
    for (const auto& t : model.trees()) ones += t.predict(u.features);
    ASSERT_EQ(model.predict(u.features), ones >= 2 ? 1 : 0);
    ASSERT_DOUBLE_EQ(model.vote_share(u.features), ones / 3.0);
    split_votes += (ones == 1 || ones == 2) ? 1 : 0;
  }
  EXPECT_GT(split_votes, 0);
}

TEST(Forest, DeterministicForSeed) {
  gen::Source src(11);
  const auto users = rule_users(src, 150);
  const RfModel a = rf_train(users, RfParams{});
  const RfModel b = rf_train(users, RfParams{});
  ASSERT_EQ(a.trees().size(), b.trees().size());
  for (std::size_t t = 0; t < a.trees().size(); ++t) {
    ASSERT_EQ(a.trees()[t].nodes.size(), b.trees()[t].nodes.size());
    for (std::size_t n = 0; n < a.trees()[t].nodes.size(); ++n) {
      EXPECT_EQ(a.trees()[t].nodes[n].feature, b.trees()[t].nodes[n].feature);
      EXPECT_EQ(a.trees()[t].nodes[n].threshold, b.trees()[t].nodes[n].threshold);
      EXPECT_EQ(a.trees()[t].nodes[n].label, b.trees()[t].nodes[n].label);
    }
  }
}

TEST(Forest, SingleClassGivesConstantModel) {
  std::vector<RfSample> users(5, RfSample{{0, 0, 0, 1, 0.5, 3}, 0});
  const RfModel model = rf_train(users, RfParams{});
  EXPECT_TRUE(model.constant());
  EXPECT_EQ(rf_predict(model, {9, 9, 0, 1, 0.5, 3}), 0);
}

TEST(Forest, DimensionMismatchIsInputError) {
  gen::Source src(12);
  const RfModel model = rf_train(rule_users(src, 50), RfParams{});
  EXPECT_THROW(rf_predict(model, {1.0, 2.0}), InputError);
}

TEST(Forest, AgreesWithRuleOnThetaEncodedUsers) {
  gen::Source src(13);
  const RfModel model = rf_train(rule_users(src, 400), RfParams{});
  MaliciousLedger empty;
  for (const auto& u : rule_users(src, 300)) {
    UserRecord rec;
    const BehaviorClass rule = u.features[0] > 0 ? BehaviorClass::kNonTrusted
                                                 : classify_user_rule(rec, empty, true);
    ASSERT_EQ(rf_predict(model, u.features), static_cast<int>(rule));
  }
}
