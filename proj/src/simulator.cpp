#include "cloudrisk/simulator.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <set>
#include <tuple>

#include "cloudrisk/errors.hpp"

namespace cloudrisk {

GroundTruth generate_threats(const std::vector<VmId>& scored,
                             const ClusterState& cluster,
                             const PlacementMap& placement,
                             const VmScores& l_of, const ServerScores& h_of,
                             const Thresholds& thresholds,
                             const VmMask& malicious, int max_chain,
                             int interval) {
  GroundTruth gt;
  gt.labels.assign(scored.size(), 0);
  gt.attackers.assign(scored.size(), std::nullopt);
  std::set<std::tuple<std::uint32_t, int, std::uint32_t>> seen;
  auto emit = [&](VmId actor, std::variant<VmId, ServerId> target) {
    const int kind = std::holds_alternative<VmId>(target) ? 0 : 1;
    const std::uint32_t id = kind == 0 ? std::get<VmId>(target).value
                                       : std::get<ServerId>(target).value;
    if (!seen.emplace(actor.value, kind, id).second) return;
    AccessEvent e;
    e.actor_user = cluster.vm(actor).owner;
    e.actor_vm = actor;
    e.target = target;
    e.interval = interval;
    e.authorized = false;
    gt.events.push_back(e);
  };

  for (std::size_t i = 0; i < scored.size(); ++i) {
    const VmId v = scored[i];
    if (malicious[v.value]) continue;
    const ThreatFinding f = assess_threat(v, placement, cluster.la, l_of, h_of,
                                          thresholds, malicious, max_chain);
    if (!f.alloc()) continue;
    gt.labels[i] = 1;
    if (f.config()) {
      gt.attackers[i] = f.coresident_attackers.front();
    } else {
      gt.attackers[i] = f.chain_attacker;
    }
    for (VmId m : f.coresident_attackers) {
      if (f.l_clause) emit(m, v);
      if (f.h_clause) emit(m, placement.host(v));
    }
    if (f.cascade) emit(*f.chain_attacker, f.chain.front());
  }
  return gt;
}

namespace {

class Simulation {
 public:
  Simulation(const SimConfig& config, const SimInputs& inputs,
             const SimObserver& observer)
      : cfg_(config),
        inputs_(inputs),
        observer_(observer),
        cluster_(build_cluster(config.cluster)),
        root_(config.cluster.seed),
        owner_rng_(root_.fork(10)),
        policy_(config.policy, root_.fork(11).next()),
        usage_(cluster_.users.size()) {
    validate_config();
    const std::size_t n = cluster_.vms.size();
    l_of_ = vulnerability_scores(cluster_.vms);
    malicious_.assign(n, false);
    for (const auto& vm : cluster_.vms) refresh_malicious(vm.id);
    terminated_.assign(n, false);
    series_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (i < inputs.traces.size()) {
        series_[i] = inputs.traces[i];
      } else {
        series_[i].vm_id = static_cast<std::uint32_t>(i);
      }
    }
    if (inputs.traces.size() < n) {
      spdlog::warn("{} VMs have no trace and never become active",
                   n - inputs.traces.size());
    }
    full_db_.feature_names = threat_feature_names();
    for (const auto& r : inputs.initial_db) {
      full_db_.add(threat_features(r), r.vm_status);
      result_.threat_db.push_back(r);
    }
  }

  SimResult run() {
    const int wanted = cfg_.history + cfg_.burn_in + cfg_.intervals;
    std::size_t available = std::numeric_limits<std::size_t>::max();
    for (std::size_t i = 0; i < inputs_.traces.size() && i < series_.size(); ++i) {
      available = std::min(available, inputs_.traces[i].length());
    }
    if (inputs_.traces.empty()) available = 0;
    int live = cfg_.intervals;
    if (available < static_cast<std::size_t>(wanted)) {
      const int room = static_cast<int>(available) - cfg_.history - cfg_.burn_in;
      live = std::max(0, room);
      result_.truncated = true;
      spdlog::warn("traces end after {} samples; running {} of {} intervals",
                   available, live, cfg_.intervals);
      if (static_cast<int>(available) < cfg_.history + cfg_.burn_in) {
        throw InputError("traces are shorter than history plus burn-in");
      }
    }

    init_forecaster();
    if (cfg_.burn_in == 0) try_bootstrap();
    for (int step = 0; step < cfg_.burn_in + live; ++step) {
      interval_step(step);
      if (step + 1 == cfg_.burn_in) try_bootstrap();
    }
    for (auto& u : cluster_.users) {
      u.access_history.clear();
      for (const auto& e : result_.ledger.events()) {
        if (e.actor_user == u.id) u.access_history.push_back(e);
      }
    }
    result_.users = cluster_.users;
    result_.model = model_;
    return std::move(result_);
  }

 private:
  void validate_config() const {
    if (cfg_.intervals < 0 || cfg_.burn_in < 0 || cfg_.history < 0) {
      throw ConfigError("interval counts must be non-negative");
    }
    if (cfg_.retrain_every < 1 || cfg_.forecaster_retrain_every < 1 ||
        cfg_.retrain_window == 0) {
      throw ConfigError("retraining cadence and window must be positive");
    }
    if (cfg_.interval_minutes < 1) {
      throw ConfigError("interval length must be positive");
    }
  }

  void refresh_malicious(VmId v) {
    malicious_[v.value] =
        cluster_.user(cluster_.vm(v).owner).is_malicious_ground_truth;
  }

  std::vector<UtilizationSeries> prefix(int t) const {
    std::vector<UtilizationSeries> out;
    out.reserve(series_.size());
    for (const auto& s : series_) {
      UtilizationSeries p;
      p.vm_id = s.vm_id;
      const auto n = std::min<std::size_t>(s.length(), static_cast<std::size_t>(t));
      p.cpu.assign(s.cpu.begin(), s.cpu.begin() + static_cast<std::ptrdiff_t>(n));
      out.push_back(std::move(p));
    }
    return out;
  }

  void init_forecaster() {
    ForecasterConfig fallback = cfg_.forecaster;
    fallback.kind = ForecasterKind::kExponentialSmoothing;
    forecaster_ = ForecasterModel(fallback);
    retrain_forecaster(cfg_.history);
  }

  void retrain_forecaster(int t) {
    if (cfg_.forecaster.kind == ForecasterKind::kExponentialSmoothing) {
      forecaster_ = ForecasterModel(cfg_.forecaster);
      return;
    }
    if (t <= cfg_.forecaster.window) return;
    try {
      ForecasterModel m = train_forecaster(prefix(t), cfg_.forecaster);
      if (!m.w1().empty()) forecaster_ = std::move(m);
    } catch (const InputError&) {
      // Keep the current forecaster until some history exists.
    }
  }

  double sample(const std::vector<double>& v, int t) const {
    return t >= 0 && static_cast<std::size_t>(t) < v.size() ? v[t] : 0.0;
  }

  BehaviorClass classify(UserId u, bool* trained_forest,
                         const RfModel* forest) const {
    const UserUsage& use = usage_.usage(u);
    BehaviorClass rule = classify_user_rule(cluster_.user(u), result_.ledger,
                                            use.has_history());
    if (!use.has_history() || !*trained_forest) return rule;
    return forest->predict(user_features(u, result_.ledger, use, step_)) == 1
               ? BehaviorClass::kNonTrusted
               : BehaviorClass::kTrusted;
  }

  void classify_users() {
    RfModel forest;
    bool trained = false;
    if (cfg_.use_forest) {
      std::vector<RfSample> rows;
      bool zero = false;
      bool one = false;
      for (const auto& u : cluster_.users) {
        const UserUsage& use = usage_.usage(u.id);
        if (!use.has_history()) continue;
        const int label = result_.ledger.user_total(u.id) > 0 ? 1 : 0;
        (label ? one : zero) = true;
        rows.push_back({user_features(u.id, result_.ledger, use, step_), label});
      }
      if (zero && one) {
        RfParams p = cfg_.forest;
        p.seed = root_.fork(13).next();
        forest = rf_train(rows, p);
        trained = true;
      }
    }
    for (auto& u : cluster_.users) {
      u.behavior_class = classify(u.id, &trained, &forest);
    }
  }

  void try_bootstrap() {
    if (model_ || !cfg_.predictor) return;
    if (full_db_.size() < 2 || !full_db_.has_both_classes()) return;
    BootstrapInfo info;
    const std::size_t keep = std::min(cfg_.rfe_keep, full_db_.dimension());
    RfeResult rfe = rfe_select(full_db_, keep);
    info.selected_features = rfe.selected;
    info.selected_names = rfe.reduced.feature_names;
    auto [train, test] =
        split_train_test(rfe.reduced, cfg_.train_ratio, root_.fork(12).next());
    info.train_rows = train.size();
    info.test_rows = test.size();
    GbtModel m = train_gbt(train, cfg_.gbt);
    std::vector<double> probs;
    for (const auto& row : test.rows) probs.push_back(m.predict(row));
    info.test_metrics =
        evaluate(probs, test.labels, cfg_.gbt.decision_threshold);
    selected_ = rfe.selected;
    selected_db_ = rfe.reduced;
    model_ = std::move(m);
    result_.bootstrap = std::move(info);
    pending_ = TrainingSet{};
    pending_.feature_names = selected_db_.feature_names;
  }

  std::vector<double> project(const std::vector<double>& full) const {
    std::vector<double> out;
    out.reserve(selected_.size());
    for (auto f : selected_) out.push_back(full[f]);
    return out;
  }

  void interval_step(int step) {
    step_ = step;
    const int t = cfg_.history + step;
    const int interval = step - cfg_.burn_in;
    const bool live = interval >= 0;
    const std::size_t n = cluster_.vms.size();
    const auto w = static_cast<std::size_t>(forecaster_.window());

    // Forecast activity from the samples before t.
    std::vector<ActivityForecast> fc(n);
    std::vector<bool> forecast_active(n, false);
    for (std::size_t v = 0; v < n; ++v) {
      const auto& cpu = series_[v].cpu;
      const std::size_t end = std::min<std::size_t>(cpu.size(), t);
      const std::size_t begin = end > w ? end - w : 0;
      fc[v] = predict_active(
          forecaster_,
          std::vector<double>(cpu.begin() + static_cast<std::ptrdiff_t>(begin),
                              cpu.begin() + static_cast<std::ptrdiff_t>(end)));
      forecast_active[v] = fc[v].active;
    }

    // Departures, then arrivals through the placement policy.
    for (VmId v : placement().assigned_vms()) {
      if (!forecast_active[v.value]) {
        placement().remove(v);
        terminated_[v.value] = true;
      }
    }
    std::vector<VmId> arrivals;
    for (std::size_t v = 0; v < n; ++v) {
      const VmId id(static_cast<std::uint32_t>(v));
      if (!forecast_active[v] || placement().is_assigned(id)) continue;
      if (terminated_[v]) {
        cluster_.vm(id).owner = UserId(static_cast<std::uint32_t>(
            owner_rng_.index(cluster_.users.size())));
        refresh_malicious(id);
        terminated_[v] = false;
      }
      arrivals.push_back(id);
    }
    const BatchPlacement batch = place_batch(policy_, placement(), arrivals,
                                             cluster_.vms, cluster_.servers);
    const std::vector<VmId> scored = placement().assigned_vms();

    // User classes from history up to the previous interval.
    classify_users();
    usage_.observe(step, cluster_.vms, placement(), l_of_);
    std::vector<BehaviorClass> owner_class(n, BehaviorClass::kUnknown);
    VmMask flagged(n, false);
    for (std::size_t v = 0; v < n; ++v) {
      owner_class[v] = cluster_.user(cluster_.vms[v].owner).behavior_class;
      flagged[v] = owner_class[v] == BehaviorClass::kNonTrusted;
    }

    // Risk vectors and feature rows.
    const ServerScores h_of =
        hypervisor_scores(cluster_.servers, placement(), l_of_);
    std::vector<ThreatRecord> records(scored.size());
    for (std::size_t i = 0; i < scored.size(); ++i) {
      const VmId v = scored[i];
      const RiskVector rv = risk_vector(v, placement(), cluster_.la, l_of_,
                                        h_of, owner_class, cfg_.risk);
      const ThreatFinding seen =
          assess_threat(v, placement(), cluster_.la, l_of_, h_of,
                        cfg_.thresholds, flagged, cfg_.risk.max_chain);
      ThreatRecord& r = records[i];
      r.victim_vm_id = v.value;
      r.server_id = placement().host(v).value;
      r.vm_cpu = sample(series_[v.value].cpu, t);
      r.vm_mem = sample(series_[v.value].mem, t);
      r.vm_bw = sample(series_[v.value].bw, t);
      r.L = rv.L;
      r.H = rv.H;
      r.C = rv.C;
      r.N = rv.N;
      r.r_score = aggregate_risk(rv.L, rv.H, rv.C, rv.N);
      r.interval = interval;
      r.w_p = fc[v.value].w_p;
      r.owner_class = static_cast<int>(owner_class[v.value]);
      r.coresident_behavior = static_cast<int>(rv.coresident_behavior);
      r.has_malicious_coresident = rv.has_malicious_coresident ? 1 : 0;
      r.cascade_exposure = seen.chain_product;
      r.threat_indicator = !flagged[v.value] && seen.alloc() ? 1 : 0;
      r.coresident_count =
          static_cast<int>(placement().hosted(placement().host(v)).size()) - 1;
    }

    // Threat prediction for the scored (forecast-active, hosted) VMs.
    const bool predicting = live && cfg_.predictor && model_.has_value();
    std::vector<double> probs;
    if (predicting) {
      probs.reserve(records.size());
      for (const auto& r : records) {
        probs.push_back(model_->predict(project(threat_features(r))));
      }
    }

    // Ground truth and the ledger.
    const GroundTruth gt =
        generate_threats(scored, cluster_, placement(), l_of_, h_of,
                         cfg_.thresholds, malicious_, cfg_.risk.max_chain,
                         interval);
    for (std::size_t i = 0; i < records.size(); ++i) {
      records[i].vm_status = gt.labels[i];
      if (gt.attackers[i]) records[i].attacker_vm_id = gt.attackers[i]->value;
    }
    const ServerAccessGate gate{&h_of, cfg_.thresholds};
    std::vector<AccessEvent> recorded = record_batch(
        result_.ledger, gt.events, cluster_.la, placement(), gate);

    IntervalReport report;
    report.interval = interval;
    report.minutes = (interval + 1) * cfg_.interval_minutes;
    report.active_vms = static_cast<int>(scored.size());
    report.deferred_vms = static_cast<int>(batch.deferred.size());
    for (int y : gt.labels) report.at += y;
    report.ut = report.at;
    if (predicting) {
      if (auto m = evaluate(probs, gt.labels, cfg_.gbt.decision_threshold)) {
        report.metrics_defined = true;
        report.pt = m->confusion.predicted();
        report.ut = m->confusion.unpredicted();
        report.true_positives = m->confusion.tp;
        report.false_positives = m->confusion.fp;
        report.true_negatives = m->confusion.tn;
        report.accuracy = m->accuracy;
        report.precision = m->precision;
        report.recall = m->recall;
        report.f1 = m->f1;
        report.mse = m->mse;
        report.mae = m->mae;
      }
    }
    for (const auto& u : cluster_.users) {
      if (u.behavior_class == BehaviorClass::kNonTrusted) ++report.nontrusted_users;
      if (u.behavior_class == BehaviorClass::kUnknown) ++report.unknown_users;
    }

    // Migration of VMs predicted to be under threat.
    std::optional<PlacementMap> before;
    if (observer_) before = placement();
    MigrationPlan plan;
    if (predicting) {
      std::vector<VmId> candidates;
      for (std::size_t i = 0; i < scored.size(); ++i) {
        const int predicted = probs[i] >= cfg_.gbt.decision_threshold ? 1 : 0;
        if (mig_status(predicted)) candidates.push_back(scored[i]);
      }
      RiskView view{cluster_.servers, cluster_.vms,    &cluster_.la, &l_of_,
                    &flagged,         cfg_.thresholds, cfg_.risk.max_chain};
      plan = migrate_threatened(candidates, placement(), view, cfg_.topology,
                                cfg_.transition_energy);
      for (const auto& m : plan.moves) {
        policy_.remember(cluster_.vm(m.vm).owner, m.destination);
      }
      report.migrations = static_cast<int>(plan.moves.size());
      report.quarantined = static_cast<int>(plan.quarantined.size());
      report.woken_servers = static_cast<int>(plan.woken.size());
      report.migration_cost = plan.total_cost;
    }

    // Load accounting after migration.
    std::vector<VmUsage> use(n);
    for (std::size_t v = 0; v < n; ++v) {
      use[v] = {sample(series_[v].cpu, t), sample(series_[v].mem, t)};
    }
    report.ru_dc =
        datacenter_utilization(cluster_.servers, placement(), cluster_.vms, use);
    report.pw_dc =
        datacenter_power(cluster_.servers, placement(), cluster_.vms, use);
    report.active_servers = static_cast<int>(placement().active_server_count());

    // Threat database and scheduled retraining.
    for (const auto& r : records) {
      std::vector<double> x = threat_features(r);
      if (model_) pending_.add(project(x), r.vm_status);
      full_db_.add(std::move(x), r.vm_status);
      result_.threat_db.push_back(r);
    }
    if (live && cfg_.predictor && (interval + 1) % cfg_.retrain_every == 0) {
      if (model_) {
        *model_ = retrain_online(*model_, selected_db_, pending_,
                                 cfg_.retrain_window);
        pending_.rows.clear();
        pending_.labels.clear();
        report.model_retrained = true;
      } else {
        try_bootstrap();
        report.model_retrained = model_.has_value();
      }
    }
    if ((step + 1) % cfg_.forecaster_retrain_every == 0) {
      retrain_forecaster(t + 1);
    }

    if (observer_) {
      IntervalSnapshot snap;
      snap.interval = interval;
      snap.live = live;
      snap.cluster = &cluster_;
      snap.placement_before = std::move(*before);
      snap.placement_after = placement();
      snap.l_of = l_of_;
      snap.h_of = h_of;
      snap.malicious = malicious_;
      snap.flagged = flagged;
      snap.forecast_active = forecast_active;
      snap.scored = scored;
      snap.records = records;
      snap.probabilities = probs;
      snap.events = std::move(recorded);
      snap.plan = plan;
      observer_(snap);
    }
    if (live) result_.reports.push_back(report);
  }

  PlacementMap& placement() { return cluster_.placement; }

  const SimConfig& cfg_;
  const SimInputs& inputs_;
  const SimObserver& observer_;
  ClusterState cluster_;
  Rng root_;
  Rng owner_rng_;
  PolicyContext policy_;
  UsageTracker usage_;
  VmScores l_of_;
  VmMask malicious_;
  std::vector<bool> terminated_;
  std::vector<UtilizationSeries> series_;
  ForecasterModel forecaster_;
  TrainingSet full_db_;
  TrainingSet selected_db_;
  TrainingSet pending_;
  std::vector<std::size_t> selected_;
  std::optional<GbtModel> model_;
  SimResult result_;
  int step_ = 0;
};

}  // namespace

SimResult run(const SimConfig& config, const SimInputs& inputs,
              const SimObserver& observer) {
  Simulation sim(config, inputs, observer);
  return sim.run();
}

}  // namespace cloudrisk
