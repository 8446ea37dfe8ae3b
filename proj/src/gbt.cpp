#include "cloudrisk/gbt.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "cloudrisk/errors.hpp"
#include "cloudrisk/rng.hpp"

namespace cloudrisk {

using nlohmann::json;

// ---------------------------------------------------------------------------
// TrainingSet

void TrainingSet::add(std::vector<double> row, int label) {
  if (!feature_names.empty() && row.size() != feature_names.size()) {
    throw InputError("row has " + std::to_string(row.size()) +
                     " features, expected " +
                     std::to_string(feature_names.size()));
  }
  if (label != 0 && label != 1) throw InputError("labels must be 0 or 1");
  rows.push_back(std::move(row));
  labels.push_back(label);
}

void TrainingSet::check() const {
  if (rows.size() != labels.size()) {
    throw InputError("row and label counts differ");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != feature_names.size()) {
      throw InputError("row " + std::to_string(i) + " has the wrong dimension");
    }
    if (labels[i] != 0 && labels[i] != 1) {
      throw InputError("row " + std::to_string(i) + " has a non-binary label");
    }
  }
}

TrainingSet TrainingSet::subset(const std::vector<std::size_t>& indices) const {
  TrainingSet out;
  out.feature_names = feature_names;
  out.rows.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (auto i : indices) {
    out.rows.push_back(rows.at(i));
    out.labels.push_back(labels.at(i));
  }
  return out;
}

TrainingSet TrainingSet::tail(std::size_t n) const {
  const std::size_t start = rows.size() > n ? rows.size() - n : 0;
  std::vector<std::size_t> idx(rows.size() - start);
  std::iota(idx.begin(), idx.end(), start);
  return subset(idx);
}

TrainingSet TrainingSet::project(const std::vector<std::size_t>& features) const {
  TrainingSet out;
  for (auto f : features) out.feature_names.push_back(feature_names.at(f));
  out.labels = labels;
  out.rows.reserve(rows.size());
  for (const auto& r : rows) {
    std::vector<double> p;
    p.reserve(features.size());
    for (auto f : features) p.push_back(r.at(f));
    out.rows.push_back(std::move(p));
  }
  return out;
}

bool TrainingSet::has_both_classes() const {
  bool zero = false;
  bool one = false;
  for (int y : labels) (y == 1 ? one : zero) = true;
  return zero && one;
}

// ---------------------------------------------------------------------------
// Trees and model

double GbtTree::output(const std::vector<double>& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    const GbtNode& n = nodes[i];
    const double v = x[n.feature];
    if (std::isnan(v)) {
      i = n.default_left ? n.left : n.right;
    } else {
      i = v <= n.threshold ? n.left : n.right;
    }
  }
  return nodes[i].weight;
}

int GbtTree::leaf_count() const {
  return static_cast<int>(std::count_if(
      nodes.begin(), nodes.end(), [](const GbtNode& n) { return n.feature < 0; }));
}

bool operator==(const GbtTree& a, const GbtTree& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const GbtNode& x = a.nodes[i];
    const GbtNode& y = b.nodes[i];
    if (x.feature != y.feature || x.threshold != y.threshold ||
        x.left != y.left || x.right != y.right ||
        x.default_left != y.default_left || x.weight != y.weight ||
        x.gain != y.gain) {
      return false;
    }
  }
  return true;
}

bool operator==(const GbtModel& a, const GbtModel& b) {
  const GbtParams& p = a.params_;
  const GbtParams& q = b.params_;
  return p.rounds == q.rounds && p.max_depth == q.max_depth &&
         p.learning_rate == q.learning_rate && p.lambda == q.lambda &&
         p.gamma == q.gamma && p.decision_threshold == q.decision_threshold &&
         a.feature_names_ == b.feature_names_ &&
         a.base_score_ == b.base_score_ && a.trees_ == b.trees_;
}

double GbtModel::raw_score(const std::vector<double>& x) const {
  if (x.size() != dimension()) {
    throw InputError("feature vector has dimension " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(dimension()));
  }
  double sum = 0.0;
  for (const auto& t : trees_) sum += t.output(x);
  return base_score_ + params_.learning_rate * sum;
}

double GbtModel::predict(const std::vector<double>& x) const {
  return sigmoid(raw_score(x));
}

int GbtModel::classify(const std::vector<double>& x) const {
  return predict(x) >= params_.decision_threshold ? 1 : 0;
}

std::vector<double> GbtModel::feature_importance() const {
  std::vector<double> out(dimension(), 0.0);
  for (const auto& t : trees_) {
    for (const auto& n : t.nodes) {
      if (n.feature >= 0) out[n.feature] += n.gain;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_loss(int label, double raw_score) {
  const double softplus =
      std::max(raw_score, 0.0) + std::log1p(std::exp(-std::abs(raw_score)));
  return softplus - label * raw_score;
}

std::pair<std::vector<double>, std::vector<double>> grad_hess(
    const std::vector<int>& labels, const std::vector<double>& raw_scores) {
  if (labels.size() != raw_scores.size()) {
    throw InputError("labels and scores differ in length");
  }
  std::vector<double> g(labels.size());
  std::vector<double> h(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = sigmoid(raw_scores[i]);
    g[i] = p - labels[i];
    h[i] = p * (1.0 - p);
  }
  return {std::move(g), std::move(h)};
}

std::pair<TrainingSet, TrainingSet> split_train_test(const TrainingSet& data,
                                                     double ratio,
                                                     std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw InputError("split ratio must lie strictly between 0 and 1");
  }
  if (data.size() < 2) throw InputError("split needs at least two rows");
  std::vector<std::size_t> idx(data.size());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  const auto n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(data.size())));
  if (n_train == 0 || n_train >= data.size()) {
    throw InputError("split leaves one side empty");
  }
  std::vector<std::size_t> train(idx.begin(), idx.begin() + n_train);
  std::vector<std::size_t> test(idx.begin() + n_train, idx.end());
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {data.subset(train), data.subset(test)};
}

// ---------------------------------------------------------------------------
// Tree growth

double split_gain(double gl, double hl, double gr, double hr, double lambda,
                  double gamma) {
  const double g = gl + gr;
  const double h = hl + hr;
  return 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) -
                g * g / (h + lambda)) -
         gamma;
}

double leaf_weight(double g_sum, double h_sum, double lambda) {
  return -g_sum / (h_sum + lambda);
}

SplitChoice best_split(const TrainingSet& data, const std::vector<double>& g,
                       const std::vector<double>& h,
                       const std::vector<std::size_t>& rows,
                       const GbtParams& params) {
  SplitChoice best;
  std::vector<std::size_t> present;
  present.reserve(rows.size());
  for (std::size_t f = 0; f < data.dimension(); ++f) {
    present.clear();
    double gm = 0.0;
    double hm = 0.0;
    for (auto r : rows) {
      if (std::isnan(data.rows[r][f])) {
        gm += g[r];
        hm += h[r];
      } else {
        present.push_back(r);
      }
    }
    if (present.size() < 2) continue;
    const bool any_missing = present.size() < rows.size();
    std::stable_sort(present.begin(), present.end(),
                     [&](std::size_t a, std::size_t b) {
                       return data.rows[a][f] < data.rows[b][f];
                     });
    double gp = 0.0;
    double hp = 0.0;
    for (auto r : present) {
      gp += g[r];
      hp += h[r];
    }
    double gl = 0.0;
    double hl = 0.0;
    for (std::size_t i = 0; i + 1 < present.size(); ++i) {
      gl += g[present[i]];
      hl += h[present[i]];
      const double a = data.rows[present[i]][f];
      const double b = data.rows[present[i + 1]][f];
      if (a == b) continue;
      const double gr = gp - gl;
      const double hr = hp - hl;
      double gain = split_gain(gl + gm, hl + hm, gr, hr, params.lambda,
                               params.gamma);
      bool left = true;
      if (any_missing) {
        const double alt = split_gain(gl, hl, gr + gm, hr + hm, params.lambda,
                                      params.gamma);
        if (alt > gain) {
          gain = alt;
          left = false;
        }
      }
      if (gain > best.gain) {
        double thr = 0.5 * (a + b);
        if (!(thr < b)) thr = a;
        best.found = true;
        best.feature = static_cast<int>(f);
        best.threshold = thr;
        best.default_left = left;
        best.gain = gain;
      }
    }
  }
  return best;
}

namespace {

class GbtTreeBuilder {
 public:
  GbtTreeBuilder(const TrainingSet& data, const std::vector<double>& g,
                 const std::vector<double>& h, const GbtParams& params)
      : data_(data), g_(g), h_(h), params_(params) {}

  GbtTree build() {
    std::vector<std::size_t> rows(data_.size());
    std::iota(rows.begin(), rows.end(), 0);
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(const std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    double gs = 0.0;
    double hs = 0.0;
    for (auto r : rows) {
      gs += g_[r];
      hs += h_[r];
    }
    tree_.nodes[index].weight = leaf_weight(gs, hs, params_.lambda);
    if (depth >= params_.max_depth || rows.size() < 2) return index;
    const SplitChoice split = best_split(data_, g_, h_, rows, params_);
    if (!split.found) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
      const double v = data_.rows[r][split.feature];
      const bool go_left =
          std::isnan(v) ? split.default_left : v <= split.threshold;
      (go_left ? left : right).push_back(r);
    }
    GbtNode& node = tree_.nodes[index];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.default_left = split.default_left;
    node.gain = split.gain;
    node.weight = 0.0;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = r;
    return index;
  }

  const TrainingSet& data_;
  const std::vector<double>& g_;
  const std::vector<double>& h_;
  const GbtParams& params_;
  GbtTree tree_;
};

}  // namespace

GbtModel fit_round(GbtModel model, const TrainingSet& train,
                   const std::vector<double>& g, const std::vector<double>& h) {
  if (g.size() != train.size() || h.size() != train.size()) {
    throw InputError("gradient length does not match the training rows");
  }
  GbtTreeBuilder builder(train, g, h, model.params());
  model.append(builder.build());
  return model;
}

double prior_log_odds(const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  double p = static_cast<double>(std::accumulate(labels.begin(), labels.end(), 0)) /
             static_cast<double>(labels.size());
  p = std::clamp(p, 1e-6, 1.0 - 1e-6);
  return std::log(p / (1.0 - p));
}

GbtModel train_gbt(const TrainingSet& train, const GbtParams& params) {
  train.check();
  if (train.size() == 0) throw InputError("training set is empty");
  if (params.rounds < 0 || params.max_depth < 0 || params.lambda < 0.0 ||
      params.learning_rate <= 0.0) {
    throw ConfigError("invalid boosting parameters");
  }
  GbtModel model(params, train.feature_names, prior_log_odds(train.labels));
  std::vector<double> raw(train.size(), model.base_score());
  for (int round = 0; round < params.rounds; ++round) {
    auto [g, h] = grad_hess(train.labels, raw);
    model = fit_round(std::move(model), train, g, h);
    const GbtTree& tree = model.trees().back();
    for (std::size_t i = 0; i < train.size(); ++i) {
      raw[i] += params.learning_rate * tree.output(train.rows[i]);
    }
  }
  return model;
}

double regularized_objective(const GbtModel& model, const TrainingSet& data) {
  double loss = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    loss += logistic_loss(data.labels[i], model.raw_score(data.rows[i]));
  }
  const GbtParams& p = model.params();
  for (const auto& t : model.trees()) {
    double w2 = 0.0;
    for (const auto& n : t.nodes) {
      if (n.feature < 0) {
        const double w = p.learning_rate * n.weight;
        w2 += w * w;
      }
    }
    loss += p.gamma * t.leaf_count() + 0.5 * p.lambda * w2;
  }
  return loss;
}

RfeResult rfe_select(const TrainingSet& data, std::size_t keep) {
  data.check();
  if (keep < 1 || keep > data.dimension()) {
    throw InputError("RFE keep count must lie in [1, dimension]");
  }
  std::vector<std::size_t> selected(data.dimension());
  std::iota(selected.begin(), selected.end(), 0);
  GbtParams inner;
  inner.rounds = 10;
  inner.max_depth = 3;
  while (selected.size() > keep) {
    const GbtModel m = train_gbt(data.project(selected), inner);
    const std::vector<double> imp = m.feature_importance();
    std::size_t drop = 0;
    for (std::size_t i = 1; i < imp.size(); ++i) {
      if (imp[i] <= imp[drop]) drop = i;
    }
    selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(drop));
  }
  return {data.project(selected), selected};
}

GbtModel retrain_online(const GbtModel& model, TrainingSet& db,
                        const TrainingSet& new_rows, std::size_t window) {
  if (window == 0) throw InputError("retraining window must be positive");
  if (new_rows.size() == 0) return model;
  if (db.feature_names.empty()) db.feature_names = new_rows.feature_names;
  for (std::size_t i = 0; i < new_rows.size(); ++i) {
    db.add(new_rows.rows[i], new_rows.labels[i]);
  }
  const TrainingSet recent = db.tail(window);
  if (!recent.has_both_classes()) {
    spdlog::warn("retraining window holds a single class; keeping the "
                 "previous model");
    return model;
  }
  return train_gbt(recent, model.params());
}

// ---------------------------------------------------------------------------
// Serialization

json gbt_to_json(const GbtModel& model) {
  const GbtParams& p = model.params();
  json trees = json::array();
  for (const auto& t : model.trees()) {
    json nodes = json::array();
    for (const auto& n : t.nodes) {
      nodes.push_back({{"feature", n.feature},
                       {"threshold", n.threshold},
                       {"left", n.left},
                       {"right", n.right},
                       {"default_left", n.default_left},
                       {"weight", n.weight},
                       {"gain", n.gain}});
    }
    trees.push_back({{"nodes", std::move(nodes)}});
  }
  return {{"format", "cloudrisk-gbt"},
          {"version", kGbtFormatVersion},
          {"params",
           {{"rounds", p.rounds},
            {"max_depth", p.max_depth},
            {"learning_rate", p.learning_rate},
            {"lambda", p.lambda},
            {"gamma", p.gamma},
            {"decision_threshold", p.decision_threshold}}},
          {"feature_names", model.feature_names()},
          {"base_score", model.base_score()},
          {"trees", std::move(trees)}};
}

GbtModel gbt_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "cloudrisk-gbt") {
      throw InputError("document is not a boosted-tree model");
    }
    const int version = doc.at("version").get<int>();
    if (version != kGbtFormatVersion) {
      throw VersionError("gbt model", version, kGbtFormatVersion);
    }
    const json& pj = doc.at("params");
    GbtParams p;
    p.rounds = pj.at("rounds").get<int>();
    p.max_depth = pj.at("max_depth").get<int>();
    p.learning_rate = pj.at("learning_rate").get<double>();
    p.lambda = pj.at("lambda").get<double>();
    p.gamma = pj.at("gamma").get<double>();
    p.decision_threshold = pj.at("decision_threshold").get<double>();
    GbtModel model(p, doc.at("feature_names").get<std::vector<std::string>>(),
                   doc.at("base_score").get<double>());
    for (const auto& tj : doc.at("trees")) {
      GbtTree t;
      for (const auto& nj : tj.at("nodes")) {
        GbtNode n;
        n.feature = nj.at("feature").get<int>();
        n.threshold = nj.at("threshold").get<double>();
        n.left = nj.at("left").get<int>();
        n.right = nj.at("right").get<int>();
        n.default_left = nj.at("default_left").get<bool>();
        n.weight = nj.at("weight").get<double>();
        n.gain = nj.at("gain").get<double>();
        t.nodes.push_back(n);
      }
      const int count = static_cast<int>(t.nodes.size());
      for (const auto& n : t.nodes) {
        if (n.feature >= static_cast<int>(model.dimension()) ||
            (n.feature >= 0 &&
             (n.left <= 0 || n.right <= 0 || n.left >= count ||
              n.right >= count))) {
          throw InputError("model tree has an invalid node reference");
        }
      }
      if (t.nodes.empty()) throw InputError("model tree has no nodes");
      model.append(std::move(t));
    }
    return model;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model document: ") + e.what());
  }
}

void save_gbt(const GbtModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << gbt_to_json(model).dump(1) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

GbtModel load_gbt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError(path + ": truncated or malformed JSON at byte offset " +
                     std::to_string(e.byte));
  }
  return gbt_from_json(doc);
}

}  // namespace cloudrisk
