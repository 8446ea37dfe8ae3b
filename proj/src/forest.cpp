#include "cloudrisk/forest.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cloudrisk/errors.hpp"
#include "cloudrisk/rng.hpp"

namespace cloudrisk {

int RfTree::predict(const std::vector<double>& x) const {
  int i = 0;
  while (nodes[i].feature >= 0) {
    const Node& n = nodes[i];
    i = x[n.feature] <= n.threshold ? n.left : n.right;
  }
  return nodes[i].label;
}

int RfModel::predict(const std::vector<double>& x) const {
  if (x.size() != dimension_) {
    throw InputError("feature vector has dimension " + std::to_string(x.size()) +
                     ", model expects " + std::to_string(dimension_));
  }
  if (trees_.empty()) return constant_label_;
  std::size_t ones = 0;
  for (const auto& t : trees_) ones += t.predict(x) == 1 ? 1 : 0;
  return 2 * ones > trees_.size() ? 1 : 0;
}

double RfModel::vote_share(const std::vector<double>& x) const {
  if (trees_.empty()) return constant_label_;
  const int ones = std::accumulate(
      trees_.begin(), trees_.end(), 0,
      [&](int acc, const RfTree& t) { return acc + t.predict(x); });
  return static_cast<double>(ones) / static_cast<double>(trees_.size());
}

namespace {

double gini(int ones, int total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(ones) / total;
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<RfSample>& data, const RfParams& params,
              Rng& rng)
      : data_(data), params_(params), rng_(rng) {
    const std::size_t d = data.front().features.size();
    try_features_ = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(d)))));
  }

  RfTree build(std::vector<std::size_t> rows) {
    tree_.nodes.clear();
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int majority(const std::vector<std::size_t>& rows) const {
    int ones = 0;
    for (auto r : rows) ones += data_[r].label;
    return 2 * ones > static_cast<int>(rows.size()) ? 1 : 0;
  }

  int grow(std::vector<std::size_t>& rows, int depth) {
    const int index = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[index].label = majority(rows);
    int ones = 0;
    for (auto r : rows) ones += data_[r].label;
    if (depth >= params_.max_depth || ones == 0 ||
        ones == static_cast<int>(rows.size()) ||
        static_cast<int>(rows.size()) < params_.min_samples_split) {
      return index;
    }

    const std::size_t d = data_.front().features.size();
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    rng_.shuffle(features);
    features.resize(try_features_);
    std::sort(features.begin(), features.end());

    const double parent = gini(ones, static_cast<int>(rows.size()));
    double best_gain = 0.0;
    int best_feature = -1;
    double best_threshold = 0.0;
    std::vector<std::pair<double, int>> column(rows.size());
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        column[i] = {data_[rows[i]].features[f], data_[rows[i]].label};
      }
      std::sort(column.begin(), column.end());
      int left_ones = 0;
      const int n = static_cast<int>(column.size());
      for (int i = 0; i + 1 < n; ++i) {
        left_ones += column[i].second;
        if (column[i].first == column[i + 1].first) continue;
        const int nl = i + 1;
        const int nr = n - nl;
        const double child =
            (nl * gini(left_ones, nl) + nr * gini(ones - left_ones, nr)) / n;
        const double gain = parent - child;
        if (gain > best_gain + 1e-12) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (column[i].first + column[i + 1].first);
        }
      }
    }
    if (best_feature < 0) return index;

    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (auto r : rows) {
      (data_[r].features[best_feature] <= best_threshold ? left : right)
          .push_back(r);
    }
    tree_.nodes[index].feature = best_feature;
    tree_.nodes[index].threshold = best_threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = r;
    return index;
  }

  const std::vector<RfSample>& data_;
  const RfParams& params_;
  Rng& rng_;
  std::size_t try_features_ = 1;
  RfTree tree_;
};

}  // namespace

RfModel rf_train(const std::vector<RfSample>& history, const RfParams& params) {
  if (history.empty()) throw InputError("random forest needs training rows");
  if (params.trees < 1 || params.trees % 2 == 0) {
    throw ConfigError("random forest tree count must be odd and positive");
  }
  RfModel model;
  model.dimension_ = history.front().features.size();
  int ones = 0;
  for (const auto& s : history) {
    if (s.features.size() != model.dimension_) {
      throw InputError("random forest rows differ in dimension");
    }
    if (s.label != 0 && s.label != 1) {
      throw InputError("random forest labels must be 0 or 1");
    }
    ones += s.label;
  }
  if (ones == 0 || ones == static_cast<int>(history.size())) {
    spdlog::warn("random forest history holds a single class; using a constant "
                 "classifier");
    model.constant_label_ = ones == 0 ? 0 : 1;
    return model;
  }

  Rng rng(params.seed);
  TreeBuilder builder(history, params, rng);
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < history.size(); ++i) {
    by_class[history[i].label].push_back(i);
  }
  for (int t = 0; t < params.trees; ++t) {
    std::vector<std::size_t> rows;
    rows.reserve(history.size());
    for (const auto& pool : by_class) {
      for (std::size_t k = 0; k < pool.size(); ++k) {
        rows.push_back(pool[rng.index(pool.size())]);
      }
    }
    model.trees_.push_back(builder.build(std::move(rows)));
  }
  return model;
}

int rf_predict(const RfModel& model, const std::vector<double>& features) {
  return model.predict(features);
}

}  // namespace cloudrisk
