#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace cloudrisk {

struct GbtParams {
  int rounds = 50;
  int max_depth = 4;
  double learning_rate = 0.3;
  double lambda = 1.0;  // L2 on leaf weights
  double gamma = 0.0;   // per-leaf penalty
  double decision_threshold = 0.5;
};

// Labeled feature rows. Missing values are NaN.
struct TrainingSet {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }
  std::size_t dimension() const { return feature_names.size(); }
  void add(std::vector<double> row, int label);
  // Throws InputError when rows disagree in dimension or labels are not 0/1.
  void check() const;
  TrainingSet subset(const std::vector<std::size_t>& indices) const;
  TrainingSet tail(std::size_t n) const;  // last n rows (all if fewer)
  TrainingSet project(const std::vector<std::size_t>& features) const;
  bool has_both_classes() const;
};

struct GbtNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  bool default_left = true;  // where NaN goes
  double weight = 0.0;       // leaf weight w
  double gain = 0.0;         // split gain (internal nodes)
};

struct GbtTree {
  std::vector<GbtNode> nodes;  // nodes[0] is the root

  double output(const std::vector<double>& x) const;
  int leaf_count() const;
  friend bool operator==(const GbtTree&, const GbtTree&);
};

class GbtModel {
 public:
  GbtModel() = default;
  GbtModel(GbtParams params, std::vector<std::string> feature_names,
           double base_score)
      : params_(params),
        feature_names_(std::move(feature_names)),
        base_score_(base_score) {}

  const GbtParams& params() const { return params_; }
  const std::vector<std::string>& feature_names() const {
    return feature_names_;
  }
  std::size_t dimension() const { return feature_names_.size(); }
  double base_score() const { return base_score_; }
  const std::vector<GbtTree>& trees() const { return trees_; }
  void append(GbtTree tree) { trees_.push_back(std::move(tree)); }

  // base + learning_rate * sum of tree outputs. Throws InputError on a
  // dimension mismatch.
  double raw_score(const std::vector<double>& x) const;
  double predict(const std::vector<double>& x) const;  // probability
  int classify(const std::vector<double>& x) const;    // threshold at 0.5

  // Total split gain per feature.
  std::vector<double> feature_importance() const;

  friend bool operator==(const GbtModel&, const GbtModel&);

 private:
  GbtParams params_;
  std::vector<std::string> feature_names_;
  double base_score_ = 0.0;
  std::vector<GbtTree> trees_;
};

double sigmoid(double z);
double logistic_loss(int label, double raw_score);

std::pair<std::vector<double>, std::vector<double>> grad_hess(
    const std::vector<int>& labels, const std::vector<double>& raw_scores);

// Shuffled partition with round(ratio * n) training rows.
std::pair<TrainingSet, TrainingSet> split_train_test(const TrainingSet& data,
                                                     double ratio,
                                                     std::uint64_t seed);

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  bool default_left = true;
  double gain = 0.0;
};

double split_gain(double gl, double hl, double gr, double hr, double lambda,
                  double gamma);

// Best split of `rows` by exact greedy search over midpoints of sorted unique
// values. Ties go to the lowest feature index, then the lowest threshold.
SplitChoice best_split(const TrainingSet& data, const std::vector<double>& g,
                       const std::vector<double>& h,
                       const std::vector<std::size_t>& rows,
                       const GbtParams& params);

double leaf_weight(double g_sum, double h_sum, double lambda);

// Grows one tree on (g, h) and appends it.
GbtModel fit_round(GbtModel model, const TrainingSet& train,
                   const std::vector<double>& g, const std::vector<double>& h);

// Log-odds of the positive rate, clamped away from 0 and 1.
double prior_log_odds(const std::vector<int>& labels);

GbtModel train_gbt(const TrainingSet& train, const GbtParams& params);

// Sum of logistic losses plus gamma*K + lambda/2*|lr*w|^2 over all trees.
double regularized_objective(const GbtModel& model, const TrainingSet& data);

struct RfeResult {
  TrainingSet reduced;
  std::vector<std::size_t> selected;  // ascending original indices
};

// Drops the least important feature (total gain of a 10-round, depth-3
// model) until `keep` remain.
RfeResult rfe_select(const TrainingSet& data, std::size_t keep);

// Appends `new_rows` to `db`, then refits from scratch on the last `window`
// rows. The previous model is kept when the window holds a single class.
GbtModel retrain_online(const GbtModel& model, TrainingSet& db,
                        const TrainingSet& new_rows, std::size_t window);

inline constexpr int kGbtFormatVersion = 1;

nlohmann::json gbt_to_json(const GbtModel& model);
GbtModel gbt_from_json(const nlohmann::json& doc);
void save_gbt(const GbtModel& model, const std::string& path);
GbtModel load_gbt(const std::string& path);

}  // namespace cloudrisk
