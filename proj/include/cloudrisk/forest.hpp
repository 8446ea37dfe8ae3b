#pragma once

#include <cstdint>
#include <vector>

namespace cloudrisk {

struct RfParams {
  int trees = 21;  // must be odd
  int max_depth = 6;
  int min_samples_split = 2;
  std::uint64_t seed = 1;
};

struct RfSample {
  std::vector<double> features;
  int label = 0;  // 0 or 1
};

// Binary classification tree stored as a flat node array; node 0 is the root.
struct RfTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int label = 0;
  };
  std::vector<Node> nodes;

  int predict(const std::vector<double>& x) const;
};

class RfModel {
 public:
  RfModel() = default;

  std::size_t dimension() const { return dimension_; }
  const std::vector<RfTree>& trees() const { return trees_; }
  bool constant() const { return trees_.empty(); }
  int constant_label() const { return constant_label_; }

  // Majority vote. Throws InputError on a dimension mismatch.
  int predict(const std::vector<double>& x) const;
  // Votes for class 1 over the tree count.
  double vote_share(const std::vector<double>& x) const;

 private:
  friend RfModel rf_train(const std::vector<RfSample>&, const RfParams&);
  std::size_t dimension_ = 0;
  std::vector<RfTree> trees_;
  int constant_label_ = 0;
};

// Gini trees, each grown on a bootstrap sample drawn per class (so both
// classes are always present), with sqrt(d) candidate features per split.
// A single-class history yields a constant model and logs a warning.
RfModel rf_train(const std::vector<RfSample>& history, const RfParams& params);

int rf_predict(const RfModel& model, const std::vector<double>& features);

}  // namespace cloudrisk
