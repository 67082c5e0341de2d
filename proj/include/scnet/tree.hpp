#pragma once

// CART classification tree: greedy Gini-impurity splits at midpoints of
// sorted distinct feature values; leaves predict the majority class
// (ties resolved to the lowest class index).

#include <vector>

namespace scnet::metrics {

struct TreeConfig {
  int max_depth = -1;  // -1 = unlimited
  int min_samples_split = 2;
};

class DecisionTree {
 public:
  void fit(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels, int n_classes,
           TreeConfig config = {});
  int predict(const std::vector<double>& row) const;
  size_t node_count() const { return nodes_.size(); }
  int depth() const;

 private:
  struct Node {
    bool leaf = true;
    int feature = -1;
    double threshold = 0.0;
    int left = -1, right = -1;
    int cls = 0;
    std::vector<int> histogram;
  };
  std::vector<Node> nodes_;
  int n_classes_ = 0;

  int build(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
            std::vector<int>& idx, int depth, const TreeConfig& config);
};

double gini_impurity(const std::vector<int>& counts);

}  // namespace scnet::metrics
