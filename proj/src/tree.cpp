#include "scnet/tree.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace scnet::metrics {

double gini_impurity(const std::vector<int>& counts) {
  long total = std::accumulate(counts.begin(), counts.end(), 0L);
  if (total == 0) return 0.0;
  double g = 1.0;
  for (int c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    g -= p * p;
  }
  return g;
}

void DecisionTree::fit(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                       int n_classes, TreeConfig config) {
  if (rows.empty()) throw std::invalid_argument("DecisionTree::fit: no rows");
  if (rows[0].empty()) throw std::invalid_argument("DecisionTree::fit: zero features");
  if (rows.size() != labels.size()) throw std::invalid_argument("DecisionTree::fit: row/label count mismatch");
  nodes_.clear();
  n_classes_ = n_classes;
  std::vector<int> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  build(rows, labels, idx, 0, config);
}

int DecisionTree::build(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                        std::vector<int>& idx, int depth, const TreeConfig& config) {
  Node node;
  node.histogram.assign(static_cast<size_t>(n_classes_), 0);
  for (int i : idx) node.histogram[static_cast<size_t>(labels[static_cast<size_t>(i)])] += 1;
  // majority class, ties to the lowest index
  node.cls = static_cast<int>(std::max_element(node.histogram.begin(), node.histogram.end()) - node.histogram.begin());

  const double parent_gini = gini_impurity(node.histogram);
  const bool pure = parent_gini == 0.0;
  const bool too_small = static_cast<int>(idx.size()) < config.min_samples_split;
  const bool too_deep = config.max_depth >= 0 && depth >= config.max_depth;

  int best_feature = -1;
  double best_threshold = 0.0, best_score = std::numeric_limits<double>::infinity();
  if (!pure && !too_small && !too_deep) {
    const size_t n_features = rows[0].size();
    std::vector<std::pair<double, int>> sorted;  // (value, label)
    for (size_t f = 0; f < n_features; ++f) {
      sorted.clear();
      for (int i : idx) sorted.push_back({rows[static_cast<size_t>(i)][f], labels[static_cast<size_t>(i)]});
      std::sort(sorted.begin(), sorted.end());
      std::vector<int> left(static_cast<size_t>(n_classes_), 0), right = node.histogram;
      for (size_t pos = 0; pos + 1 < sorted.size(); ++pos) {
        left[static_cast<size_t>(sorted[pos].second)] += 1;
        right[static_cast<size_t>(sorted[pos].second)] -= 1;
        if (sorted[pos].first == sorted[pos + 1].first) continue;  // split only between distinct values
        const double nl = static_cast<double>(pos + 1), nr = static_cast<double>(sorted.size() - pos - 1);
        const double score = (nl * gini_impurity(left) + nr * gini_impurity(right)) / static_cast<double>(sorted.size());
        if (score < best_score - 1e-15) {
          best_score = score;
          best_feature = static_cast<int>(f);
          best_threshold = 0.5 * (sorted[pos].first + sorted[pos + 1].first);
        }
      }
    }
  }

  const int my_index = static_cast<int>(nodes_.size());
  nodes_.push_back(node);
  // zero-gain splits are kept (like CART implementations that split until pure
  // or depth-capped): a gainless root split can still enable gainful child
  // splits, e.g. on XOR-labelled binary features
  if (best_feature < 0 || best_score > parent_gini + 1e-15) return my_index;

  std::vector<int> left_idx, right_idx;
  for (int i : idx)
    (rows[static_cast<size_t>(i)][static_cast<size_t>(best_feature)] <= best_threshold ? left_idx : right_idx).push_back(i);
  nodes_[static_cast<size_t>(my_index)].leaf = false;
  nodes_[static_cast<size_t>(my_index)].feature = best_feature;
  nodes_[static_cast<size_t>(my_index)].threshold = best_threshold;
  nodes_[static_cast<size_t>(my_index)].left = build(rows, labels, left_idx, depth + 1, config);
  nodes_[static_cast<size_t>(my_index)].right = build(rows, labels, right_idx, depth + 1, config);
  return my_index;
}

int DecisionTree::predict(const std::vector<double>& row) const {
  if (nodes_.empty()) throw std::logic_error("DecisionTree::predict before fit");
  int i = 0;
  while (!nodes_[static_cast<size_t>(i)].leaf) {
    const Node& n = nodes_[static_cast<size_t>(i)];
    i = row[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  return nodes_[static_cast<size_t>(i)].cls;
}

int DecisionTree::depth() const {
  // nodes are stored preorder; recompute by walking
  std::function<int(int)> walk = [&](int i) -> int {
    const Node& n = nodes_[static_cast<size_t>(i)];
    if (n.leaf) return 0;
    return 1 + std::max(walk(n.left), walk(n.right));
  };
  return nodes_.empty() ? 0 : walk(0);
}

}  // namespace scnet::metrics
