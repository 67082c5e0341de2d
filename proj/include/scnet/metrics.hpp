#pragma once

// Evaluation metrics: classification accuracy, decision-tree concept
// completeness over concept tables, cluster-quality scores for soft
// assignments, and 95% confidence intervals over seeds.

#include <string>
#include <vector>

#include "scnet/tree.hpp"

namespace scnet::metrics {

// One instance per row: a fixed-width concept encoding plus its target class.
struct ConceptTable {
  std::vector<std::vector<double>> encodings;
  std::vector<int> labels;
  int n_classes = 0;
};

struct ClusterScores {
  double assignment_strength = 0.0;
  std::vector<double> conditional_strength;
  double cluster_utilization = 0.0;
  double consistency_score = 0.0;
};

struct Interval {
  double mean = 0.0, low = 0.0, high = 0.0;
};

// Fraction of argmax matches x100; argmax ties go to the lowest class index.
double accuracy(const std::vector<std::vector<double>>& logits, const std::vector<int>& labels);

// Fit a CART tree on the train table, report test accuracy x100.
double concept_completeness(const ConceptTable& train, const ConceptTable& test, TreeConfig config = {});

// Mean over unmasked rows of max_k c_ik.
double subgraph_assignment_strength(const std::vector<std::vector<double>>& assignments,
                                    const std::vector<char>& mask);

// Per cluster: mean of c_ik over unmasked rows with c_ik >= 1/K (0 if none).
std::vector<double> conditional_assignment_strength(const std::vector<std::vector<double>>& assignments,
                                                    const std::vector<char>& mask);

// Mean of the conditional-strength vector.
double cluster_utilization(const std::vector<std::vector<double>>& assignments, const std::vector<char>& mask);

// Fraction of rows whose argmax cluster equals the modal cluster of their
// binarized concept code (mode ties -> lowest cluster index).
double subgraph_consistency(const std::vector<std::string>& concept_codes,
                            const std::vector<int>& argmax_clusters, const std::vector<char>& mask);

// Threshold each entry at `threshold` and pack into a 0/1 string key.
std::string binarize_code(const std::vector<double>& encoding, double threshold = 0.5);

// mean +- 1.96*sd/sqrt(n), clipped to [lo, hi].
Interval ci95(const std::vector<double>& values, double lo, double hi);

}  // namespace scnet::metrics
