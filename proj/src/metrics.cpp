#include "scnet/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace scnet::metrics {

double accuracy(const std::vector<std::vector<double>>& logits, const std::vector<int>& labels) {
  if (logits.empty()) throw std::invalid_argument("accuracy: empty input");
  if (logits.size() != labels.size()) throw std::invalid_argument("accuracy: length mismatch");
  size_t hits = 0;
  for (size_t i = 0; i < logits.size(); ++i) {
    const auto& row = logits[i];
    int best = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    if (best == labels[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) / static_cast<double>(logits.size());
}

double concept_completeness(const ConceptTable& train, const ConceptTable& test, TreeConfig config) {
  if (train.encodings.empty() || test.encodings.empty())
    throw std::invalid_argument("concept_completeness: empty table");
  if (train.encodings[0].size() != test.encodings[0].size())
    throw std::invalid_argument("concept_completeness: encoding width mismatch");
  DecisionTree tree;
  tree.fit(train.encodings, train.labels, train.n_classes, config);
  size_t hits = 0;
  for (size_t i = 0; i < test.encodings.size(); ++i)
    if (tree.predict(test.encodings[i]) == test.labels[i]) ++hits;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(test.encodings.size());
}

double subgraph_assignment_strength(const std::vector<std::vector<double>>& assignments,
                                    const std::vector<char>& mask) {
  double sum = 0.0;
  size_t count = 0;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (!mask[i]) continue;
    sum += *std::max_element(assignments[i].begin(), assignments[i].end());
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

std::vector<double> conditional_assignment_strength(const std::vector<std::vector<double>>& assignments,
                                                    const std::vector<char>& mask) {
  size_t k = 0;
  for (size_t i = 0; i < assignments.size(); ++i)
    if (mask[i]) { k = assignments[i].size(); break; }
  std::vector<double> sums(k, 0.0);
  std::vector<size_t> counts(k, 0);
  const double threshold = k ? 1.0 / static_cast<double>(k) : 0.0;
  for (size_t i = 0; i < assignments.size(); ++i) {
    if (!mask[i]) continue;
    for (size_t c = 0; c < k; ++c) {
      if (assignments[i][c] >= threshold) {
        sums[c] += assignments[i][c];
        counts[c] += 1;
      }
    }
  }
  for (size_t c = 0; c < k; ++c) sums[c] = counts[c] ? sums[c] / static_cast<double>(counts[c]) : 0.0;
  return sums;
}

double cluster_utilization(const std::vector<std::vector<double>>& assignments, const std::vector<char>& mask) {
  auto cond = conditional_assignment_strength(assignments, mask);
  if (cond.empty()) return 0.0;
  double sum = 0.0;
  for (double v : cond) sum += v;
  return sum / static_cast<double>(cond.size());
}

double subgraph_consistency(const std::vector<std::string>& concept_codes,
                            const std::vector<int>& argmax_clusters, const std::vector<char>& mask) {
  if (concept_codes.size() != argmax_clusters.size() || concept_codes.size() != mask.size())
    throw std::invalid_argument("subgraph_consistency: length mismatch");
  // per concept code: cluster -> node count
  std::map<std::string, std::map<int, size_t>> tally;
  size_t total = 0;
  for (size_t i = 0; i < concept_codes.size(); ++i) {
    if (!mask[i]) continue;
    tally[concept_codes[i]][argmax_clusters[i]] += 1;
    ++total;
  }
  if (total == 0) throw std::invalid_argument("subgraph_consistency: no unmasked nodes");
  size_t agree = 0;
  for (const auto& [code, clusters] : tally) {
    int modal = -1;
    size_t best = 0;
    for (const auto& [cluster, count] : clusters) {
      if (count > best) { best = count; modal = cluster; }  // std::map order gives lowest index on tie
    }
    agree += clusters.at(modal);
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

std::string binarize_code(const std::vector<double>& encoding, double threshold) {
  std::string code(encoding.size(), '0');
  for (size_t i = 0; i < encoding.size(); ++i)
    if (encoding[i] >= threshold) code[i] = '1';
  return code;
}

Interval ci95(const std::vector<double>& values, double lo, double hi) {
  if (values.size() < 2) throw std::invalid_argument("ci95: need at least two values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= n - 1.0;  // sample variance
  const double half = 1.96 * std::sqrt(var / n);
  Interval ci;
  ci.mean = mean;
  ci.low = std::max(lo, mean - half);
  ci.high = std::min(hi, mean + half);
  return ci;
}

}  // namespace scnet::metrics
