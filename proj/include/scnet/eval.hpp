#pragma once

// Shared evaluation layer: runs a frozen model over a dataset slice and
// produces logits, concept tables at every level, cluster scores, and
// per-graph trace snapshots for the explanation exporter.

#include <string>
#include <vector>

#include "scnet/explain.hpp"
#include "scnet/metrics.hpp"
#include "scnet/model.hpp"
#include "scnet/train.hpp"

namespace scnet::eval {

// Everything the metrics and explain modules need, in plain doubles.
struct SliceEval {
  std::vector<std::vector<double>> logits;              // per graph
  std::vector<int> labels;
  std::vector<explain::GraphTrace> traces;              // per graph
  // node-level rows, one per real node, labelled with the graph's class
  std::vector<std::vector<double>> node_concepts_graph;     // n_total x s
  std::vector<std::vector<double>> node_concepts_subgraph;  // n_total x (K*s_sub), argmax-cluster slice
  std::vector<std::vector<double>> node_assignments;        // n_total x K
  std::vector<int> node_labels;
  // subgraph-level rows, one per graph
  std::vector<std::vector<std::vector<double>>> subgraph_concepts;  // graph -> k -> s_sub
  std::vector<std::vector<double>> importance;                      // graph -> K
  std::vector<std::vector<double>> graph_concepts;                  // graph -> K
};

template <typename Real>
SliceEval run_scn(const std::vector<data::Graph>& dataset, const std::vector<int>& indices,
                  model::SCNParams<Real>& params, int batch_size) {
  SliceEval ev;
  const int K = params.config.K, s = params.config.s, s_sub = params.config.s_sub;
  std::mt19937_64 dummy(0);
  for (const auto& bidx : train::make_batches(indices, batch_size, dummy, false)) {
    data::PaddedBatch batch = train::batch_of(dataset, bidx);
    auto trace = model::scn_forward(batch, params, false, static_cast<nd::Tape<Real>*>(nullptr));
    const int B = batch.B, N = batch.N, C = trace.logits.shape[1];
    for (int b = 0; b < B; ++b) {
      const data::Graph& g = dataset[static_cast<size_t>(bidx[static_cast<size_t>(b)])];
      std::vector<double> lg(static_cast<size_t>(C));
      for (int c = 0; c < C; ++c)
        lg[static_cast<size_t>(c)] = static_cast<double>(trace.logits.at(static_cast<size_t>(b * C + c)));
      int pred = static_cast<int>(std::max_element(lg.begin(), lg.end()) - lg.begin());
      ev.logits.push_back(lg);
      ev.labels.push_back(g.label);

      explain::GraphTrace t;
      t.graph_id = bidx[static_cast<size_t>(b)];
      t.n = g.n;
      for (int i = 0; i < g.n; ++i)
        for (int j = i + 1; j < g.n; ++j)
          if (g.adj(i, j) > 0) t.edges.push_back({i, j});
      t.prediction = pred;
      t.label = g.label;
      t.motif_mask = g.motif_mask;

      for (int i = 0; i < g.n; ++i) {
        std::vector<double> q(static_cast<size_t>(s));
        for (int d = 0; d < s; ++d)
          q[static_cast<size_t>(d)] =
              static_cast<double>(trace.node_concepts_graph.at(static_cast<size_t>((b * N + i) * s + d)));
        std::vector<double> c(static_cast<size_t>(K));
        for (int k = 0; k < K; ++k)
          c[static_cast<size_t>(k)] =
              static_cast<double>(trace.assignments.at(static_cast<size_t>((b * N + i) * K + k)));
        const int argk = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
        std::vector<double> qs(static_cast<size_t>(s_sub));
        for (int d = 0; d < s_sub; ++d)
          qs[static_cast<size_t>(d)] = static_cast<double>(
              trace.node_concepts_subgraph[static_cast<size_t>(argk)].at(static_cast<size_t>((b * N + i) * s_sub + d)));
        t.node_concepts.push_back(q);
        t.assignments.push_back(c);
        ev.node_concepts_graph.push_back(std::move(q));
        ev.node_concepts_subgraph.push_back(std::move(qs));
        ev.node_assignments.push_back(std::move(c));
        ev.node_labels.push_back(g.label);
      }

      std::vector<std::vector<double>> sub(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        sub[static_cast<size_t>(k)].resize(static_cast<size_t>(s_sub));
        for (int d = 0; d < s_sub; ++d)
          sub[static_cast<size_t>(k)][static_cast<size_t>(d)] =
              static_cast<double>(trace.subgraph_concepts.at(static_cast<size_t>((b * K + k) * s_sub + d)));
      }
      std::vector<double> imp(static_cast<size_t>(K)), gc(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) {
        imp[static_cast<size_t>(k)] = static_cast<double>(trace.importance.at(static_cast<size_t>(b * K + k)));
        gc[static_cast<size_t>(k)] = static_cast<double>(trace.graph_concept.at(static_cast<size_t>(b * K + k)));
      }
      t.importance = imp;
      t.graph_concept = gc;
      ev.traces.push_back(std::move(t));
      ev.subgraph_concepts.push_back(std::move(sub));
      ev.importance.push_back(std::move(imp));
      ev.graph_concepts.push_back(std::move(gc));
    }
  }
  return ev;
}

// -------- concept tables ----------------------------------------------------

inline metrics::ConceptTable graph_table(const SliceEval& ev, int n_classes) {
  return {ev.graph_concepts, ev.labels, n_classes};
}

enum class SubgraphMode { individual, concat, concat_with_importance };

// individual: one table per cluster k; otherwise a single concatenated table
inline std::vector<metrics::ConceptTable> subgraph_tables(const SliceEval& ev, int n_classes, SubgraphMode mode) {
  std::vector<metrics::ConceptTable> tables;
  const size_t k_count = ev.subgraph_concepts.empty() ? 0 : ev.subgraph_concepts[0].size();
  if (mode == SubgraphMode::individual) {
    for (size_t k = 0; k < k_count; ++k) {
      metrics::ConceptTable t;
      for (const auto& sub : ev.subgraph_concepts) t.encodings.push_back(sub[k]);
      t.labels = ev.labels;
      t.n_classes = n_classes;
      tables.push_back(std::move(t));
    }
    return tables;
  }
  metrics::ConceptTable t;
  for (size_t g = 0; g < ev.subgraph_concepts.size(); ++g) {
    std::vector<double> row;
    for (const auto& sub : ev.subgraph_concepts[g]) row.insert(row.end(), sub.begin(), sub.end());
    if (mode == SubgraphMode::concat_with_importance)
      row.insert(row.end(), ev.importance[g].begin(), ev.importance[g].end());
    t.encodings.push_back(std::move(row));
  }
  t.labels = ev.labels;
  t.n_classes = n_classes;
  tables.push_back(std::move(t));
  return tables;
}

inline metrics::ConceptTable node_table(const SliceEval& ev, int n_classes, bool subgraph_space) {
  return {subgraph_space ? ev.node_concepts_subgraph : ev.node_concepts_graph, ev.node_labels, n_classes};
}

// -------- completeness variants ---------------------------------------------

inline double subgraph_completeness(const SliceEval& train, const SliceEval& test, int n_classes, SubgraphMode mode) {
  auto tr = subgraph_tables(train, n_classes, mode);
  auto te = subgraph_tables(test, n_classes, mode);
  double sum = 0;
  for (size_t i = 0; i < tr.size(); ++i) sum += metrics::concept_completeness(tr[i], te[i]);
  return sum / static_cast<double>(tr.size());
}

// -------- cluster scores ----------------------------------------------------

inline metrics::ClusterScores cluster_scores(const SliceEval& ev) {
  metrics::ClusterScores scores;
  std::vector<char> mask(ev.node_assignments.size(), 1);
  scores.assignment_strength = metrics::subgraph_assignment_strength(ev.node_assignments, mask);
  scores.conditional_strength = metrics::conditional_assignment_strength(ev.node_assignments, mask);
  scores.cluster_utilization = metrics::cluster_utilization(ev.node_assignments, mask);
  std::vector<std::string> codes;
  std::vector<int> argmax;
  for (size_t i = 0; i < ev.node_assignments.size(); ++i) {
    codes.push_back(metrics::binarize_code(ev.node_concepts_graph[i]));
    const auto& c = ev.node_assignments[i];
    argmax.push_back(static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin()));
  }
  scores.consistency_score = metrics::subgraph_consistency(codes, argmax, mask);
  return scores;
}

// motif-separation statistic: max over clusters of (mean assignment on motif
// nodes - mean on base nodes), using the generator's ground-truth masks
inline double motif_separation(const std::vector<explain::GraphTrace>& traces) {
  size_t k_count = 0;
  for (const auto& t : traces)
    if (!t.assignments.empty()) { k_count = t.assignments[0].size(); break; }
  double best = -1.0;
  for (size_t k = 0; k < k_count; ++k) {
    double motif_sum = 0, base_sum = 0;
    size_t motif_n = 0, base_n = 0;
    for (const auto& t : traces) {
      if (t.motif_mask.empty()) continue;
      for (int i = 0; i < t.n; ++i) {
        const double c = t.assignments[static_cast<size_t>(i)][k];
        if (t.motif_mask[static_cast<size_t>(i)] >= 0) { motif_sum += c; ++motif_n; }
        else { base_sum += c; ++base_n; }
      }
    }
    if (motif_n == 0 || base_n == 0) continue;
    best = std::max(best, motif_sum / static_cast<double>(motif_n) - base_sum / static_cast<double>(base_n));
  }
  return best;
}

}  // namespace scnet::eval
