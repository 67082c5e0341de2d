#include "scnet/graph.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

namespace scnet::data {

using nlohmann::json;

int Graph::edge_count() const {
  int e = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (adj(i, j) != 0.0) ++e;
  return e;
}

int Graph::degree(int i) const {
  int d = 0;
  for (int j = 0; j < n; ++j)
    if (adj(i, j) != 0.0) ++d;
  return d;
}

bool Graph::valid() const {
  if (adjacency.size() != static_cast<size_t>(n) * static_cast<size_t>(n)) return false;
  if (features.size() != static_cast<size_t>(n) * static_cast<size_t>(feature_width)) return false;
  for (int i = 0; i < n; ++i) {
    if (adj(i, i) != 0.0) return false;
    for (int j = 0; j < n; ++j) {
      double a = adj(i, j);
      if (a != 0.0 && a != 1.0) return false;
      if (a != adj(j, i)) return false;
    }
  }
  return true;
}

PaddedBatch pad_batch(const std::vector<const Graph*>& graphs, int padded_n) {
  PaddedBatch b;
  b.B = static_cast<int>(graphs.size());
  b.N = padded_n;
  b.f = graphs.empty() ? 1 : graphs[0]->feature_width;
  for (const Graph* g : graphs) {
    if (g->n > padded_n) throw std::invalid_argument("pad_batch: padded size " + std::to_string(padded_n) + " < graph size " + std::to_string(g->n));
    if (g->feature_width != b.f) throw std::invalid_argument("pad_batch: inconsistent feature widths");
  }
  const size_t N = static_cast<size_t>(padded_n);
  b.adjacency.assign(static_cast<size_t>(b.B) * N * N, 0.0);
  b.features.assign(static_cast<size_t>(b.B) * N * static_cast<size_t>(b.f), 0.0);
  b.mask.assign(static_cast<size_t>(b.B) * N, 0.0);
  b.labels.resize(static_cast<size_t>(b.B));
  for (int gi = 0; gi < b.B; ++gi) {
    const Graph& g = *graphs[static_cast<size_t>(gi)];
    b.labels[static_cast<size_t>(gi)] = g.label;
    for (int i = 0; i < g.n; ++i) {
      b.mask[static_cast<size_t>(gi) * N + static_cast<size_t>(i)] = 1.0;
      for (int j = 0; j < g.n; ++j)
        b.adjacency[(static_cast<size_t>(gi) * N + static_cast<size_t>(i)) * N + static_cast<size_t>(j)] = g.adj(i, j);
      for (int k = 0; k < b.f; ++k)
        b.features[(static_cast<size_t>(gi) * N + static_cast<size_t>(i)) * static_cast<size_t>(b.f) + static_cast<size_t>(k)] =
            g.features[static_cast<size_t>(i) * static_cast<size_t>(b.f) + static_cast<size_t>(k)];
    }
  }
  return b;
}

PaddedBatch pad_batch(const std::vector<Graph>& graphs, int padded_n) {
  std::vector<const Graph*> ptrs;
  ptrs.reserve(graphs.size());
  for (const Graph& g : graphs) ptrs.push_back(&g);
  return pad_batch(ptrs, padded_n);
}

Split stratified_split(const std::vector<Graph>& dataset, double train_fraction, uint64_t seed) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0) throw std::invalid_argument("stratified_split: fraction must be in (0,1)");
  std::map<int, std::vector<int>> by_label;
  for (size_t i = 0; i < dataset.size(); ++i) by_label[dataset[i].label].push_back(static_cast<int>(i));
  std::mt19937_64 rng(seed);
  Split split;
  split.seed = seed;
  split.train_fraction = train_fraction;
  for (auto& [label, idx] : by_label) {
    if (idx.size() < 2) throw std::invalid_argument("stratified_split: class " + std::to_string(label) + " has fewer than 2 instances");
    std::shuffle(idx.begin(), idx.end(), rng);
    size_t n_train = static_cast<size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
    n_train = std::min(std::max<size_t>(n_train, 1), idx.size() - 1);
    split.train.insert(split.train.end(), idx.begin(), idx.begin() + static_cast<long>(n_train));
    split.test.insert(split.test.end(), idx.begin() + static_cast<long>(n_train), idx.end());
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

std::string graph_to_json(const Graph& g) {
  json j;
  j["n"] = g.n;
  json edges = json::array();
  for (int i = 0; i < g.n; ++i)
    for (int k = i + 1; k < g.n; ++k)
      if (g.adj(i, k) != 0.0) edges.push_back(json::array({i, k}));
  j["edges"] = std::move(edges);
  json feats = json::array();
  for (int i = 0; i < g.n; ++i) {
    json row = json::array();
    for (int k = 0; k < g.feature_width; ++k)
      row.push_back(g.features[static_cast<size_t>(i) * static_cast<size_t>(g.feature_width) + static_cast<size_t>(k)]);
    feats.push_back(std::move(row));
  }
  j["features"] = std::move(feats);
  j["label"] = g.label;
  if (!g.motif_mask.empty()) j["motif_mask"] = g.motif_mask;
  return j.dump();
}

Graph graph_from_json(const std::string& line) {
  json j = json::parse(line);
  Graph g;
  g.n = j.at("n").get<int>();
  const auto& feats = j.at("features");
  g.feature_width = feats.empty() ? 1 : static_cast<int>(feats[0].size());
  g.adjacency.assign(static_cast<size_t>(g.n) * static_cast<size_t>(g.n), 0.0);
  g.features.assign(static_cast<size_t>(g.n) * static_cast<size_t>(g.feature_width), 0.0);
  for (const auto& e : j.at("edges")) {
    int a = e[0].get<int>(), b = e[1].get<int>();
    if (a < 0 || b < 0 || a >= g.n || b >= g.n) throw std::runtime_error("graph_from_json: edge endpoint out of range");
    g.set_edge(a, b);
  }
  for (int i = 0; i < g.n; ++i)
    for (int k = 0; k < g.feature_width; ++k)
      g.features[static_cast<size_t>(i) * static_cast<size_t>(g.feature_width) + static_cast<size_t>(k)] = feats[static_cast<size_t>(i)][static_cast<size_t>(k)].get<double>();
  g.label = j.at("label").get<int>();
  if (j.contains("motif_mask")) g.motif_mask = j["motif_mask"].get<std::vector<int>>();
  return g;
}

void save_dataset(const std::vector<Graph>& graphs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset: cannot open " + path);
  for (const Graph& g : graphs) out << graph_to_json(g) << "\n";
}

std::vector<Graph> load_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset: cannot open " + path);
  std::vector<Graph> graphs;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    graphs.push_back(graph_from_json(line));
  }
  return graphs;
}

int class_count(const std::vector<Graph>& graphs) {
  std::set<int> labels;
  for (const Graph& g : graphs) labels.insert(g.label);
  return static_cast<int>(labels.size());
}

double mean_graph_size(const std::vector<Graph>& graphs) {
  if (graphs.empty()) return 0.0;
  double s = 0;
  for (const Graph& g : graphs) s += g.n;
  return s / static_cast<double>(graphs.size());
}

}  // namespace scnet::data
