#pragma once

// Graph data model: undirected simple graphs with dense adjacency,
// node features and a class label, plus padded batching and stratified
// splitting. Datasets serialize as JSON lines (one graph per line).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace scnet::data {

struct Graph {
  int n = 0;
  std::vector<double> adjacency;  // n*n, symmetric 0/1, zero diagonal
  std::vector<double> features;   // n*f
  int feature_width = 1;
  int label = 0;
  std::vector<int> motif_mask;  // per-node motif id, -1 = base node; empty if untracked

  double adj(int i, int j) const { return adjacency[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)]; }
  void set_edge(int i, int j) {
    adjacency[static_cast<size_t>(i) * static_cast<size_t>(n) + static_cast<size_t>(j)] = 1.0;
    adjacency[static_cast<size_t>(j) * static_cast<size_t>(n) + static_cast<size_t>(i)] = 1.0;
  }
  int edge_count() const;
  int degree(int i) const;
  bool valid() const;  // symmetry, binarity, zero diagonal, row counts
};

struct PaddedBatch {
  int B = 0;
  int N = 0;
  int f = 1;
  std::vector<double> adjacency;  // B*N*N
  std::vector<double> features;   // B*N*f
  std::vector<double> mask;       // B*N, 1 = real node
  std::vector<int> labels;        // B
};

PaddedBatch pad_batch(const std::vector<const Graph*>& graphs, int padded_n);
PaddedBatch pad_batch(const std::vector<Graph>& graphs, int padded_n);

struct Split {
  std::vector<int> train;
  std::vector<int> test;
  uint64_t seed = 0;
  double train_fraction = 0.8;
};

// stratified by label, deterministic per seed
Split stratified_split(const std::vector<Graph>& dataset, double train_fraction, uint64_t seed);

// JSON-lines dataset format
std::string graph_to_json(const Graph& g);
Graph graph_from_json(const std::string& line);
void save_dataset(const std::vector<Graph>& graphs, const std::string& path);
std::vector<Graph> load_dataset(const std::string& path);

int class_count(const std::vector<Graph>& graphs);
double mean_graph_size(const std::vector<Graph>& graphs);

}  // namespace scnet::data
