#pragma once

// Concept visualisation and instance explanations over frozen forward-pass
// traces: node-concept groups with p-hop neighbourhood DOT files, full-graph
// cluster colourings, and per-instance cluster bundles plus explanations.json.

#include <string>
#include <utility>
#include <vector>

namespace scnet::explain {

// Plain-double snapshot of one graph's forward pass.
struct GraphTrace {
  int graph_id = 0;
  int n = 0;
  std::vector<std::pair<int, int>> edges;           // undirected, i < j
  std::vector<std::vector<double>> node_concepts;   // n x s, graph space
  std::vector<std::vector<double>> assignments;     // n x K
  std::vector<double> importance;                   // K
  std::vector<double> graph_concept;                // K
  int prediction = 0;
  int label = 0;
  std::vector<int> motif_mask;                      // optional, n entries
};

struct ConceptGroup {
  std::string code;                                 // binarized encoding key
  std::vector<std::pair<int, int>> members;         // (graph id, node id)
  std::vector<double> centroid;                     // mean fuzzy encoding
  std::vector<std::pair<int, int>> representatives; // nearest-centroid members
};

struct InstanceExplanation {
  int graph_id = 0;
  int prediction = 0;
  int label = 0;
  std::vector<int> argmax_cluster;                  // per node
  std::vector<double> max_assignment;               // per node
  std::vector<std::vector<int>> cluster_nodes;      // K node sets (argmax partition)
  std::vector<double> importance;
  std::vector<double> graph_concept;
};

// Group nodes by binarized concept code, pick the R members nearest each
// centroid, and write one DOT file per concept showing every representative's
// p-hop induced neighbourhood. Returns the groups sorted by code.
std::vector<ConceptGroup> extract_node_concepts(const std::vector<GraphTrace>& traces, int p, int r,
                                                const std::string& out_dir, const std::string& dataset,
                                                const std::string& model);

// For cluster k, write full-graph DOT files for the R graphs nearest the
// subgraph-concept centroid, node fill intensity proportional to c_ik.
void subgraph_concept_viz(const std::vector<GraphTrace>& traces, int k, int r, const std::string& out_dir,
                          const std::string& dataset, const std::string& model);

InstanceExplanation explain_instance(const GraphTrace& trace);

// One DOT per cluster: member nodes solid, the rest faded, importance in the
// label. Files named {dataset}_{model}_instance_{graph id}_cluster{k}.dot.
void write_instance_dots(const GraphTrace& trace, const InstanceExplanation& exp, const std::string& out_dir,
                         const std::string& dataset, const std::string& model);

// Serialize InstanceExplanation records into {out_dir}/explanations.json.
void write_explanations_json(const std::vector<InstanceExplanation>& explanations, const std::string& out_dir);

}  // namespace scnet::explain
