#include "scnet/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "scnet/metrics.hpp"

namespace scnet::explain {

namespace {

const char* kPalette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3",
                          "#ff7f00", "#a65628", "#f781bf", "#999999"};

std::string intensity_colour(int cluster, double strength) {
  // linear white -> saturated cluster colour
  const char* base = kPalette[cluster % 8];
  int r, g, b;
  std::sscanf(base, "#%2x%2x%2x", &r, &g, &b);
  strength = std::clamp(strength, 0.0, 1.0);
  auto mix = [&](int c) { return static_cast<int>(std::lround(255 + (c - 255) * strength)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(r), mix(g), mix(b));
  return buf;
}

std::ofstream open_out(const std::string& out_dir, const std::string& name) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir + "/" + name);
  if (!out) throw std::runtime_error("explain: cannot write " + out_dir + "/" + name);
  return out;
}

std::vector<std::set<int>> adjacency_sets(const GraphTrace& t) {
  std::vector<std::set<int>> adj(static_cast<size_t>(t.n));
  for (auto [i, j] : t.edges) {
    adj[static_cast<size_t>(i)].insert(j);
    adj[static_cast<size_t>(j)].insert(i);
  }
  return adj;
}

std::set<int> p_hop(const GraphTrace& t, int anchor, int p) {
  auto adj = adjacency_sets(t);
  std::set<int> seen{anchor};
  std::vector<int> frontier{anchor};
  for (int hop = 0; hop < p; ++hop) {
    std::vector<int> next;
    for (int u : frontier)
      for (int v : adj[static_cast<size_t>(u)])
        if (seen.insert(v).second) next.push_back(v);
    frontier = std::move(next);
  }
  return seen;
}

double sqdist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

}  // namespace

std::vector<ConceptGroup> extract_node_concepts(const std::vector<GraphTrace>& traces, int p, int r,
                                                const std::string& out_dir, const std::string& dataset,
                                                const std::string& model) {
  if (traces.empty()) throw std::invalid_argument("extract_node_concepts: no traces");
  if (p < 0) throw std::invalid_argument("extract_node_concepts: negative hop radius");

  std::map<std::string, ConceptGroup> groups;
  std::map<int, const GraphTrace*> by_id;
  for (const auto& t : traces) {
    by_id[t.graph_id] = &t;
    for (int i = 0; i < t.n; ++i) {
      const auto& enc = t.node_concepts[static_cast<size_t>(i)];
      std::string code = metrics::binarize_code(enc);
      auto& g = groups[code];
      if (g.centroid.empty()) {
        g.code = code;
        g.centroid.assign(enc.size(), 0.0);
      }
      g.members.push_back({t.graph_id, i});
      for (size_t d = 0; d < enc.size(); ++d) g.centroid[d] += enc[d];
    }
  }

  std::vector<ConceptGroup> out;
  int concept_id = 0;
  for (auto& [code, g] : groups) {
    for (double& v : g.centroid) v /= static_cast<double>(g.members.size());
    // representatives: nearest the centroid, ties by (graph id, node id)
    std::vector<std::pair<double, std::pair<int, int>>> ranked;
    for (auto m : g.members) {
      const GraphTrace& t = *by_id.at(m.first);
      ranked.push_back({sqdist(t.node_concepts[static_cast<size_t>(m.second)], g.centroid), m});
    }
    std::sort(ranked.begin(), ranked.end());
    for (size_t i = 0; i < ranked.size() && static_cast<int>(i) < r; ++i)
      g.representatives.push_back(ranked[i].second);

    auto dot = open_out(out_dir, dataset + "_" + model + "_node_" + std::to_string(concept_id) + ".dot");
    dot << "graph concept_" << concept_id << " {\n";
    dot << "  label=\"concept " << code << " (" << g.members.size() << " nodes)\";\n";
    int rep_id = 0;
    for (auto [gid, anchor] : g.representatives) {
      const GraphTrace& t = *by_id.at(gid);
      auto hood = p_hop(t, anchor, p);
      std::string prefix = "r" + std::to_string(rep_id) + "_n";
      dot << "  subgraph cluster_rep" << rep_id << " {\n";
      dot << "    label=\"graph " << gid << " node " << anchor << "\";\n";
      for (int u : hood) {
        const int c = static_cast<int>(
            std::max_element(t.assignments[static_cast<size_t>(u)].begin(),
                             t.assignments[static_cast<size_t>(u)].end()) -
            t.assignments[static_cast<size_t>(u)].begin());
        dot << "    " << prefix << u << " [style=filled, fillcolor=\"" << kPalette[c % 8] << "\"";
        if (u == anchor) dot << ", penwidth=3, shape=doublecircle";
        dot << "];\n";
      }
      for (auto [i, j] : t.edges)
        if (hood.count(i) && hood.count(j)) dot << "    " << prefix << i << " -- " << prefix << j << ";\n";
      dot << "  }\n";
      ++rep_id;
    }
    dot << "}\n";
    ++concept_id;
    out.push_back(std::move(g));
  }
  return out;
}

void subgraph_concept_viz(const std::vector<GraphTrace>& traces, int k, int r, const std::string& out_dir,
                          const std::string& dataset, const std::string& model) {
  if (traces.empty()) throw std::invalid_argument("subgraph_concept_viz: no traces");
  const int kk = static_cast<int>(traces[0].importance.size());
  if (k < 0 || k >= kk) throw std::invalid_argument("subgraph_concept_viz: cluster index out of range");

  // rank graphs by mean c_ik distance from the dataset-wide mean (centroid)
  std::vector<double> strengths;
  for (const auto& t : traces) {
    double s = 0.0;
    for (int i = 0; i < t.n; ++i) s += t.assignments[static_cast<size_t>(i)][static_cast<size_t>(k)];
    strengths.push_back(t.n ? s / t.n : 0.0);
  }
  double centroid = 0.0;
  for (double s : strengths) centroid += s;
  centroid /= static_cast<double>(strengths.size());
  std::vector<std::pair<double, size_t>> ranked;
  for (size_t i = 0; i < traces.size(); ++i)
    ranked.push_back({std::abs(strengths[i] - centroid), i});
  std::sort(ranked.begin(), ranked.end());

  for (size_t ri = 0; ri < ranked.size() && static_cast<int>(ri) < r; ++ri) {
    const GraphTrace& t = traces[ranked[ri].second];
    auto dot = open_out(out_dir, dataset + "_" + model + "_subgraph_" + std::to_string(k) + "_g" +
                                     std::to_string(t.graph_id) + ".dot");
    dot << "graph subgraph_concept_" << k << "_g" << t.graph_id << " {\n";
    dot << "  label=\"cluster " << k << ", graph " << t.graph_id << "\";\n";
    for (int i = 0; i < t.n; ++i) {
      const double c = t.assignments[static_cast<size_t>(i)][static_cast<size_t>(k)];
      dot << "  n" << i << " [style=filled, fillcolor=\"" << intensity_colour(k, c) << "\"];\n";
    }
    for (auto [i, j] : t.edges) dot << "  n" << i << " -- n" << j << ";\n";
    dot << "}\n";
  }
}

InstanceExplanation explain_instance(const GraphTrace& trace) {
  InstanceExplanation exp;
  exp.graph_id = trace.graph_id;
  exp.prediction = trace.prediction;
  exp.label = trace.label;
  exp.importance = trace.importance;
  exp.graph_concept = trace.graph_concept;
  const size_t k = trace.importance.size();
  exp.cluster_nodes.assign(k, {});
  for (int i = 0; i < trace.n; ++i) {
    const auto& row = trace.assignments[static_cast<size_t>(i)];
    const int c = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    exp.argmax_cluster.push_back(c);
    exp.max_assignment.push_back(row[static_cast<size_t>(c)]);
    exp.cluster_nodes[static_cast<size_t>(c)].push_back(i);
  }
  return exp;
}

void write_instance_dots(const GraphTrace& trace, const InstanceExplanation& exp, const std::string& out_dir,
                         const std::string& dataset, const std::string& model) {
  for (size_t k = 0; k < exp.cluster_nodes.size(); ++k) {
    auto dot = open_out(out_dir, dataset + "_" + model + "_instance_" + std::to_string(trace.graph_id) +
                                     "_cluster" + std::to_string(k) + ".dot");
    dot << "graph instance_" << trace.graph_id << "_cluster" << k << " {\n";
    char imp[32];
    std::snprintf(imp, sizeof imp, "%.4f", exp.importance[k]);
    dot << "  label=\"graph " << trace.graph_id << " cluster " << k << " importance " << imp << "\";\n";
    std::set<int> members(exp.cluster_nodes[k].begin(), exp.cluster_nodes[k].end());
    for (int i = 0; i < trace.n; ++i) {
      if (members.count(i))
        dot << "  n" << i << " [style=filled, fillcolor=\"" << kPalette[k % 8] << "\"];\n";
      else
        dot << "  n" << i << " [style=filled, fillcolor=\"#eeeeee\", color=\"#bbbbbb\"];\n";
    }
    for (auto [i, j] : trace.edges) dot << "  n" << i << " -- n" << j << ";\n";
    dot << "}\n";
  }
}

void write_explanations_json(const std::vector<InstanceExplanation>& explanations, const std::string& out_dir) {
  nlohmann::json all = nlohmann::json::array();
  for (const auto& e : explanations) {
    nlohmann::json j;
    j["graph_id"] = e.graph_id;
    j["prediction"] = e.prediction;
    j["label"] = e.label;
    j["argmax_cluster"] = e.argmax_cluster;
    j["max_assignment"] = e.max_assignment;
    j["cluster_nodes"] = e.cluster_nodes;
    j["importance"] = e.importance;
    j["graph_concept"] = e.graph_concept;
    j["note"] ="importance scores are not calibrated: a low score may still correspond to the most decisive subgraph";
    all.push_back(std::move(j));
  }
  auto out = open_out(out_dir, "explanations.json");
  out << all.dump(2) << "\n";
}

}  // namespace scnet::explain
