#include "scnet/tudataset.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace scnet::data {

namespace {

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tudataset: missing file " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

long parse_int(const std::string& s, const std::string& file, size_t lineno) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing junk");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(file + ":" + std::to_string(lineno + 1) + ": cannot parse integer '" + s + "'");
  }
}

}  // namespace

std::vector<Graph> load_tudataset(const std::string& directory, const std::string& name) {
  const std::string base = directory + "/" + name + "_";
  auto indicator_lines = read_lines(base + "graph_indicator.txt");
  auto label_lines = read_lines(base + "graph_labels.txt");
  auto edge_lines = read_lines(base + "A.txt");

  const long n_nodes = static_cast<long>(indicator_lines.size());
  const long n_graphs = static_cast<long>(label_lines.size());

  // node -> graph, plus local index within the graph
  std::vector<long> node_graph(static_cast<size_t>(n_nodes));
  std::vector<int> node_local(static_cast<size_t>(n_nodes));
  std::vector<int> graph_size(static_cast<size_t>(n_graphs), 0);
  for (long i = 0; i < n_nodes; ++i) {
    long gid = parse_int(indicator_lines[static_cast<size_t>(i)], base + "graph_indicator.txt", static_cast<size_t>(i));
    if (gid < 1 || gid > n_graphs)
      throw std::runtime_error(base + "graph_indicator.txt:" + std::to_string(i + 1) + ": graph id " + std::to_string(gid) + " out of range");
    node_graph[static_cast<size_t>(i)] = gid - 1;
    node_local[static_cast<size_t>(i)] = graph_size[static_cast<size_t>(gid - 1)]++;
  }

  // optional node labels, one-hot encoded
  std::vector<long> node_labels;
  std::map<long, int> label_index;
  {
    std::ifstream probe(base + "node_labels.txt");
    if (probe) {
      auto lines = read_lines(base + "node_labels.txt");
      if (static_cast<long>(lines.size()) != n_nodes)
        throw std::runtime_error(base + "node_labels.txt: expected " + std::to_string(n_nodes) + " lines, found " + std::to_string(lines.size()));
      node_labels.reserve(lines.size());
      for (size_t i = 0; i < lines.size(); ++i) node_labels.push_back(parse_int(lines[i], base + "node_labels.txt", i));
      for (long v : node_labels) label_index.emplace(v, 0);
      int next = 0;
      for (auto& [v, idx] : label_index) idx = next++;
    }
  }
  const int f = node_labels.empty() ? 1 : static_cast<int>(label_index.size());

  // graph labels remapped to 0-based contiguous classes by sorted order
  std::vector<long> raw_labels;
  raw_labels.reserve(label_lines.size());
  for (size_t i = 0; i < label_lines.size(); ++i) raw_labels.push_back(parse_int(label_lines[i], base + "graph_labels.txt", i));
  std::map<long, int> class_index;
  for (long v : raw_labels) class_index.emplace(v, 0);
  {
    int next = 0;
    for (auto& [v, idx] : class_index) idx = next++;
  }

  std::vector<Graph> graphs(static_cast<size_t>(n_graphs));
  for (long gi = 0; gi < n_graphs; ++gi) {
    Graph& g = graphs[static_cast<size_t>(gi)];
    g.n = graph_size[static_cast<size_t>(gi)];
    g.feature_width = f;
    g.adjacency.assign(static_cast<size_t>(g.n) * static_cast<size_t>(g.n), 0.0);
    g.features.assign(static_cast<size_t>(g.n) * static_cast<size_t>(f), node_labels.empty() ? 1.0 : 0.0);
    g.label = class_index.at(raw_labels[static_cast<size_t>(gi)]);
  }
  if (!node_labels.empty()) {
    for (long i = 0; i < n_nodes; ++i) {
      Graph& g = graphs[static_cast<size_t>(node_graph[static_cast<size_t>(i)])];
      int col = label_index.at(node_labels[static_cast<size_t>(i)]);
      g.features[static_cast<size_t>(node_local[static_cast<size_t>(i)]) * static_cast<size_t>(f) + static_cast<size_t>(col)] = 1.0;
    }
  }

  for (size_t li = 0; li < edge_lines.size(); ++li) {
    const std::string& line = edge_lines[li];
    size_t comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(base + "A.txt:" + std::to_string(li + 1) + ": expected 'i, j', got '" + line + "'");
    long a = parse_int(line.substr(0, comma), base + "A.txt", li);
    std::string rest = line.substr(comma + 1);
    size_t start = rest.find_first_not_of(" \t");
    long b = parse_int(start == std::string::npos ? rest : rest.substr(start), base + "A.txt", li);
    if (a < 1 || a > n_nodes || b < 1 || b > n_nodes)
      throw std::runtime_error(base + "A.txt:" + std::to_string(li + 1) + ": node index out of declared range");
    long ga = node_graph[static_cast<size_t>(a - 1)], gb = node_graph[static_cast<size_t>(b - 1)];
    if (ga != gb)
      throw std::runtime_error(base + "A.txt:" + std::to_string(li + 1) + ": edge crosses graphs " + std::to_string(ga + 1) + " and " + std::to_string(gb + 1));
    Graph& g = graphs[static_cast<size_t>(ga)];
    if (a - 1 != b - 1) g.set_edge(node_local[static_cast<size_t>(a - 1)], node_local[static_cast<size_t>(b - 1)]);
  }
  return graphs;
}

}  // namespace scnet::data
