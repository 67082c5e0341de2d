#pragma once

// Loader for the TUDataset text format: name_A.txt ("i, j" 1-based edge
// pairs), name_graph_indicator.txt (1-based graph id per node line),
// name_graph_labels.txt (one integer per graph), optional
// name_node_labels.txt (one integer per node, one-hot encoded).

#include "scnet/graph.hpp"

#include <string>
#include <vector>

namespace scnet::data {

std::vector<Graph> load_tudataset(const std::string& directory, const std::string& name);

}  // namespace scnet::data
