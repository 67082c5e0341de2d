#pragma once

// Synthetic benchmark generators: BA / ER base graphs with motif
// attachment (3x3 grid, house, star, coloured house) and the four
// dataset builders (grid, grid_house, stars, house_colour).

#include "scnet/graph.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace scnet::data {

enum class MotifKind { Grid3x3, House, Star, ColouredHouse };

struct DatasetSpec {
  std::string name;       // grid | grid_house | stars | house_colour
  int count = 0;
  uint64_t seed = 0;
  int base_min = 0;       // base graph size drawn uniformly from [base_min, base_max]
  int base_max = 0;
  int ba_m = 1;           // BA attachment count
  double er_p = 0.1;      // ER edge probability
  int star_leaves = 5;
};

// Defaults sized so mean total graph size lands on the reference statistics
// (grid ~22, grid_house ~123, stars ~64, house_colour ~47).
DatasetSpec default_spec(const std::string& name, uint64_t seed = 0);

Graph generate_ba(int n, int m, std::mt19937_64& rng);
Graph generate_er(int n, double p, std::mt19937_64& rng);  // repaired to be connected

// Appends the motif (nodes after base nodes), adds one random bridge edge,
// marks motif nodes with motif_id. star_leaves only applies to Star; the
// colours vector (one colour index per motif node) only to ColouredHouse.
Graph attach_motif(const Graph& base, MotifKind kind, std::mt19937_64& rng, int motif_id,
                   int star_leaves = 5, const std::vector<int>& colours = {});

std::vector<Graph> build_dataset(const DatasetSpec& spec);

// independent label checker for grid_house: label 1 iff exactly one motif id present
int grid_house_label_from_mask(const Graph& g);

}  // namespace scnet::data
