#include "scnet/generators.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <stdexcept>

namespace scnet::data {

namespace {

uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  // splitmix64 over (seed, stream) so per-graph streams are independent
  uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Graph make_empty(int n, int f = 1) {
  Graph g;
  g.n = n;
  g.feature_width = f;
  g.adjacency.assign(static_cast<size_t>(n) * static_cast<size_t>(n), 0.0);
  g.features.assign(static_cast<size_t>(n) * static_cast<size_t>(f), f == 1 ? 1.0 : 0.0);
  g.motif_mask.assign(static_cast<size_t>(n), -1);
  return g;
}

void repair_connectivity(Graph& g, std::mt19937_64& rng) {
  // union components with single random edges until connected
  std::vector<int> comp(static_cast<size_t>(g.n), -1);
  int n_comp = 0;
  for (int s = 0; s < g.n; ++s) {
    if (comp[static_cast<size_t>(s)] >= 0) continue;
    std::vector<int> stack{s};
    comp[static_cast<size_t>(s)] = n_comp;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < g.n; ++v)
        if (g.adj(u, v) != 0.0 && comp[static_cast<size_t>(v)] < 0) {
          comp[static_cast<size_t>(v)] = n_comp;
          stack.push_back(v);
        }
    }
    ++n_comp;
  }
  if (n_comp <= 1) return;
  std::vector<std::vector<int>> members(static_cast<size_t>(n_comp));
  for (int i = 0; i < g.n; ++i) members[static_cast<size_t>(comp[static_cast<size_t>(i)])].push_back(i);
  std::shuffle(members.begin(), members.end(), rng);
  for (size_t c = 1; c < members.size(); ++c) {
    // bridge each component to the growing chain
    int a = members[c - 1][std::uniform_int_distribution<size_t>(0, members[c - 1].size() - 1)(rng)];
    int b = members[c][std::uniform_int_distribution<size_t>(0, members[c].size() - 1)(rng)];
    g.set_edge(a, b);
  }
}

struct MotifTemplate {
  int n;
  std::vector<std::pair<int, int>> edges;
};

MotifTemplate motif_template(MotifKind kind, int star_leaves) {
  switch (kind) {
    case MotifKind::Grid3x3: {
      MotifTemplate t{9, {}};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) {
          if (c + 1 < 3) t.edges.push_back({r * 3 + c, r * 3 + c + 1});
          if (r + 1 < 3) t.edges.push_back({r * 3 + c, (r + 1) * 3 + c});
        }
      return t;  // 12 lattice edges
    }
    case MotifKind::House:
    case MotifKind::ColouredHouse:
      // 4-cycle 0-1-2-3 plus roof apex 4 joined to the adjacent pair (0,1)
      return MotifTemplate{5, {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 0}, {4, 1}}};
    case MotifKind::Star: {
      MotifTemplate t{star_leaves + 1, {}};
      for (int i = 1; i <= star_leaves; ++i) t.edges.push_back({0, i});
      return t;
    }
  }
  throw std::invalid_argument("motif_template: unknown kind");
}

}  // namespace

DatasetSpec default_spec(const std::string& name, uint64_t seed) {
  DatasetSpec s;
  s.name = name;
  s.seed = seed;
  if (name == "grid") {
    s.count = 2000;
    s.base_min = 15;
    s.base_max = 20;
    s.ba_m = 1;
  } else if (name == "grid_house") {
    s.count = 1000;
    s.base_min = 111;
    s.base_max = 121;
    s.ba_m = 1;
  } else if (name == "stars") {
    s.count = 1500;
    s.base_min = 44;
    s.base_max = 54;
    s.er_p = 0.1;
  } else if (name == "house_colour") {
    s.count = 1000;
    s.base_min = 32;
    s.base_max = 42;
    s.ba_m = 1;
  } else {
    throw std::invalid_argument("default_spec: unknown dataset " + name);
  }
  return s;
}

Graph generate_ba(int n, int m, std::mt19937_64& rng) {
  if (m < 1 || n <= m) throw std::invalid_argument("generate_ba: need n > m >= 1, got n=" + std::to_string(n) + " m=" + std::to_string(m));
  Graph g = make_empty(n);
  for (int i = 0; i <= m; ++i)
    for (int j = i + 1; j <= m; ++j) g.set_edge(i, j);
  std::vector<int> degree(static_cast<size_t>(n), 0);
  for (int i = 0; i <= m; ++i) degree[static_cast<size_t>(i)] = m;
  int total_degree = m * (m + 1);
  for (int v = m + 1; v < n; ++v) {
    std::set<int> targets;
    while (static_cast<int>(targets.size()) < m) {
      // degree-proportional draw over existing nodes
      int pick = -1;
      long r = std::uniform_int_distribution<long>(0, total_degree - 1)(rng);
      for (int u = 0; u < v; ++u) {
        r -= degree[static_cast<size_t>(u)];
        if (r < 0) {
          pick = u;
          break;
        }
      }
      targets.insert(pick);
    }
    for (int u : targets) {
      g.set_edge(v, u);
      degree[static_cast<size_t>(u)] += 1;
      degree[static_cast<size_t>(v)] += 1;
      total_degree += 2;
    }
  }
  return g;
}

Graph generate_er(int n, double p, std::mt19937_64& rng) {
  if (p <= 0.0 || p > 1.0) throw std::invalid_argument("generate_er: need 0 < p <= 1");
  Graph g = make_empty(n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (unit(rng) < p) g.set_edge(i, j);
  repair_connectivity(g, rng);
  return g;
}

Graph attach_motif(const Graph& base, MotifKind kind, std::mt19937_64& rng, int motif_id,
                   int star_leaves, const std::vector<int>& colours) {
  if (base.n == 0) throw std::invalid_argument("attach_motif: empty base graph");
  MotifTemplate t = motif_template(kind, star_leaves);
  Graph g = make_empty(base.n + t.n, base.feature_width);
  g.label = base.label;
  for (int i = 0; i < base.n; ++i) {
    for (int j = 0; j < base.n; ++j)
      if (base.adj(i, j) != 0.0) g.set_edge(i, j);
    for (int k = 0; k < base.feature_width; ++k)
      g.features[static_cast<size_t>(i) * static_cast<size_t>(g.feature_width) + static_cast<size_t>(k)] =
          base.features[static_cast<size_t>(i) * static_cast<size_t>(base.feature_width) + static_cast<size_t>(k)];
  }
  if (!base.motif_mask.empty())
    std::copy(base.motif_mask.begin(), base.motif_mask.end(), g.motif_mask.begin());
  for (auto [a, b] : t.edges) g.set_edge(base.n + a, base.n + b);
  for (int i = 0; i < t.n; ++i) g.motif_mask[static_cast<size_t>(base.n + i)] = motif_id;
  if (kind == MotifKind::ColouredHouse) {
    if (static_cast<int>(colours.size()) != t.n) throw std::invalid_argument("attach_motif: coloured house needs one colour per motif node");
    for (int i = 0; i < t.n; ++i) {
      for (int k = 0; k < g.feature_width; ++k)
        g.features[static_cast<size_t>(base.n + i) * static_cast<size_t>(g.feature_width) + static_cast<size_t>(k)] =
            (k == colours[static_cast<size_t>(i)]) ? 1.0 : 0.0;
    }
  } else if (g.feature_width == 1) {
    for (int i = 0; i < t.n; ++i) g.features[static_cast<size_t>(base.n + i)] = 1.0;
  }
  // single bridge: random motif node to random base node
  int mnode = base.n + std::uniform_int_distribution<int>(0, t.n - 1)(rng);
  int bnode = std::uniform_int_distribution<int>(0, base.n - 1)(rng);
  g.set_edge(mnode, bnode);
  return g;
}

int grid_house_label_from_mask(const Graph& g) {
  std::set<int> ids;
  for (int id : g.motif_mask)
    if (id >= 0) ids.insert(id);
  return ids.size() == 1 ? 1 : 0;
}

namespace {

Graph build_grid_graph(const DatasetSpec& spec, int index, bool positive) {
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<uint64_t>(index)));
  int n = std::uniform_int_distribution<int>(spec.base_min, spec.base_max)(rng);
  Graph base = generate_ba(n, spec.ba_m, rng);
  Graph g = positive ? attach_motif(base, MotifKind::Grid3x3, rng, 0) : base;
  g.label = positive ? 1 : 0;
  return g;
}

Graph build_grid_house_graph(const DatasetSpec& spec, int index, int variant) {
  // variants: 0 = grid only, 1 = house only (label 1); 2 = both, 3 = none (label 0)
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<uint64_t>(index)));
  int n = std::uniform_int_distribution<int>(spec.base_min, spec.base_max)(rng);
  Graph g = generate_ba(n, spec.ba_m, rng);
  if (variant == 0) g = attach_motif(g, MotifKind::Grid3x3, rng, 0);
  if (variant == 1) g = attach_motif(g, MotifKind::House, rng, 0);
  if (variant == 2) {
    g = attach_motif(g, MotifKind::Grid3x3, rng, 0);
    g = attach_motif(g, MotifKind::House, rng, 1);
  }
  g.label = (variant == 0 || variant == 1) ? 1 : 0;
  return g;
}

Graph build_stars_graph(const DatasetSpec& spec, int index, int k_stars) {
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<uint64_t>(index)));
  int n = std::uniform_int_distribution<int>(spec.base_min, spec.base_max)(rng);
  Graph g = generate_er(n, spec.er_p, rng);
  for (int s = 0; s < k_stars; ++s) g = attach_motif(g, MotifKind::Star, rng, s, spec.star_leaves);
  g.label = k_stars == 1 ? 0 : (k_stars == 2 ? 1 : 2);
  return g;
}

Graph build_house_colour_graph(const DatasetSpec& spec, int index, bool positive) {
  std::mt19937_64 rng(mix_seed(spec.seed, static_cast<uint64_t>(index)));
  int n = std::uniform_int_distribution<int>(spec.base_min, spec.base_max)(rng);
  Graph base = generate_ba(n, spec.ba_m, rng);
  // one-hot colours: 0 = blue, 1 = green, 2 = red
  Graph g = make_empty(base.n, 3);
  for (int i = 0; i < base.n; ++i)
    for (int j = 0; j < base.n; ++j)
      if (base.adj(i, j) != 0.0) g.set_edge(i, j);
  std::uniform_int_distribution<int> colour(0, 2);
  for (int i = 0; i < g.n; ++i)
    g.features[static_cast<size_t>(i) * 3 + static_cast<size_t>(colour(rng))] = 1.0;
  int n_houses = std::uniform_int_distribution<int>(1, 3)(rng);
  int decision = std::uniform_int_distribution<int>(0, n_houses - 1)(rng);
  for (int h = 0; h < n_houses; ++h) {
    std::vector<int> cols(5);
    if (h == decision) {
      std::fill(cols.begin(), cols.end(), positive ? 0 : 1);  // uniform blue / green
    } else {
      // redraw accidental uniform blue/green houses; they would flip the label
      do {
        for (int& c : cols) c = colour(rng);
      } while (std::all_of(cols.begin(), cols.end(), [&](int c) { return c == cols[0]; }) && cols[0] != 2);
    }
    g = attach_motif(g, MotifKind::ColouredHouse, rng, h, spec.star_leaves, cols);
  }
  g.label = positive ? 1 : 0;
  return g;
}

}  // namespace

std::vector<Graph> build_dataset(const DatasetSpec& spec) {
  std::vector<Graph> out;
  out.reserve(static_cast<size_t>(spec.count));
  if (spec.name == "grid") {
    for (int i = 0; i < spec.count; ++i) out.push_back(build_grid_graph(spec, i, i < spec.count / 2));
  } else if (spec.name == "grid_house") {
    for (int i = 0; i < spec.count; ++i) {
      int variant = i * 4 / spec.count;  // quarters: grid-only, house-only, both, none
      out.push_back(build_grid_house_graph(spec, i, variant));
    }
  } else if (spec.name == "stars") {
    for (int i = 0; i < spec.count; ++i) {
      int k = 1 + (i * 4 / spec.count);  // uniform 1..4 stars
      out.push_back(build_stars_graph(spec, i, k));
    }
  } else if (spec.name == "house_colour") {
    for (int i = 0; i < spec.count; ++i) out.push_back(build_house_colour_graph(spec, i, i < spec.count / 2));
  } else {
    throw std::invalid_argument("build_dataset: unknown dataset " + spec.name);
  }
  return out;
}

}  // namespace scnet::data
