#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>

#include <nlohmann/json.hpp>

#include "fd_check.hpp"
#include "oracles.hpp"
#include "scnet/eval.hpp"
#include "scnet/generators.hpp"
#include "scnet/losses.hpp"
#include "scnet/tudataset.hpp"

using namespace scnet;
using nd::Shape;
using nd::Tape;
using T = nd::Tensor<double>;
namespace fs = std::filesystem;

// Each TEST_CASE below is one acceptance criterion and prints exactly one
// summary line. Criteria 2-6 and 9 evaluate the committed training artifacts
// under runs/acceptance (checkpoints and manifests produced by
// scripts/train_all.sh) against datasets regenerated deterministically here.

namespace {

void verdict(int n, bool pass, const std::string& detail) {
  std::printf("criterion %d: %s - %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  CHECK_MESSAGE(pass, "criterion ", n, ": ", detail);
}

std::string dir() { return ACCEPTANCE_DIR; }

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE_MESSAGE(in.good(), "missing artifact ", path, " (run scripts/train_all.sh)");
  nlohmann::json j;
  in >> j;
  return j;
}

const std::vector<uint64_t> kSeeds = {42, 76, 58, 92, 19};

struct DatasetCache {
  std::map<std::string, std::vector<data::Graph>> sets;
  const std::vector<data::Graph>& get(const std::string& name) {
    auto it = sets.find(name);
    if (it == sets.end()) it = sets.emplace(name, data::build_dataset(data::default_spec(name, 42))).first;
    return it->second;
  }
};
DatasetCache cache;

struct SeedEval {
  double test_acc = 0;
  double train_acc = 0;
  double completeness_ci = 0;  // concat-with-importance subgraph completeness
  double utilization_test = 0;
  double motif_separation = -1;
};

SeedEval eval_scn_seed(const std::string& dataset, uint64_t seed) {
  const auto& graphs = cache.get(dataset);
  train::RunConfig cfg = train::defaults_for(dataset);
  nlohmann::json manifest = load_json(dir() + "/" + dataset + "_scn_seed" + std::to_string(seed) + ".manifest.json");
  REQUIRE_MESSAGE(manifest.at("dataset_hash").get<uint64_t>() == train::dataset_hash(graphs),
                  "regenerated ", dataset, " does not match the dataset the checkpoint was trained on");
  nlohmann::json ckpt = load_json(dir() + "/" + dataset + "_scn_seed" + std::to_string(seed) + ".ckpt.json");
  auto params = train::scn_from_checkpoint<float>(ckpt);
  data::Split split = data::stratified_split(graphs, cfg.train_fraction, seed);
  auto tr = eval::run_scn(graphs, split.train, params, cfg.batch_size);
  auto te = eval::run_scn(graphs, split.test, params, cfg.batch_size);
  const int n_classes = data::class_count(graphs);
  SeedEval out;
  out.train_acc = metrics::accuracy(tr.logits, tr.labels);
  out.test_acc = metrics::accuracy(te.logits, te.labels);
  out.completeness_ci = eval::subgraph_completeness(tr, te, n_classes, eval::SubgraphMode::concat_with_importance);
  out.utilization_test = eval::cluster_scores(te).cluster_utilization;
  out.motif_separation = eval::motif_separation(te.traces);
  return out;
}

double eval_cgn_seed(const std::string& dataset, const std::string& model, uint64_t seed) {
  const auto& graphs = cache.get(dataset);
  train::RunConfig cfg = train::defaults_for(dataset);
  nlohmann::json ckpt = load_json(dir() + "/" + dataset + "_" + model + "_seed" + std::to_string(seed) + ".ckpt.json");
  auto params = train::cgn_from_checkpoint<float>(ckpt);
  data::Split split = data::stratified_split(graphs, cfg.train_fraction, seed);
  auto fwd = [&](const data::PaddedBatch& b) {
    return (params.variant == baselines::CGNVariant::mean_pool
                ? baselines::cgn_meanpool_forward(b, params, static_cast<Tape<float>*>(nullptr))
                : baselines::cgn_diffpool_forward(b, params, static_cast<Tape<float>*>(nullptr)))
        .logits;
  };
  return train::eval_accuracy<float>(graphs, split.test, cfg.batch_size, fwd);
}

std::map<std::string, std::vector<SeedEval>> scn_cache;

const std::vector<SeedEval>& scn_runs(const std::string& dataset) {
  auto it = scn_cache.find(dataset);
  if (it != scn_cache.end()) return it->second;
  std::vector<SeedEval> runs;
  for (uint64_t s : kSeeds) runs.push_back(eval_scn_seed(dataset, s));
  return scn_cache.emplace(dataset, std::move(runs)).first->second;
}

double mean_of(const std::vector<SeedEval>& runs, double SeedEval::* field) {
  double m = 0;
  for (const auto& r : runs) m += r.*field;
  return m / static_cast<double>(runs.size());
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

// fd harness over one input of a scalarized expression
fd::Report check_op(std::vector<double>& vals, Shape shape, const std::function<T(const T&)>& expr) {
  auto eval = [&]() {
    T x(shape, vals);
    return nd::sum_all(expr(x)).at(0);
  };
  Tape<double> tape;
  T x(shape, vals);
  x.tape = &tape;
  x.node = tape.push(x.size(), nullptr);
  tape.backward(nd::sum_all(expr(x)));
  return fd::check(vals, tape.grad(x.node), eval);
}

}  // namespace

TEST_CASE("criterion 1: gradient oracle") {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.2, 2.0), su(-2.0, 2.0);

  // per-op central finite differences, double precision, h = 1e-5
  double max_op_rel = 0;
  int ops = 0;
  auto sweep = [&](Shape shape, bool positive, const std::function<T(const T&)>& expr) {
    std::vector<double> vals(static_cast<size_t>(nd::shape_numel(shape)));
    for (double& v : vals) v = positive ? u(rng) : su(rng);
    max_op_rel = std::max(max_op_rel, check_op(vals, shape, expr).max_rel_err);
    ++ops;
  };
  std::vector<double> wv(12);
  for (double& v : wv) v = su(rng);
  T w({3, 4}, wv);
  std::vector<double> mask = {1, 1, 0};
  sweep({3, 4}, false, [&](const T& x) { return nd::mul(nd::add(x, w), nd::sub(x, w)); });
  sweep({3, 4}, true, [&](const T& x) { return nd::div(w, x); });
  sweep({3, 4}, false, [&](const T& x) { return nd::matmul(x, x, true, false); });
  sweep({2, 3, 4}, false, [&](const T& x) { return nd::matmul(x, x, false, true); });
  sweep({3, 4}, false, [&](const T& x) { return nd::sigmoid(nd::scale(x, 0.7)); });
  sweep({3, 4}, false, [&](const T& x) { return nd::relu(nd::add_const(x, 0.3)); });
  sweep({3, 4}, true, [&](const T& x) { return nd::log_t(x, 1e-12); });
  sweep({3, 4}, true, [&](const T& x) { return nd::sqrt_t(x, 1e-20); });
  sweep({3, 4}, true, [&](const T& x) { return nd::pow_const(x, 4.0); });
  sweep({3, 4}, false, [&](const T& x) { return nd::exp_t(nd::neg(x)); });
  sweep({3, 4}, false, [&](const T& x) { return nd::mul(nd::softmax_lastdim(x, mask), w); });
  sweep({3, 4}, false, [&](const T& x) { return nd::mul(nd::sum_axis(x, 1), nd::sum_axis(w, 1)); });
  sweep({2, 3, 4}, false, [&](const T& x) { return nd::mul(nd::mean_axis(x, 1), nd::mean_axis(x, 1)); });
  sweep({4, 3}, false, [&](const T& x) { return nd::mul(nd::slice_rows(x, 0, 2), nd::slice_rows(x, 2, 2)); });
  sweep({4, 3}, false, [&](const T& x) { return nd::mul(nd::gather_rows(x, {0, 2, 2}), nd::gather_rows(x, {3, 1, 2})); });
  sweep({4, 3}, false, [&](const T& x) { return nd::concat_rows(std::vector<T>{x, nd::scale(x, 2.0)}); });
  sweep({4, 3}, false, [&](const T& x) { return nd::mul(nd::concat_lastdim(std::vector<T>{x, x}), nd::concat_lastdim(std::vector<T>{x, nd::scale(x, 0.5)})); });
  sweep({4, 3}, false, [&](const T& x) { return nd::reshape(nd::mul(x, x), {2, 6}); });

  // end-to-end: full model + all loss terms on a 2-graph toy batch
  std::mt19937_64 grng(5);
  model::SCNConfig cfg;
  cfg.layers = 2;
  cfg.hidden = 6;
  cfg.s = 4;
  cfg.K = 2;
  cfg.s_sub = 3;
  cfg.f = 2;
  cfg.classes = 2;
  std::vector<data::Graph> gs;
  for (int n : {5, 4}) {
    data::Graph g;
    g.n = n;
    g.feature_width = 2;
    g.adjacency.assign(static_cast<size_t>(n) * n, 0.0);
    g.features.resize(static_cast<size_t>(n) * 2);
    std::uniform_real_distribution<double> fu(0, 1);
    for (double& v : g.features) v = fu(grng);
    for (int i = 1; i < n; ++i) g.set_edge(i, static_cast<int>(grng() % static_cast<uint64_t>(i)));
    g.label = static_cast<int>(grng() % 2);
    gs.push_back(g);
  }
  data::PaddedBatch batch = data::pad_batch(gs, 5);
  losses::LossWeights w2;
  w2.pair_cap = 1 << 30;
  model::SCNParams<double> params(cfg, grng);
  nd::ParamRefs<double> refs = params.params();
  Tape<double> tape;
  nd::zero_grads(refs);
  {
    auto cluster_bn = params.cluster_bn;
    auto sub_bn = params.sub_bn;
    auto trace = model::scn_forward(batch, params, true, &tape);
    std::mt19937_64 lrng(7);
    tape.backward(losses::total_loss(trace, batch, w2, lrng).total);
    params.cluster_bn = cluster_bn;
    params.sub_bn = sub_bn;
  }
  double max_e2e_rel = 0;
  for (nd::Parameter<double>* p : refs) {
    const size_t step = std::max<size_t>(1, p->value.size() / 4);
    for (size_t i = 0; i < p->value.size(); i += step) {
      const double h = 1e-5, orig = p->value.at(i);
      auto eval = [&](double v) {
        p->value.at(i) = v;
        auto cluster_bn = params.cluster_bn;
        auto sub_bn = params.sub_bn;
        auto trace = model::scn_forward(batch, params, true, static_cast<Tape<double>*>(nullptr));
        std::mt19937_64 lrng(7);
        double out = losses::total_loss(trace, batch, w2, lrng).total_value;
        params.cluster_bn = cluster_bn;
        params.sub_bn = sub_bn;
        p->value.at(i) = orig;
        return out;
      };
      const double fd = (eval(orig + 1e-5) - eval(orig - 1e-5)) / 2e-5;
      const double an = p->grad[i];
      max_e2e_rel = std::max(max_e2e_rel, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}));
    }
  }

  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool pass = max_op_rel < 1e-5 && max_e2e_rel < 1e-3 && secs < 60.0;
  verdict(1, pass,
          "per-op max rel err " + fmt(max_op_rel * 1e6) + "e-6 over " + std::to_string(ops) +
              " ops (< 1e-5), end-to-end " + fmt(max_e2e_rel * 1e4) + "e-4 (< 1e-3), " + fmt(secs) + "s (< 60s)");
}

TEST_CASE("criterion 2: grid accuracy") {
  const auto& runs = scn_runs("grid");
  const double mean = mean_of(runs, &SeedEval::test_acc);
  double wall = 0;
  for (uint64_t s : kSeeds)
    wall += load_json(dir() + "/grid_scn_seed" + std::to_string(s) + ".manifest.json").at("wall_seconds").get<double>();
  verdict(2, mean >= 95.0,
          "mean test accuracy " + fmt(mean) + " over 5 seeds (>= 95); training wall time " + fmt(wall / 60.0) + " min");
}

TEST_CASE("criterion 3: stars and house-colour accuracy") {
  const double stars = mean_of(scn_runs("stars"), &SeedEval::test_acc);
  const double hc = mean_of(scn_runs("house_colour"), &SeedEval::test_acc);
  verdict(3, stars >= 95.0 && hc >= 95.0,
          "stars mean test accuracy " + fmt(stars) + " (>= 95), house_colour " + fmt(hc) + " (>= 95)");
}

TEST_CASE("criterion 4: grid-house accuracy and diffpool failure mode") {
  const double gh = mean_of(scn_runs("grid_house"), &SeedEval::test_acc);
  double dp = 0;
  for (uint64_t s : kSeeds) dp += eval_cgn_seed("grid_house", "cgn_diffpool", s);
  dp /= static_cast<double>(kSeeds.size());
  verdict(4, gh >= 70.0 && dp >= 45.0 && dp <= 55.0,
          "grid_house SCN mean test accuracy " + fmt(gh) + " at the 500-epoch fast setting (>= 70); "
          "cgn_diffpool " + fmt(dp) + " (within 45-55, the reproduced failure mode)");
}

TEST_CASE("criterion 5: cluster utilization") {
  const double grid = mean_of(scn_runs("grid"), &SeedEval::utilization_test);
  const double stars = mean_of(scn_runs("stars"), &SeedEval::utilization_test);
  // degenerate check: everything forced into one of K=4 clusters
  std::vector<std::vector<double>> forced(40, {1.0, 0.0, 0.0, 0.0});
  std::vector<char> mask(40, 1);
  const double degenerate = metrics::cluster_utilization(forced, mask);
  verdict(5, grid >= 0.85 && stars >= 0.90 && degenerate == 0.25,
          "grid test utilization " + fmt(grid) + " (>= 0.85), stars " + fmt(stars) +
              " (>= 0.90), forced single-cluster utilization = " + fmt(degenerate) + " (exactly 1/K)");
}

TEST_CASE("criterion 6: concept completeness") {
  const auto& grid = scn_runs("grid");
  const double grid_ci = mean_of(grid, &SeedEval::completeness_ci);
  const double grid_acc = mean_of(grid, &SeedEval::test_acc);
  const double hc_ci = mean_of(scn_runs("house_colour"), &SeedEval::completeness_ci);
  verdict(6, grid_ci >= 90.0 && std::abs(grid_acc - grid_ci) <= 10.0 && hc_ci >= 90.0,
          "grid concat+importance subgraph completeness " + fmt(grid_ci) + " (>= 90, within 10 of accuracy " +
              fmt(grid_acc) + "), house_colour " + fmt(hc_ci) + " (>= 90)");
}

TEST_CASE("criterion 7: metric oracles") {
  // (a) greedy depth-2 tree equals the brute-force optimum on every multiset
  //     of <= 8 rows over 2 binary features and binary labels (12,869 tables)
  bool tree_ok = true;
  long tables = 0;
  std::vector<int> counts(8, 0);  // row types: (f0, f1, label) bits
  std::function<void(int, int)> enumerate = [&](int type, int remaining) {
    if (type == 8) {
      int n = 0;
      for (int c : counts) n += c;
      if (n < 1) return;
      std::vector<std::vector<double>> rows;
      std::vector<int> labels;
      for (int t = 0; t < 8; ++t)
        for (int c = 0; c < counts[static_cast<size_t>(t)]; ++c) {
          rows.push_back({static_cast<double>(t & 1), static_cast<double>((t >> 1) & 1)});
          labels.push_back((t >> 2) & 1);
        }
      metrics::DecisionTree t;
      t.fit(rows, labels, 2, metrics::TreeConfig{2, 2});
      int greedy_hits = 0;
      for (size_t i = 0; i < rows.size(); ++i) greedy_hits += t.predict(rows[i]) == labels[i];
      // brute force: all 3 split structures x best leaf classes
      int best = std::max(static_cast<int>(labels.size()) - greedy_hits, 0);  // placeholder, recomputed below
      best = 0;
      auto cell_majority = [&](const std::function<int(size_t)>& cell_of, int n_cells) {
        std::vector<std::array<int, 2>> h(static_cast<size_t>(n_cells), {0, 0});
        for (size_t i = 0; i < rows.size(); ++i)
          h[static_cast<size_t>(cell_of(i))][static_cast<size_t>(labels[i])] += 1;
        int hits = 0;
        for (const auto& c : h) hits += std::max(c[0], c[1]);
        return hits;
      };
      best = std::max(best, cell_majority([&](size_t) { return 0; }, 1));                      // depth 0
      best = std::max(best, cell_majority([&](size_t i) { return rows[i][0] > 0.5; }, 2));     // depth 1 on f0
      best = std::max(best, cell_majority([&](size_t i) { return rows[i][1] > 0.5; }, 2));     // depth 1 on f1
      best = std::max(best, cell_majority([&](size_t i) { return (rows[i][0] > 0.5) * 2 + (rows[i][1] > 0.5); }, 4));
      if (greedy_hits != best) tree_ok = false;
      ++tables;
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[static_cast<size_t>(type)] = c;
      enumerate(type + 1, remaining - c);
    }
    counts[static_cast<size_t>(type)] = 0;
  };
  enumerate(0, 8);

  // (b) every loss term and cluster metric matches an independent
  //     re-implementation on 1000 fuzzed inputs to 1e-9
  std::mt19937_64 rng(2024);
  losses::LossWeights w;
  double worst = 0;
  auto diff = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  for (int trial = 0; trial < 1000; ++trial) {
    const int B = 1 + static_cast<int>(rng() % 3);
    const int N = 3 + static_cast<int>(rng() % 5);
    const int K = 2 + static_cast<int>(rng() % 3);
    oracle::RawBatch r = oracle::random_batch(B, N, K, rng);
    T assign = r.assignments();
    diff(losses::entropy_loss(assign, r.b).at(0), oracle::oracle_entropy(r));
    diff(losses::pos_sim_penalty(assign, r.b, w.margin).at(0), oracle::oracle_pos(r, w.margin));
    diff(losses::neg_sim_penalty(assign, r.b).at(0), oracle::oracle_neg(r));
    diff(losses::isolation_penalty(assign, r.b, w.tau).at(0), oracle::oracle_iso(r, w.tau));
    diff(losses::utilisation_loss(assign, r.b).at(0), oracle::oracle_util(r));
    const int d = 3;
    std::vector<double> emb(static_cast<size_t>(B * N * d));
    std::uniform_real_distribution<double> su(-2, 2);
    for (double& v : emb) v = su(rng);
    losses::LossWeights wexact = w;
    wexact.pair_cap = 1 << 30;
    std::mt19937_64 crng(0);
    diff(losses::consistency_loss(T({B, N, d}, emb), assign, r.b, wexact, crng).at(0),
         oracle::oracle_consistency(r, emb, d, w.gamma));

    // cluster metrics over the same fuzzed assignments
    std::vector<std::vector<double>> a2;
    std::vector<char> mask2;
    for (int i = 0; i < B * N; ++i) {
      std::vector<double> row(static_cast<size_t>(K));
      for (int k = 0; k < K; ++k) row[static_cast<size_t>(k)] = r.assign[static_cast<size_t>(i * K + k)];
      a2.push_back(row);
      mask2.push_back(r.b.mask[static_cast<size_t>(i)] != 0);
    }
    diff(metrics::subgraph_assignment_strength(a2, mask2), oracle::oracle_assignment_strength(a2, mask2));
    diff(metrics::cluster_utilization(a2, mask2), oracle::oracle_utilization_metric(a2, mask2));
    auto c1 = metrics::conditional_assignment_strength(a2, mask2);
    auto c2 = oracle::oracle_conditional_strength(a2, mask2);
    for (size_t k = 0; k < c1.size(); ++k) diff(c1[k], c2[k]);
  }

  verdict(7, tree_ok && worst < 1e-9,
          "greedy depth-2 tree = brute-force optimum on all " + std::to_string(tables) +
              " enumerable 2-feature tables; loss/metric oracle max abs diff " + fmt(worst * 1e12) +
              "e-12 over 1000 fuzzed inputs (< 1e-9)");
}

TEST_CASE("criterion 8: loss bounds and limit cases") {
  bool ok = true;
  losses::LossWeights w;
  w.pair_cap = 1 << 30;

  // analytic limit cases
  {
    oracle::RawBatch onehot(1, 2, 2);
    onehot.row(0, 0, {1, 0});
    onehot.row(0, 1, {0, 1});
    ok &= std::abs(losses::entropy_loss(onehot.assignments(), onehot.b).at(0)) < 1e-6;
    oracle::RawBatch uni(1, 2, 2);
    uni.row(0, 0, {0.5, 0.5});
    uni.row(0, 1, {0.5, 0.5});
    ok &= std::abs(losses::entropy_loss(uni.assignments(), uni.b).at(0) - 1.0) < 1e-6;
    oracle::RawBatch single(1, 4, 2);
    for (int i = 0; i < 4; ++i) single.row(0, i, {1, 0});
    ok &= std::abs(losses::utilisation_loss(single.assignments(), single.b).at(0) - 1.0) < 1e-6;
    ok &= std::abs(losses::utilisation_loss(uni.assignments(), uni.b).at(0)) < 1e-6;
  }

  // fuzzed bounds + padding and cluster-permutation invariance
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100 && ok; ++trial) {
    const int B = 2, N = 6, K = 3;
    oracle::RawBatch r = oracle::random_batch(B, N, K, rng, false);
    T assign = r.assignments();
    const double vals[6] = {
        losses::entropy_loss(assign, r.b).at(0),
        losses::pos_sim_penalty(assign, r.b, w.margin).at(0),
        losses::neg_sim_penalty(assign, r.b).at(0),
        losses::isolation_penalty(assign, r.b, w.tau).at(0),
        losses::utilisation_loss(assign, r.b).at(0),
        losses::connectivity_loss(assign, r.b, w).combined.at(0),
    };
    for (double v : vals) ok &= v >= -1e-9 && v <= 1.0 + 1e-9;

    oracle::RawBatch perm = r;
    for (int g = 0; g < B; ++g)
      for (int i = 0; i < N; ++i) {
        std::vector<double> c(static_cast<size_t>(K));
        for (int k = 0; k < K; ++k)
          c[static_cast<size_t>(k)] = r.assign[static_cast<size_t>((g * N + i) * K + (k + 1) % K)];
        perm.row(g, i, c);
      }
    ok &= std::abs(losses::entropy_loss(perm.assignments(), perm.b).at(0) - vals[0]) < 1e-9;
    ok &= std::abs(losses::utilisation_loss(perm.assignments(), perm.b).at(0) - vals[4]) < 1e-9;

    oracle::RawBatch padded(B, N + 2, K);
    for (int g = 0; g < B; ++g) {
      for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) padded.b.adjacency[padded.idx(g, i, j)] = r.b.adjacency[r.idx(g, i, j)];
      for (int i = 0; i < N; ++i) {
        std::vector<double> c(static_cast<size_t>(K));
        for (int k = 0; k < K; ++k) c[static_cast<size_t>(k)] = r.assign[static_cast<size_t>((g * N + i) * K + k)];
        padded.row(g, i, c);
      }
      padded.pad(g, N);
      padded.pad(g, N + 1);
    }
    T passign = padded.assignments();
    ok &= std::abs(losses::entropy_loss(passign, padded.b).at(0) - vals[0]) < 1e-9;
    ok &= std::abs(losses::pos_sim_penalty(passign, padded.b, w.margin).at(0) - vals[1]) < 1e-9;
    ok &= std::abs(losses::neg_sim_penalty(passign, padded.b).at(0) - vals[2]) < 1e-9;
    ok &= std::abs(losses::isolation_penalty(passign, padded.b, w.tau).at(0) - vals[3]) < 1e-9;
    ok &= std::abs(losses::utilisation_loss(passign, padded.b).at(0) - vals[4]) < 1e-9;
  }

  verdict(8, ok,
          "all custom terms in [0,1] on fuzzed inputs; one-hot/uniform entropy and utilisation limits exact; "
          "padding and cluster-permutation invariance hold to 1e-9");
}

TEST_CASE("criterion 9: motif recovery") {
  const auto& runs = scn_runs("grid");
  double best = -1;
  for (const auto& r : runs) best = std::max(best, r.motif_separation);
  const double seed42 = runs[0].motif_separation;
  verdict(9, seed42 >= 0.2,
          "grid seed-42 SCN: best cluster separates motif from base nodes by " + fmt(seed42) +
              " mean assignment (>= 0.2); best across seeds " + fmt(best));
}

TEST_CASE("criterion 10: data fidelity") {
  struct Want {
    const char* name;
    int count;
    double mean_size;
    int classes;
    int f;
  };
  const Want wants[] = {
      {"grid", 2000, 22.17, 2, 1},
      {"grid_house", 1000, 122.82, 2, 1},
      {"stars", 1500, 63.92, 3, 1},
      {"house_colour", 1000, 46.95, 2, 3},
  };
  bool ok = true;
  std::string detail;
  for (const Want& want : wants) {
    const auto& graphs = cache.get(want.name);
    double mean = 0;
    for (const auto& g : graphs) mean += g.n;
    mean /= static_cast<double>(graphs.size());
    const int classes = data::class_count(graphs);
    const int f = graphs[0].feature_width;
    const bool this_ok = static_cast<int>(graphs.size()) == want.count && std::abs(mean - want.mean_size) <= 3.0 &&
                         classes == want.classes && f == want.f;
    ok &= this_ok;
    detail += std::string(want.name) + " " + std::to_string(graphs.size()) + "/" + fmt(mean) + " ";
  }

  // TU loader: full check only when the standard Mutagenicity files exist
  const std::string mutag = std::string(ACCEPTANCE_DATA_DIR) + "/Mutagenicity";
  if (fs::exists(mutag + "/Mutagenicity_A.txt")) {
    auto graphs = data::load_tudataset(mutag, "Mutagenicity");
    double mean = 0;
    for (const auto& g : graphs) mean += g.n;
    mean /= static_cast<double>(graphs.size());
    const bool tu_ok = graphs.size() == 4337 && std::abs(mean - 30.32) < 0.1 && graphs[0].feature_width == 14;
    ok &= tu_ok;
    detail += "mutagenicity " + std::to_string(graphs.size()) + "/" + fmt(mean);
  } else {
    detail += "(Mutagenicity files not present; loader verified on the bundled fixture instead)";
    auto fixture = data::load_tudataset(FIXTURE_DIR "/tu", "FIX");
    ok &= fixture.size() == 2 && fixture[0].feature_width == 3;
  }

  verdict(10, ok, "generated stats [count/mean size] " + detail);
}
