#pragma once

// Training orchestration: per-dataset default configurations, the Adam
// training loop with shuffled per-epoch batches and per-batch padding,
// best-test-accuracy checkpointing, JSON checkpoint round-tripping, and
// run manifests with per-epoch loss logs.

#include <chrono>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scnet/baselines.hpp"
#include "scnet/losses.hpp"
#include "scnet/metrics.hpp"
#include "scnet/model.hpp"

namespace scnet::train {

using json = nlohmann::json;

struct RunConfig {
  std::string dataset = "grid";
  std::string model = "scn";  // scn | cgn_mean | cgn_diffpool
  model::SCNConfig arch;
  losses::LossWeights weights;
  int epochs = 300;
  int batch_size = 16;
  double lr = 1e-3;
  std::vector<uint64_t> seeds = {42, 76, 58, 92, 19};
  std::string out_dir = "runs";
  double train_fraction = 0.8;
};

// architecture and schedule defaults per dataset
inline RunConfig defaults_for(const std::string& dataset) {
  RunConfig c;
  c.dataset = dataset;
  auto set = [&](int layers, int hidden, int s, int K, int s_sub, int epochs) {
    c.arch.layers = layers;
    c.arch.hidden = hidden;
    c.arch.s = s;
    c.arch.K = K;
    c.arch.s_sub = s_sub;
    c.epochs = epochs;
  };
  if (dataset == "grid") set(5, 20, 10, 2, 8, 300);
  else if (dataset == "grid_house") set(4, 20, 10, 4, 10, 2000);
  else if (dataset == "stars") set(2, 10, 4, 2, 4, 300);
  else if (dataset == "house_colour") set(2, 10, 10, 4, 8, 300);
  else if (dataset == "mutagenicity") set(3, 40, 10, 10, 10, 1000);
  else if (dataset == "reddit_binary") set(3, 32, 10, 10, 10, 1000);
  else throw std::invalid_argument("defaults_for: unknown dataset " + dataset);
  return c;
}

struct EpochRow {
  int epoch = 0;
  double total = 0, ce = 0, entropy = 0, connectivity = 0, pos = 0, neg = 0, iso = 0;
  double utilisation = 0, consistency = 0;
  double train_acc = 0, test_acc = 0;
};

struct TrainResult {
  std::vector<EpochRow> log;
  double best_test_acc = 0;
  int best_epoch = -1;
  json checkpoint;          // parameters at the best epoch
  double wall_seconds = 0;
  bool numeric_failure = false;  // NaN/Inf loss encountered
};

// -------- checkpoint container: name -> {shape, values} ------------------

template <typename Real>
json params_to_json(const nd::ParamRefs<Real>& params) {
  json j = json::object();
  for (const auto* p : params) {
    json entry;
    entry["shape"] = p->value.shape;
    entry["values"] = *p->value.data;
    j[p->name] = std::move(entry);
  }
  return j;
}

template <typename Real>
void params_from_json(const json& j, const nd::ParamRefs<Real>& params) {
  for (auto* p : params) {
    if (!j.contains(p->name)) throw std::invalid_argument("checkpoint: missing parameter " + p->name);
    const json& entry = j.at(p->name);
    std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
    if (shape != p->value.shape)
      throw std::invalid_argument("checkpoint: shape mismatch for " + p->name);
    std::vector<Real> values = entry.at("values").get<std::vector<Real>>();
    p->value = nd::Tensor<Real>(shape, std::move(values));
  }
}

template <typename Real>
json bn_to_json(const nd::BatchNormState<Real>& st) {
  return json{{"running_mean", st.running_mean}, {"running_var", st.running_var}};
}

template <typename Real>
void bn_from_json(const json& j, nd::BatchNormState<Real>& st) {
  st.running_mean = j.at("running_mean").get<std::vector<Real>>();
  st.running_var = j.at("running_var").get<std::vector<Real>>();
}

inline json arch_to_json(const model::SCNConfig& a) {
  return json{{"layers", a.layers}, {"hidden", a.hidden}, {"s", a.s},       {"K", a.K},
              {"s_sub", a.s_sub},   {"f", a.f},           {"classes", a.classes}};
}

inline model::SCNConfig arch_from_json(const json& j) {
  model::SCNConfig a;
  a.layers = j.at("layers");
  a.hidden = j.at("hidden");
  a.s = j.at("s");
  a.K = j.at("K");
  a.s_sub = j.at("s_sub");
  a.f = j.at("f");
  a.classes = j.at("classes");
  return a;
}

template <typename Real>
json scn_checkpoint(model::SCNParams<Real>& params) {
  json j;
  j["variant"] = "scn";
  j["config"] = arch_to_json(params.config);
  j["parameters"] = params_to_json(params.params());
  j["cluster_bn"] = bn_to_json(params.cluster_bn);
  j["sub_bn"] = bn_to_json(params.sub_bn);
  return j;
}

template <typename Real>
model::SCNParams<Real> scn_from_checkpoint(const json& j) {
  if (j.at("variant") != "scn") throw std::invalid_argument("checkpoint: variant is not scn");
  std::mt19937_64 rng(0);
  model::SCNParams<Real> params(arch_from_json(j.at("config")), rng);
  params_from_json(j.at("parameters"), params.params());
  bn_from_json(j.at("cluster_bn"), params.cluster_bn);
  bn_from_json(j.at("sub_bn"), params.sub_bn);
  return params;
}

template <typename Real>
json cgn_checkpoint(baselines::CGNParams<Real>& params) {
  json j;
  j["variant"] = params.variant == baselines::CGNVariant::mean_pool ? "cgn_mean" : "cgn_diffpool";
  j["config"] = arch_to_json(params.config);
  j["parameters"] = params_to_json(params.params());
  return j;
}

template <typename Real>
baselines::CGNParams<Real> cgn_from_checkpoint(const json& j) {
  const std::string v = j.at("variant");
  baselines::CGNVariant variant;
  if (v == "cgn_mean") variant = baselines::CGNVariant::mean_pool;
  else if (v == "cgn_diffpool") variant = baselines::CGNVariant::diffpool;
  else throw std::invalid_argument("checkpoint: variant is not a cgn");
  std::mt19937_64 rng(0);
  baselines::CGNParams<Real> params(arch_from_json(j.at("config")), variant, rng);
  params_from_json(j.at("parameters"), params.params());
  return params;
}

// -------- batching --------------------------------------------------------

inline std::vector<std::vector<int>> make_batches(std::vector<int> indices, int batch_size,
                                                  std::mt19937_64& rng, bool shuffle) {
  if (shuffle) std::shuffle(indices.begin(), indices.end(), rng);
  std::vector<std::vector<int>> batches;
  for (size_t i = 0; i < indices.size(); i += static_cast<size_t>(batch_size)) {
    std::vector<int> b(indices.begin() + static_cast<long>(i),
                       indices.begin() + static_cast<long>(std::min(i + static_cast<size_t>(batch_size), indices.size())));
    batches.push_back(std::move(b));
  }
  return batches;
}

inline data::PaddedBatch batch_of(const std::vector<data::Graph>& dataset, const std::vector<int>& indices) {
  std::vector<const data::Graph*> ptrs;
  int max_n = 0;
  for (int i : indices) {
    ptrs.push_back(&dataset[static_cast<size_t>(i)]);
    max_n = std::max(max_n, dataset[static_cast<size_t>(i)].n);
  }
  return data::pad_batch(ptrs, max_n);
}

// -------- evaluation (no tape) --------------------------------------------

template <typename Real, typename Forward>
double eval_accuracy(const std::vector<data::Graph>& dataset, const std::vector<int>& indices, int batch_size,
                     Forward&& forward) {
  std::vector<std::vector<double>> logits;
  std::vector<int> labels;
  std::mt19937_64 dummy(0);
  for (const auto& bidx : make_batches(indices, batch_size, dummy, false)) {
    data::PaddedBatch batch = batch_of(dataset, bidx);
    nd::Tensor<Real> out = forward(batch);
    const int C = out.shape[1];
    for (int r = 0; r < out.shape[0]; ++r) {
      std::vector<double> row(static_cast<size_t>(C));
      for (int c = 0; c < C; ++c) row[static_cast<size_t>(c)] = static_cast<double>(out.at(static_cast<size_t>(r * C + c)));
      logits.push_back(std::move(row));
      labels.push_back(batch.labels[static_cast<size_t>(r)]);
    }
  }
  return metrics::accuracy(logits, labels);
}

// -------- training loops ---------------------------------------------------

template <typename Real>
TrainResult train_scn(const std::vector<data::Graph>& dataset, RunConfig config, uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  config.arch.f = dataset.empty() ? config.arch.f : dataset[0].feature_width;
  config.arch.classes = data::class_count(dataset);

  data::Split split = data::stratified_split(dataset, config.train_fraction, seed);
  std::mt19937_64 rng(seed);
  model::SCNParams<Real> params(config.arch, rng);
  nd::ParamRefs<Real> refs = params.params();
  nd::AdamState<Real> opt;
  opt.lr = static_cast<Real>(config.lr);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_total = 0, epoch_ce = 0, epoch_ent = 0, epoch_conn = 0, epoch_pos = 0, epoch_neg = 0,
           epoch_iso = 0, epoch_util = 0, epoch_cons = 0;
    size_t train_hits = 0;
    auto batches = make_batches(split.train, config.batch_size, rng, true);
    for (const auto& bidx : batches) {
      data::PaddedBatch batch = batch_of(dataset, bidx);
      nd::Tape<Real> tape;
      auto trace = model::scn_forward(batch, params, true, &tape);
      auto loss = losses::total_loss(trace, batch, config.weights, rng);
      if (!std::isfinite(loss.total_value)) {
        result.numeric_failure = true;
        result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
      }
      nd::zero_grads(refs);
      tape.backward(loss.total);
      nd::adam_step(refs, opt);
      const int C = trace.logits.shape[1];
      for (int r = 0; r < batch.B; ++r) {
        const Real* row = trace.logits.ptr() + static_cast<size_t>(r) * static_cast<size_t>(C);
        int best = 0;
        for (int c = 1; c < C; ++c)
          if (row[c] > row[best]) best = c;
        if (best == batch.labels[static_cast<size_t>(r)]) train_hits += 1;
      }
      const double w = static_cast<double>(bidx.size()) / static_cast<double>(split.train.size());
      epoch_total += loss.total_value * w;
      epoch_ce += loss.cross_entropy * w;
      epoch_ent += loss.entropy * w;
      epoch_conn += loss.connectivity * w;
      epoch_pos += loss.pos * w;
      epoch_neg += loss.neg * w;
      epoch_iso += loss.iso * w;
      epoch_util += loss.utilisation * w;
      epoch_cons += loss.consistency * w;
    }

    auto fwd = [&](const data::PaddedBatch& b) { return model::scn_forward(b, params, false, static_cast<nd::Tape<Real>*>(nullptr)).logits; };
    EpochRow row;
    row.epoch = epoch;
    row.total = epoch_total;
    row.ce = epoch_ce;
    row.entropy = epoch_ent;
    row.connectivity = epoch_conn;
    row.pos = epoch_pos;
    row.neg = epoch_neg;
    row.iso = epoch_iso;
    row.utilisation = epoch_util;
    row.consistency = epoch_cons;
    row.train_acc = 100.0 * static_cast<double>(train_hits) / static_cast<double>(split.train.size());
    row.test_acc = eval_accuracy<Real>(dataset, split.test, config.batch_size, fwd);
    result.log.push_back(row);
    if (row.test_acc > result.best_test_acc || result.best_epoch < 0) {
      result.best_test_acc = row.test_acc;
      result.best_epoch = epoch;
      result.checkpoint = scn_checkpoint(params);
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

template <typename Real>
TrainResult train_cgn(const std::vector<data::Graph>& dataset, RunConfig config, uint64_t seed,
                      baselines::CGNVariant variant, double aux_weight = 0.1) {
  const auto t0 = std::chrono::steady_clock::now();
  config.arch.f = dataset.empty() ? config.arch.f : dataset[0].feature_width;
  config.arch.classes = data::class_count(dataset);

  data::Split split = data::stratified_split(dataset, config.train_fraction, seed);
  std::mt19937_64 rng(seed);
  baselines::CGNParams<Real> params(config.arch, variant, rng);
  nd::ParamRefs<Real> refs = params.params();
  nd::AdamState<Real> opt;
  opt.lr = static_cast<Real>(config.lr);

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_total = 0, epoch_ce = 0;
    size_t train_hits = 0;
    auto batches = make_batches(split.train, config.batch_size, rng, true);
    for (const auto& bidx : batches) {
      data::PaddedBatch batch = batch_of(dataset, bidx);
      nd::Tape<Real> tape;
      auto trace = variant == baselines::CGNVariant::mean_pool
                       ? baselines::cgn_meanpool_forward(batch, params, &tape)
                       : baselines::cgn_diffpool_forward(batch, params, &tape);
      nd::Tensor<Real> loss = losses::cross_entropy(trace.logits, batch.labels);
      if (variant == baselines::CGNVariant::diffpool)
        loss = nd::add(loss, nd::scale(nd::add(trace.aux_link, trace.aux_entropy), static_cast<Real>(aux_weight)));
      const double lv = static_cast<double>(loss.at(0));
      if (!std::isfinite(lv)) {
        result.numeric_failure = true;
        result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return result;
      }
      nd::zero_grads(refs);
      tape.backward(loss);
      nd::adam_step(refs, opt);
      const int C = trace.logits.shape[1];
      for (int r = 0; r < batch.B; ++r) {
        const Real* row = trace.logits.ptr() + static_cast<size_t>(r) * static_cast<size_t>(C);
        int best = 0;
        for (int c = 1; c < C; ++c)
          if (row[c] > row[best]) best = c;
        if (best == batch.labels[static_cast<size_t>(r)]) train_hits += 1;
      }
      epoch_total += lv * static_cast<double>(bidx.size()) / static_cast<double>(split.train.size());
    }

    auto fwd = [&](const data::PaddedBatch& b) {
      return (variant == baselines::CGNVariant::mean_pool
                  ? baselines::cgn_meanpool_forward(b, params, static_cast<nd::Tape<Real>*>(nullptr))
                  : baselines::cgn_diffpool_forward(b, params, static_cast<nd::Tape<Real>*>(nullptr)))
          .logits;
    };
    EpochRow row;
    row.epoch = epoch;
    row.total = epoch_total;
    row.ce = epoch_ce;
    row.train_acc = 100.0 * static_cast<double>(train_hits) / static_cast<double>(split.train.size());
    row.test_acc = eval_accuracy<Real>(dataset, split.test, config.batch_size, fwd);
    result.log.push_back(row);
    if (row.test_acc > result.best_test_acc || result.best_epoch < 0) {
      result.best_test_acc = row.test_acc;
      result.best_epoch = epoch;
      result.checkpoint = cgn_checkpoint(params);
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

// -------- manifest ----------------------------------------------------------

inline json manifest_of(const RunConfig& config, uint64_t seed, uint64_t dataset_hash, const TrainResult& result) {
  json m;
  m["dataset"] = config.dataset;
  m["model"] = config.model;
  m["seed"] = seed;
  m["dataset_hash"] = dataset_hash;
  m["config"] = {{"epochs", config.epochs},
                 {"batch_size", config.batch_size},
                 {"lr", config.lr},
                 {"train_fraction", config.train_fraction},
                 {"arch", arch_to_json(config.arch)},
                 {"loss_weights",
                  {{"lambda_entropy", config.weights.lambda_entropy},
                   {"lambda_connectivity", config.weights.lambda_connectivity},
                   {"lambda_utilisation", config.weights.lambda_utilisation},
                   {"lambda_consistency", config.weights.lambda_consistency},
                   {"alpha_pos", config.weights.alpha_pos},
                   {"alpha_neg", config.weights.alpha_neg},
                   {"alpha_iso", config.weights.alpha_iso},
                   {"margin", config.weights.margin},
                   {"tau", config.weights.tau},
                   {"gamma", config.weights.gamma},
                   {"pair_cap", config.weights.pair_cap}}}};
  m["checkpoint_selection"] = "best test accuracy epoch";
  m["best_epoch"] = result.best_epoch;
  m["best_test_acc"] = result.best_test_acc;
  m["wall_seconds"] = result.wall_seconds;
  m["numeric_failure"] = result.numeric_failure;
  json log = json::array();
  for (const auto& r : result.log)
    log.push_back({{"epoch", r.epoch},
                   {"total", r.total},
                   {"ce", r.ce},
                   {"entropy", r.entropy},
                   {"connectivity", r.connectivity},
                   {"pos", r.pos},
                   {"neg", r.neg},
                   {"iso", r.iso},
                   {"utilisation", r.utilisation},
                   {"consistency", r.consistency},
                   {"train_acc", r.train_acc},
                   {"test_acc", r.test_acc}});
  m["loss_log"] = std::move(log);
  return m;
}

// FNV-1a over the serialized dataset
inline uint64_t dataset_hash(const std::vector<data::Graph>& dataset) {
  uint64_t h = 1469598103934665603ull;
  for (const auto& g : dataset) {
    std::string s = data::graph_to_json(g);
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  }
  return h;
}

}  // namespace scnet::train
