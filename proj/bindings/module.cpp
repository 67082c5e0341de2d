// Python bindings for the main operations: dataset generation and IO,
// training, evaluation, prediction, and explanation export.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "scnet/eval.hpp"
#include "scnet/fastmath.hpp"
#include "scnet/generators.hpp"
#include "scnet/losses.hpp"
#include "scnet/tudataset.hpp"

namespace py = pybind11;
using namespace scnet;
using json = nlohmann::json;

namespace {

py::dict graph_to_py(const data::Graph& g) {
  py::dict d;
  d["n"] = g.n;
  d["adjacency"] = g.adjacency;
  d["features"] = g.features;
  d["feature_width"] = g.feature_width;
  d["label"] = g.label;
  d["motif_mask"] = g.motif_mask;
  return d;
}

data::Graph graph_from_py(const py::dict& d) {
  data::Graph g;
  g.n = d["n"].cast<int>();
  g.adjacency = d["adjacency"].cast<std::vector<double>>();
  g.features = d["features"].cast<std::vector<double>>();
  g.feature_width = d["feature_width"].cast<int>();
  g.label = d["label"].cast<int>();
  if (d.contains("motif_mask")) g.motif_mask = d["motif_mask"].cast<std::vector<int>>();
  return g;
}

std::vector<data::Graph> graphs_from_py(const std::vector<py::dict>& dicts) {
  std::vector<data::Graph> graphs;
  graphs.reserve(dicts.size());
  for (const auto& d : dicts) graphs.push_back(graph_from_py(d));
  return graphs;
}

py::list graphs_to_py(const std::vector<data::Graph>& graphs) {
  py::list out;
  for (const auto& g : graphs) out.append(graph_to_py(g));
  return out;
}

train::RunConfig config_for(const std::string& dataset, const std::string& model, int epochs, int batch_size,
                            double lr, double train_fraction) {
  train::RunConfig cfg = train::defaults_for(dataset);
  cfg.model = model;
  if (epochs > 0) cfg.epochs = epochs;
  if (batch_size > 0) cfg.batch_size = batch_size;
  if (lr > 0) cfg.lr = lr;
  cfg.train_fraction = train_fraction;
  return cfg;
}

py::dict train_py(const std::vector<py::dict>& dicts, const std::string& dataset, const std::string& model,
                  uint64_t seed, int epochs, int batch_size, double lr, double train_fraction) {
  auto graphs = graphs_from_py(dicts);
  train::RunConfig cfg = config_for(dataset, model, epochs, batch_size, lr, train_fraction);
  train::TrainResult result;
  if (model == "scn") result = train::train_scn<float>(graphs, cfg, seed);
  else if (model == "cgn_mean") result = train::train_cgn<float>(graphs, cfg, seed, baselines::CGNVariant::mean_pool);
  else if (model == "cgn_diffpool") result = train::train_cgn<float>(graphs, cfg, seed, baselines::CGNVariant::diffpool);
  else throw std::invalid_argument("unknown model " + model);

  py::dict out;
  out["checkpoint"] = result.checkpoint.dump();
  out["best_test_accuracy"] = result.best_test_acc;
  out["best_epoch"] = result.best_epoch;
  out["wall_seconds"] = result.wall_seconds;
  out["numeric_failure"] = result.numeric_failure;
  py::list log;
  for (const auto& row : result.log) {
    py::dict r;
    r["epoch"] = row.epoch;
    r["total"] = row.total;
    r["cross_entropy"] = row.ce;
    r["entropy"] = row.entropy;
    r["connectivity"] = row.connectivity;
    r["utilisation"] = row.utilisation;
    r["consistency"] = row.consistency;
    r["train_accuracy"] = row.train_acc;
    r["test_accuracy"] = row.test_acc;
    log.append(r);
  }
  out["log"] = log;
  return out;
}

py::list predict_py(const std::vector<py::dict>& dicts, const std::string& checkpoint, int batch_size) {
  auto graphs = graphs_from_py(dicts);
  json ckpt = json::parse(checkpoint);
  std::vector<int> idx(graphs.size());
  std::iota(idx.begin(), idx.end(), 0);
  py::list out;
  if (ckpt.at("variant") == "scn") {
    auto params = train::scn_from_checkpoint<float>(ckpt);
    auto ev = eval::run_scn(graphs, idx, params, batch_size);
    for (const auto& lg : ev.logits) out.append(lg);
  } else {
    auto params = train::cgn_from_checkpoint<float>(ckpt);
    std::mt19937_64 dummy(0);
    for (const auto& bidx : train::make_batches(idx, batch_size, dummy, false)) {
      data::PaddedBatch batch = train::batch_of(graphs, bidx);
      auto logits = (params.variant == baselines::CGNVariant::mean_pool
                         ? baselines::cgn_meanpool_forward(batch, params, static_cast<nd::Tape<float>*>(nullptr))
                         : baselines::cgn_diffpool_forward(batch, params, static_cast<nd::Tape<float>*>(nullptr)))
                        .logits;
      const int C = logits.shape[1];
      for (int b = 0; b < batch.B; ++b) {
        std::vector<double> row(static_cast<size_t>(C));
        for (int c = 0; c < C; ++c) row[static_cast<size_t>(c)] = logits.at(static_cast<size_t>(b * C + c));
        out.append(row);
      }
    }
  }
  return out;
}

py::dict evaluate_py(const std::vector<py::dict>& dicts, const std::string& checkpoint, uint64_t seed,
                     int batch_size, double train_fraction) {
  auto graphs = graphs_from_py(dicts);
  json ckpt = json::parse(checkpoint);
  if (ckpt.at("variant") != "scn") throw std::invalid_argument("evaluate expects an scn checkpoint");
  auto params = train::scn_from_checkpoint<float>(ckpt);
  data::Split split = data::stratified_split(graphs, train_fraction, seed);
  auto tr = eval::run_scn(graphs, split.train, params, batch_size);
  auto te = eval::run_scn(graphs, split.test, params, batch_size);
  const int n_classes = data::class_count(graphs);
  py::dict out;
  out["accuracy_train"] = metrics::accuracy(tr.logits, tr.labels);
  out["accuracy_test"] = metrics::accuracy(te.logits, te.labels);
  out["graph_completeness"] =
      metrics::concept_completeness(eval::graph_table(tr, n_classes), eval::graph_table(te, n_classes));
  out["subgraph_completeness_concat_importance"] =
      eval::subgraph_completeness(tr, te, n_classes, eval::SubgraphMode::concat_with_importance);
  out["node_completeness_graph_space"] =
      metrics::concept_completeness(eval::node_table(tr, n_classes, false), eval::node_table(te, n_classes, false));
  auto scores = eval::cluster_scores(te);
  out["assignment_strength_test"] = scores.assignment_strength;
  out["cluster_utilization_test"] = scores.cluster_utilization;
  out["consistency_test"] = scores.consistency_score;
  out["motif_separation"] = eval::motif_separation(te.traces);
  return out;
}

int explain_py(const std::vector<py::dict>& dicts, const std::string& checkpoint, const std::string& out_dir,
               const std::string& dataset, uint64_t seed, int hops, int reps, int batch_size,
               double train_fraction) {
  auto graphs = graphs_from_py(dicts);
  json ckpt = json::parse(checkpoint);
  if (ckpt.at("variant") != "scn") throw std::invalid_argument("explain expects an scn checkpoint");
  auto params = train::scn_from_checkpoint<float>(ckpt);
  data::Split split = data::stratified_split(graphs, train_fraction, seed);
  auto te = eval::run_scn(graphs, split.test, params, batch_size);
  explain::extract_node_concepts(te.traces, hops, reps, out_dir, dataset, "scn");
  for (int k = 0; k < params.config.K; ++k) explain::subgraph_concept_viz(te.traces, k, reps, out_dir, dataset, "scn");
  std::vector<explain::InstanceExplanation> explanations;
  for (const auto& t : te.traces) {
    auto e = explain::explain_instance(t);
    if (static_cast<int>(explanations.size()) < reps) explain::write_instance_dots(t, e, out_dir, dataset, "scn");
    explanations.push_back(std::move(e));
  }
  explain::write_explanations_json(explanations, out_dir);
  return static_cast<int>(explanations.size());
}

}  // namespace

PYBIND11_MODULE(_scnet, m) {
  m.doc() = "subgraph concept network: generation, training, evaluation and explanation";
  nd::flush_denormals_to_zero();

  m.def(
      "generate",
      [](const std::string& name, uint64_t seed, int count) {
        data::DatasetSpec spec = data::default_spec(name, seed);
        if (count > 0) spec.count = count;
        return graphs_to_py(data::build_dataset(spec));
      },
      py::arg("name"), py::arg("seed") = 42, py::arg("count") = 0,
      "Build a synthetic dataset (grid, grid_house, stars or house_colour)");

  m.def(
      "load_dataset", [](const std::string& path) { return graphs_to_py(data::load_dataset(path)); },
      py::arg("path"), "Load a JSON-lines dataset file");
  m.def(
      "save_dataset",
      [](const std::vector<py::dict>& dicts, const std::string& path) {
        data::save_dataset(graphs_from_py(dicts), path);
      },
      py::arg("graphs"), py::arg("path"), "Write a JSON-lines dataset file");
  m.def(
      "load_tudataset",
      [](const std::string& directory, const std::string& name) {
        return graphs_to_py(data::load_tudataset(directory, name));
      },
      py::arg("directory"), py::arg("name"), "Load a TU-format dataset from its standard text files");

  m.def("train", &train_py, py::arg("graphs"), py::arg("dataset"), py::arg("model") = "scn", py::arg("seed") = 42,
        py::arg("epochs") = 0, py::arg("batch_size") = 0, py::arg("lr") = 0.0, py::arg("train_fraction") = 0.8,
        "Train a model; returns the checkpoint (JSON string), per-epoch log and summary");
  m.def("predict", &predict_py, py::arg("graphs"), py::arg("checkpoint"), py::arg("batch_size") = 16,
        "Run a frozen checkpoint over graphs; returns per-graph logits");
  m.def("evaluate", &evaluate_py, py::arg("graphs"), py::arg("checkpoint"), py::arg("seed") = 42,
        py::arg("batch_size") = 16, py::arg("train_fraction") = 0.8,
        "Evaluate an SCN checkpoint: accuracy, completeness and cluster scores");
  m.def("explain", &explain_py, py::arg("graphs"), py::arg("checkpoint"), py::arg("out_dir"), py::arg("dataset"),
        py::arg("seed") = 42, py::arg("hops") = 2, py::arg("reps") = 5, py::arg("batch_size") = 16,
        py::arg("train_fraction") = 0.8,
        "Write concept and instance DOT files plus explanations.json; returns the instance count");
}
