// Command-line driver: dataset generation, training, evaluation,
// explanation export, and aggregated report tables.
//
// Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scnet/eval.hpp"
#include "scnet/fastmath.hpp"
#include "scnet/generators.hpp"
#include "scnet/train.hpp"
#include "scnet/tudataset.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace scnet;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct CliError : std::runtime_error {
  int code;
  CliError(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> seeds;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      seeds.push_back(std::stoull(tok));
    } catch (const std::exception&) {
      throw CliError(kExitUsage, "bad seed list entry: " + tok);
    }
  }
  if (seeds.empty()) throw CliError(kExitUsage, "empty seed list");
  return seeds;
}

train::RunConfig load_config(const std::string& dataset, const std::string& config_path) {
  train::RunConfig cfg;
  try {
    cfg = train::defaults_for(dataset);
  } catch (const std::exception& e) {
    throw CliError(kExitUsage, e.what());
  }
  if (config_path.empty()) return cfg;
  std::ifstream in(config_path);
  if (!in) throw CliError(kExitUsage, "cannot read config file " + config_path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw CliError(kExitUsage, std::string("config parse error: ") + e.what());
  }
  if (j.contains("epochs")) cfg.epochs = j["epochs"];
  if (j.contains("batch_size")) cfg.batch_size = j["batch_size"];
  if (j.contains("lr")) cfg.lr = j["lr"];
  if (j.contains("train_fraction")) cfg.train_fraction = j["train_fraction"];
  if (j.contains("arch")) {
    const json& a = j["arch"];
    if (a.contains("layers")) cfg.arch.layers = a["layers"];
    if (a.contains("hidden")) cfg.arch.hidden = a["hidden"];
    if (a.contains("s")) cfg.arch.s = a["s"];
    if (a.contains("K")) cfg.arch.K = a["K"];
    if (a.contains("s_sub")) cfg.arch.s_sub = a["s_sub"];
  }
  if (j.contains("loss_weights")) {
    const json& w = j["loss_weights"];
    auto set = [&](const char* key, double& field) { if (w.contains(key)) field = w[key]; };
    set("lambda_entropy", cfg.weights.lambda_entropy);
    set("lambda_connectivity", cfg.weights.lambda_connectivity);
    set("lambda_utilisation", cfg.weights.lambda_utilisation);
    set("lambda_consistency", cfg.weights.lambda_consistency);
    set("alpha_pos", cfg.weights.alpha_pos);
    set("alpha_neg", cfg.weights.alpha_neg);
    set("alpha_iso", cfg.weights.alpha_iso);
    set("margin", cfg.weights.margin);
    set("tau", cfg.weights.tau);
    set("gamma", cfg.weights.gamma);
    if (w.contains("pair_cap")) cfg.weights.pair_cap = w["pair_cap"];
  }
  return cfg;
}

std::vector<data::Graph> load_graphs(const std::string& path) {
  try {
    return data::load_dataset(path);
  } catch (const std::exception& e) {
    throw CliError(kExitData, std::string("dataset load failed: ") + e.what());
  }
}

std::string dataset_path(const std::string& out, const std::string& dataset, const std::string& explicit_path) {
  if (!explicit_path.empty()) return explicit_path;
  return out + "/" + dataset + ".jsonl";
}

std::string ckpt_path(const std::string& out, const std::string& dataset, const std::string& model, uint64_t seed) {
  return out + "/" + dataset + "_" + model + "_seed" + std::to_string(seed) + ".ckpt.json";
}

std::string cell(double mean, double low, double high) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f (%.2f, %.2f)", mean, low, high);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_generate(const std::string& dataset, uint64_t seed, const std::string& out) {
  data::DatasetSpec spec;
  try {
    spec = data::default_spec(dataset, seed);
  } catch (const std::exception& e) {
    throw CliError(kExitUsage, e.what());
  }
  auto graphs = data::build_dataset(spec);
  fs::create_directories(out);
  const std::string path = dataset_path(out, dataset, "");
  data::save_dataset(graphs, path);

  json stats;
  stats["dataset"] = dataset;
  stats["seed"] = seed;
  stats["count"] = graphs.size();
  stats["mean_size"] = data::mean_graph_size(graphs);
  stats["feature_width"] = graphs[0].feature_width;
  stats["classes"] = data::class_count(graphs);
  std::ofstream(path + ".stats.json") << stats.dump(2) << "\n";
  std::cout << "wrote " << path << ": " << stats.dump() << "\n";
  return 0;
}

int cmd_train(train::RunConfig cfg, const std::string& data_path) {
  auto graphs = load_graphs(data_path);
  if (graphs.empty()) throw CliError(kExitData, "empty dataset " + data_path);
  cfg.arch.f = graphs[0].feature_width;
  cfg.arch.classes = data::class_count(graphs);
  const uint64_t dhash = train::dataset_hash(graphs);
  fs::create_directories(cfg.out_dir);

  for (uint64_t seed : cfg.seeds) {
    std::cout << "training " << cfg.model << " on " << cfg.dataset << ", seed " << seed << "\n";
    train::TrainResult result;
    if (cfg.model == "scn")
      result = train::train_scn<float>(graphs, cfg, seed);
    else if (cfg.model == "cgn_mean")
      result = train::train_cgn<float>(graphs, cfg, seed, baselines::CGNVariant::mean_pool);
    else if (cfg.model == "cgn_diffpool")
      result = train::train_cgn<float>(graphs, cfg, seed, baselines::CGNVariant::diffpool);
    else
      throw CliError(kExitUsage, "unknown model " + cfg.model);
    if (result.numeric_failure) throw CliError(kExitNumeric, "NaN loss during training, seed " + std::to_string(seed));

    const std::string cp = ckpt_path(cfg.out_dir, cfg.dataset, cfg.model, seed);
    std::ofstream(cp) << result.checkpoint.dump() << "\n";
    json manifest = train::manifest_of(cfg, seed, dhash, result);
    const std::string mpath = cfg.out_dir + "/" + cfg.dataset + "_" + cfg.model + "_seed" + std::to_string(seed) + ".manifest.json";
    // write to a temp file first so a finished manifest is always complete
    std::ofstream(mpath + ".tmp") << manifest.dump(2) << "\n";
    fs::rename(mpath + ".tmp", mpath);

    std::ofstream csv(cfg.out_dir + "/" + cfg.dataset + "_" + cfg.model + "_seed" + std::to_string(seed) + ".loss.csv");
    csv << "epoch,total,ce,entropy,connectivity,pos,neg,iso,utilisation,consistency,train_acc,test_acc\n";
    for (const auto& r : result.log)
      csv << r.epoch << "," << r.total << "," << r.ce << "," << r.entropy << "," << r.connectivity << ","
          << r.pos << "," << r.neg << "," << r.iso << "," << r.utilisation << "," << r.consistency << ","
          << r.train_acc << "," << r.test_acc << "\n";
    std::cout << "  best test acc " << result.best_test_acc << " at epoch " << result.best_epoch
              << " (" << result.wall_seconds << "s)\n";
  }
  return 0;
}

struct SeedMetrics {
  std::map<std::string, double> values;  // metric name -> value
};

SeedMetrics evaluate_seed(const std::vector<data::Graph>& graphs, const train::RunConfig& cfg, uint64_t seed,
                          const json& checkpoint) {
  SeedMetrics m;
  const int n_classes = data::class_count(graphs);
  data::Split split = data::stratified_split(graphs, cfg.train_fraction, seed);

  if (checkpoint.at("variant") == "scn") {
    auto params = train::scn_from_checkpoint<float>(checkpoint);
    auto tr = eval::run_scn(graphs, split.train, params, cfg.batch_size);
    auto te = eval::run_scn(graphs, split.test, params, cfg.batch_size);
    m.values["accuracy_train"] = metrics::accuracy(tr.logits, tr.labels);
    m.values["accuracy_test"] = metrics::accuracy(te.logits, te.labels);
    m.values["graph_completeness"] = metrics::concept_completeness(eval::graph_table(tr, n_classes), eval::graph_table(te, n_classes));
    m.values["subgraph_completeness_individual"] = eval::subgraph_completeness(tr, te, n_classes, eval::SubgraphMode::individual);
    m.values["subgraph_completeness_concat"] = eval::subgraph_completeness(tr, te, n_classes, eval::SubgraphMode::concat);
    m.values["subgraph_completeness_concat_importance"] = eval::subgraph_completeness(tr, te, n_classes, eval::SubgraphMode::concat_with_importance);
    m.values["node_completeness_graph_space"] = metrics::concept_completeness(eval::node_table(tr, n_classes, false), eval::node_table(te, n_classes, false));
    m.values["node_completeness_subgraph_space"] = metrics::concept_completeness(eval::node_table(tr, n_classes, true), eval::node_table(te, n_classes, true));
    auto str = eval::cluster_scores(tr);
    auto ste = eval::cluster_scores(te);
    m.values["assignment_strength_train"] = str.assignment_strength;
    m.values["assignment_strength_test"] = ste.assignment_strength;
    m.values["cluster_utilization_train"] = str.cluster_utilization;
    m.values["cluster_utilization_test"] = ste.cluster_utilization;
    m.values["consistency_train"] = str.consistency_score;
    m.values["consistency_test"] = ste.consistency_score;
    m.values["motif_separation"] = eval::motif_separation(te.traces);
  } else {
    auto params = train::cgn_from_checkpoint<float>(checkpoint);
    auto fwd = [&](const data::PaddedBatch& b) {
      return (params.variant == baselines::CGNVariant::mean_pool
                  ? baselines::cgn_meanpool_forward(b, params, static_cast<nd::Tape<float>*>(nullptr))
                  : baselines::cgn_diffpool_forward(b, params, static_cast<nd::Tape<float>*>(nullptr)))
          .logits;
    };
    m.values["accuracy_train"] = train::eval_accuracy<float>(graphs, split.train, cfg.batch_size, fwd);
    m.values["accuracy_test"] = train::eval_accuracy<float>(graphs, split.test, cfg.batch_size, fwd);
  }
  return m;
}

int cmd_evaluate(const train::RunConfig& cfg, const std::string& data_path) {
  auto graphs = load_graphs(data_path);
  std::vector<SeedMetrics> per_seed;
  for (uint64_t seed : cfg.seeds) {
    const std::string cp = ckpt_path(cfg.out_dir, cfg.dataset, cfg.model, seed);
    std::ifstream in(cp);
    if (!in) throw CliError(kExitUsage, "missing checkpoint " + cp);
    json checkpoint;
    in >> checkpoint;
    try {
      per_seed.push_back(evaluate_seed(graphs, cfg, seed, checkpoint));
    } catch (const std::invalid_argument& e) {
      throw CliError(kExitUsage, std::string("incompatible checkpoint ") + cp + ": " + e.what());
    }
  }

  // aggregate over seeds (single seed renders a zero-width interval)
  std::ofstream csv(cfg.out_dir + "/" + cfg.dataset + "_" + cfg.model + "_metrics.csv");
  std::ofstream md(cfg.out_dir + "/" + cfg.dataset + "_" + cfg.model + "_metrics.md");
  csv << "metric,mean,low,high\n";
  md << "| metric | " << cfg.dataset << " / " << cfg.model << " |\n|---|---|\n";
  for (const auto& [name, first_value] : per_seed[0].values) {
    std::vector<double> vals;
    for (const auto& sm : per_seed) vals.push_back(sm.values.at(name));
    double lo = 0.0, hi = name.find("accuracy") != std::string::npos || name.find("completeness") != std::string::npos ? 100.0 : 1.0;
    if (name == "motif_separation") { lo = -1.0; hi = 1.0; }
    metrics::Interval ci = vals.size() >= 2 ? metrics::ci95(vals, lo, hi)
                                            : metrics::Interval{vals[0], vals[0], vals[0]};
    char line[160];
    std::snprintf(line, sizeof line, "%s,%.4f,%.4f,%.4f\n", name.c_str(), ci.mean, ci.low, ci.high);
    csv << line;
    md << "| " << name << " | " << cell(ci.mean, ci.low, ci.high) << " |\n";
  }
  std::cout << "wrote " << cfg.out_dir << "/" << cfg.dataset << "_" << cfg.model << "_metrics.{csv,md}\n";
  return 0;
}

int cmd_explain(const train::RunConfig& cfg, const std::string& data_path, const std::string& checkpoint_path,
                int hops, int reps) {
  auto graphs = load_graphs(data_path);
  std::ifstream in(checkpoint_path);
  if (!in) throw CliError(kExitUsage, "missing checkpoint " + checkpoint_path);
  json checkpoint;
  in >> checkpoint;
  if (checkpoint.at("variant") != "scn") throw CliError(kExitUsage, "explain requires an scn checkpoint");
  auto params = train::scn_from_checkpoint<float>(checkpoint);

  const uint64_t seed = cfg.seeds[0];
  data::Split split = data::stratified_split(graphs, cfg.train_fraction, seed);
  auto te = eval::run_scn(graphs, split.test, params, cfg.batch_size);

  const std::string dir = cfg.out_dir + "/explanations";
  explain::extract_node_concepts(te.traces, hops, reps, dir, cfg.dataset, cfg.model);
  for (int k = 0; k < params.config.K; ++k)
    explain::subgraph_concept_viz(te.traces, k, reps, dir, cfg.dataset, cfg.model);
  std::vector<explain::InstanceExplanation> explanations;
  for (const auto& t : te.traces) {
    auto exp = explain::explain_instance(t);
    if (explanations.size() < static_cast<size_t>(reps)) explain::write_instance_dots(t, exp, dir, cfg.dataset, cfg.model);
    explanations.push_back(std::move(exp));
  }
  explain::write_explanations_json(explanations, dir);
  std::cout << "wrote " << dir << " (motif separation on test: " << eval::motif_separation(te.traces) << ")\n";
  return 0;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out) {
  // gather metric CSVs: {dataset}_{model}_metrics.csv
  std::map<std::string, std::map<std::string, std::map<std::string, std::string>>> cells;  // metric -> dataset -> model -> cell
  std::set<std::string> datasets, models;
  bool any = false;
  for (const auto& dir : run_dirs) {
    if (!fs::is_directory(dir)) throw CliError(kExitData, "not a directory: " + dir);
    for (const auto& entry : fs::directory_iterator(dir)) {
      const std::string name = entry.path().filename().string();
      const std::string suffix = "_metrics.csv";
      if (name.size() <= suffix.size() || name.substr(name.size() - suffix.size()) != suffix) continue;
      const std::string stem = name.substr(0, name.size() - suffix.size());
      const size_t us = stem.rfind('_');
      if (us == std::string::npos) continue;
      std::string dataset = stem.substr(0, us), model = stem.substr(us + 1);
      // model names with an underscore (cgn_mean, cgn_diffpool)
      if (model == "mean" || model == "diffpool") {
        const size_t us2 = stem.rfind('_', us - 1);
        if (us2 != std::string::npos) {
          dataset = stem.substr(0, us2);
          model = stem.substr(us2 + 1);
        }
      }
      std::ifstream in(entry.path());
      std::string line;
      std::getline(in, line);  // header
      while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string metric, mean, low, high;
        std::getline(ss, metric, ',');
        std::getline(ss, mean, ',');
        std::getline(ss, low, ',');
        std::getline(ss, high, ',');
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.2f (%.2f, %.2f)", std::stod(mean), std::stod(low), std::stod(high));
        cells[metric][dataset][model] = buf;
        datasets.insert(dataset);
        models.insert(model);
        any = true;
      }
    }
  }
  if (!any) throw CliError(kExitData, "no metric CSVs found in the given run directories");

  fs::create_directories(fs::path(out).parent_path().empty() ? "." : fs::path(out).parent_path().string());
  std::ofstream md(out);
  auto table = [&](const std::string& title, const std::vector<std::string>& metric_names) {
    md << "## " << title << "\n\n";
    for (const auto& metric : metric_names) {
      if (!cells.count(metric)) {
        md << "_" << metric << ": no data_\n\n";
        continue;
      }
      md << "### " << metric << "\n\n| dataset |";
      for (const auto& m : models) md << " " << m << " |";
      md << "\n|---|";
      for (size_t i = 0; i < models.size(); ++i) md << "---|";
      md << "\n";
      for (const auto& d : datasets) {
        md << "| " << d << " |";
        for (const auto& m : models) {
          auto it = cells[metric].count(d) ? cells[metric][d].find(m) : cells[metric][d].end();
          md << " " << (cells[metric][d].count(m) ? cells[metric][d][m] : "—") << " |";
          (void)it;
        }
        md << "\n";
      }
      md << "\n";
    }
  };
  md << "# Results\n\n";
  md << "Note: a low importance score does not necessarily mean the subgraph was "
        "unimportant for the prediction; the score's meaning is not enforced.\n\n";
  table("Accuracy", {"accuracy_train", "accuracy_test"});
  table("Subgraph completeness", {"subgraph_completeness_individual", "subgraph_completeness_concat",
                                  "subgraph_completeness_concat_importance", "graph_completeness"});
  table("Node completeness", {"node_completeness_graph_space", "node_completeness_subgraph_space"});
  table("Cluster scores", {"assignment_strength_train", "assignment_strength_test", "cluster_utilization_train",
                           "cluster_utilization_test", "consistency_train", "consistency_test", "motif_separation"});
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  nd::flush_denormals_to_zero();
  CLI::App app{"subgraph concept network experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  std::string dataset = "grid", model = "scn", out = "runs", config_path, data_path, checkpoint_path;
  std::string seed_list = "42,76,58,92,19";
  uint64_t gen_seed = 42;
  int epochs_override = -1, hops = 2, reps = 5;
  std::vector<std::string> run_dirs;
  std::string report_out = "report.md";

  app.add_option("--dataset", dataset, "dataset name");
  app.add_option("--model", model, "scn | cgn_mean | cgn_diffpool");
  app.add_option("--out", out, "output directory");
  app.add_option("--config", config_path, "JSON config file");
  app.add_option("--seed-list", seed_list, "comma-separated seeds");

  auto* gen = app.add_subcommand("generate", "generate a synthetic dataset");
  gen->add_option("--seed", gen_seed, "generator seed");

  auto* tr = app.add_subcommand("train", "train a model");
  tr->add_option("--data", data_path, "dataset file (default {out}/{dataset}.jsonl)");
  tr->add_option("--epochs", epochs_override, "override epoch count");

  auto* ev = app.add_subcommand("evaluate", "evaluate trained checkpoints");
  ev->add_option("--data", data_path, "dataset file");

  auto* ex = app.add_subcommand("explain", "export explanations for a checkpoint");
  ex->add_option("--data", data_path, "dataset file");
  ex->add_option("--checkpoint", checkpoint_path, "checkpoint file (default first seed's)");
  ex->add_option("--hops", hops, "neighbourhood radius for node concepts");
  ex->add_option("--reps", reps, "representatives per concept");

  auto* rp = app.add_subcommand("report", "aggregate metric tables");
  rp->add_option("dirs", run_dirs, "run directories");
  rp->add_option("--report-out", report_out, "output markdown path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(dataset, gen_seed, out);
    train::RunConfig cfg = load_config(dataset, config_path);
    cfg.model = model;
    cfg.out_dir = out;
    cfg.seeds = parse_seed_list(seed_list);
    if (epochs_override > 0) cfg.epochs = epochs_override;
    const std::string dpath = dataset_path(out, dataset, data_path);
    if (tr->parsed()) return cmd_train(cfg, dpath);
    if (ev->parsed()) return cmd_evaluate(cfg, dpath);
    if (ex->parsed()) {
      std::string cp = checkpoint_path.empty() ? ckpt_path(out, dataset, model, cfg.seeds[0]) : checkpoint_path;
      return cmd_explain(cfg, dpath, cp, hops, reps);
    }
    if (rp->parsed()) return cmd_report(run_dirs.empty() ? std::vector<std::string>{out} : run_dirs, report_out);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
