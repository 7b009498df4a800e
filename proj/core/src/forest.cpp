#include "fairtree/forest.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <functional>
#include <numeric>
#include <thread>

#include <json.hpp>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

using nlohmann::json;

void run_indexed_jobs(int n_jobs, int n_threads, const std::function<void(int)>& job) {
  if (n_threads <= 0) {
    n_threads = static_cast<int>(std::thread::hardware_concurrency());
    if (n_threads <= 0) n_threads = 1;
  }
  n_threads = std::min(n_threads, n_jobs);
  if (n_threads <= 1) {
    for (int i = 0; i < n_jobs; ++i) job(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) {
    workers.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n_jobs; i = next.fetch_add(1)) job(i);
    });
  }
  for (auto& w : workers) w.join();
}

}  // namespace

ForestModel fit(const Dataset& dataset, const ForestConfig& config) {
  std::vector<std::size_t> all(dataset.n());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit(dataset, config, all);
}

ForestModel fit(const Dataset& dataset, const ForestConfig& config,
                std::span<const std::size_t> train_indices) {
  if (config.n_trees < 1) throw ConfigError("forest: n_trees must be >= 1");
  if (train_indices.empty()) throw DataError("forest: empty training set");
  bool has_pos = false, has_neg = false;
  for (std::size_t i : train_indices) (dataset.labels[i] ? has_pos : has_neg) = true;
  if (!has_pos || !has_neg) throw DataError("forest: training labels are single-class");

  ForestModel model;
  model.config = config;
  model.feature_names = dataset.feature_names;
  model.n_bins = dataset.n_bins;
  model.trees.resize(static_cast<std::size_t>(config.n_trees));

  const std::size_t n_train = train_indices.size();
  run_indexed_jobs(config.n_trees, config.n_threads, [&](int t) {
    // Independent per-tree streams keyed by (seed, tree index) make the
    // result identical under serial and parallel execution.
    const std::uint64_t tree_seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));
    const std::vector<std::size_t> draw = bootstrap_sample(n_train, mix_seed(tree_seed, 0));
    std::vector<std::size_t> samples;
    samples.reserve(n_train);
    for (std::size_t pos : draw) samples.push_back(train_indices[pos]);
    TreeConfig tree_config = config.tree;
    tree_config.seed = mix_seed(tree_seed, 1);
    model.trees[static_cast<std::size_t>(t)] = grow(dataset, std::move(samples), tree_config);
  });
  return model;
}

std::vector<double> predict(const ForestModel& model, const Dataset& dataset,
                            std::span<const std::size_t> rows) {
  std::vector<double> scores(rows.size(), 0.0);
  for (const auto& tree : model.trees) {
    const std::vector<double> tree_scores = predict_scores(*tree, dataset, rows);
    for (std::size_t i = 0; i < rows.size(); ++i) scores[i] += tree_scores[i];
  }
  const double inv = 1.0 / static_cast<double>(model.trees.size());
  for (double& s : scores) s *= inv;
  return scores;
}

double predict_row(const ForestModel& model, std::span<const int> row) {
  double sum = 0.0;
  for (const auto& tree : model.trees) sum += predict_row(*tree, row);
  return sum / static_cast<double>(model.trees.size());
}

std::string ForestModel::to_json_string() const {
  json j;
  j["format"] = "fairtree-forest";
  j["version"] = 1;
  j["criterion"] = config.tree.criterion.to_string();
  j["n_trees"] = config.n_trees;
  j["max_depth"] = config.tree.max_depth;
  j["min_samples_leaf"] = config.tree.min_samples_leaf;
  j["features_per_split"] = config.tree.features_per_split;
  j["seed"] = config.seed;
  j["feature_names"] = feature_names;
  j["n_bins"] = n_bins;
  if (encoder)
    j["encoder"] = json::parse(encoder->to_json_string());
  else
    j["encoder"] = nullptr;
  json trees_json = json::array();
  for (const auto& tree : trees) trees_json.push_back(json::parse(tree_to_json_string(*tree)));
  j["trees"] = std::move(trees_json);
  return j.dump();
}

ForestModel ForestModel::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("invalid model JSON: ") + e.what());
  }
  if (j.value("format", "") != "fairtree-forest")
    throw DataError("model JSON: unrecognized format tag");
  ForestModel model;
  model.config.n_trees = j.at("n_trees").get<int>();
  model.config.tree.criterion = SplitCriterion::parse(j.at("criterion").get<std::string>());
  model.config.tree.max_depth = j.at("max_depth").get<int>();
  model.config.tree.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  model.config.tree.features_per_split = j.at("features_per_split").get<int>();
  model.config.seed = j.at("seed").get<std::uint64_t>();
  model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  model.n_bins = j.at("n_bins").get<std::vector<int>>();
  if (!j.at("encoder").is_null())
    model.encoder = Encoder::from_json_string(j.at("encoder").dump());
  for (const auto& tree_json : j.at("trees"))
    model.trees.push_back(tree_from_json_string(tree_json.dump()));
  if (model.trees.empty()) throw DataError("model JSON: no trees");
  return model;
}

void ForestModel::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << to_json_string() << "\n";
}

ForestModel ForestModel::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

}  // namespace fairtree
