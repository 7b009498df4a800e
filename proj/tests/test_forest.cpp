#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <vector>

#include "fairtree/error.hpp"
#include "fairtree/forest.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/rng.hpp"
#include "fairtree/synthetic.hpp"
#include "test_support.hpp"

using namespace fairtree;
using testsupport::make_dataset;
using testsupport::make_group;

namespace {

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Dataset small_random_dataset(std::uint64_t seed, std::size_t n = 80) {
  Rng rng(seed);
  std::vector<std::vector<int>> columns(4, std::vector<int>(n));
  for (auto& col : columns)
    for (auto& v : col) v = static_cast<int>(rng.uniform_index(4));
  std::vector<std::uint8_t> labels(n);
  for (std::size_t i = 0; i < n; ++i)
    labels[i] = (columns[0][i] >= 2) == (rng.uniform() < 0.8) ? 1 : 0;
  std::vector<std::uint8_t> mask(n);
  for (auto& b : mask) b = rng.uniform() < 0.5 ? 1 : 0;
  return make_dataset(std::move(columns), std::move(labels), {make_group("s", "1", mask)});
}

ForestConfig small_config(int n_trees = 10, std::uint64_t seed = 5) {
  ForestConfig config;
  config.n_trees = n_trees;
  config.seed = seed;
  config.n_threads = 1;
  config.tree.criterion = SplitCriterion::parse("scaff:0.2");
  return config;
}

}  // namespace

TEST_CASE("same seed trains identical forests") {
  auto ds = small_random_dataset(1);
  auto config = small_config();
  auto a = fit(ds, config);
  auto b = fit(ds, config);
  CHECK(a.to_json_string() == b.to_json_string());

  config.seed = 6;
  auto c = fit(ds, config);
  CHECK(a.to_json_string() != c.to_json_string());
}

TEST_CASE("serial and parallel training produce identical models") {
  auto ds = small_random_dataset(2);
  auto config = small_config(16);
  config.n_threads = 1;
  auto serial = fit(ds, config);
  config.n_threads = 4;
  auto parallel = fit(ds, config);
  CHECK(serial.to_json_string() == parallel.to_json_string());
}

TEST_CASE("one-tree forest predicts exactly like its tree") {
  auto ds = small_random_dataset(3);
  auto config = small_config(1);
  auto model = fit(ds, config);
  REQUIRE(model.trees.size() == 1);
  auto rows = all_rows(ds);
  auto forest_scores = predict(model, ds, rows);
  auto tree_scores = predict_scores(*model.trees[0], ds, rows);
  CHECK(forest_scores == tree_scores);
}

TEST_CASE("forest prediction is the mean of per-tree scores") {
  auto ds = small_random_dataset(4);
  auto model = fit(ds, small_config(10));
  auto rows = all_rows(ds);
  auto forest_scores = predict(model, ds, rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double sum = 0, lo = 1, hi = 0;
    for (const auto& tree : model.trees) {
      std::vector<std::size_t> one = {rows[i]};
      const double s = predict_scores(*tree, ds, one)[0];
      sum += s;
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    const double mean = sum / static_cast<double>(model.trees.size());
    CHECK(forest_scores[i] == doctest::Approx(mean).epsilon(1e-12));
    CHECK(forest_scores[i] >= lo - 1e-12);
    CHECK(forest_scores[i] <= hi + 1e-12);
  }
}

TEST_CASE("single-class training data is rejected") {
  Dataset ds = make_dataset({{0, 1, 0, 1}}, {1, 1, 1, 1}, {make_group("s", "1", {1, 0, 1, 0})});
  CHECK_THROWS_AS(fit(ds, small_config(2)), DataError);
}

TEST_CASE("training restricted to an index subset uses only those rows") {
  auto ds = small_random_dataset(5, 60);
  std::vector<std::size_t> train;
  for (std::size_t i = 0; i < 30; ++i) train.push_back(i);
  auto config = small_config(5);
  auto model = fit(ds, config, train);
  CHECK(model.trees.size() == 5);
  for (const auto& tree : model.trees) CHECK(tree->n_samples == 30);
}

TEST_CASE("theta zero forest is serialization-identical to the auc forest") {
  auto ds = small_random_dataset(6);
  auto config = small_config(8, 321);
  config.tree.criterion = SplitCriterion::parse("scaff:0");
  auto scaff_model = fit(ds, config);
  config.tree.criterion = SplitCriterion::parse("auc");
  auto auc_model = fit(ds, config);
  // Criterion labels differ; the trees themselves must not.
  REQUIRE(scaff_model.trees.size() == auc_model.trees.size());
  for (std::size_t t = 0; t < scaff_model.trees.size(); ++t)
    CHECK(tree_to_json_string(*scaff_model.trees[t]) ==
          tree_to_json_string(*auc_model.trees[t]));
}

TEST_CASE("model json round trip is lossless for prediction") {
  auto ds = small_random_dataset(7);
  auto model = fit(ds, small_config(6));
  auto restored = ForestModel::from_json_string(model.to_json_string());
  CHECK(restored.to_json_string() == model.to_json_string());
  CHECK(restored.config.n_trees == model.config.n_trees);
  CHECK(restored.feature_names == model.feature_names);
  CHECK(restored.n_bins == model.n_bins);
  auto rows = all_rows(ds);
  CHECK(predict(restored, ds, rows) == predict(model, ds, rows));
}

TEST_CASE("model save and load through a file") {
  auto ds = small_random_dataset(8);
  auto model = fit(ds, small_config(4));
  const std::string path = "test_forest_model.json";
  model.save(path);
  auto loaded = ForestModel::load(path);
  CHECK(loaded.to_json_string() == model.to_json_string());
  std::remove(path.c_str());
  CHECK_THROWS_AS(ForestModel::load("does_not_exist.json"), DataError);
}

TEST_CASE("model json with a wrong format tag is rejected") {
  CHECK_THROWS_AS(ForestModel::from_json_string(R"({"format":"other","trees":[]})"), DataError);
}

TEST_CASE("an unconstrained forest separates an easy synthetic problem") {
  SyntheticConfig synth;
  synth.n = 500;
  synth.signal_strength = 1.0;
  synth.bias_strength = 0.0;
  synth.seed = 11;
  Dataset ds = generate_synthetic(synth, 8);

  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < ds.n(); ++i) (i % 5 == 0 ? test : train).push_back(i);

  ForestConfig config;
  config.n_trees = 50;
  config.seed = 13;
  config.n_threads = 0;
  config.tree.criterion = SplitCriterion::parse("scaff:0");
  auto model = fit(ds, config, train);
  auto scores = predict(model, ds, test);
  std::vector<std::uint8_t> test_labels;
  for (auto i : test) test_labels.push_back(ds.labels[i]);
  CHECK(auc(scores, test_labels) > 0.95);
}
