#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fairtree/dataset.hpp"
#include "fairtree/tree.hpp"

namespace fairtree {

struct ForestConfig {
  int n_trees = 500;
  TreeConfig tree;
  std::uint64_t seed = 0;
  int n_threads = 0;  // 0 = hardware concurrency, 1 = serial
};

// Bagged ensemble. Each tree is grown on an independent bootstrap
// sample with an RNG stream derived from (seed, tree index), so serial
// and parallel training produce identical models.
struct ForestModel {
  std::vector<std::unique_ptr<TreeNode>> trees;
  ForestConfig config;
  std::vector<std::string> feature_names;
  std::vector<int> n_bins;
  std::optional<Encoder> encoder;  // present when the model came from a CSV load

  std::string to_json_string() const;
  static ForestModel from_json_string(const std::string& text);
  void save(const std::string& path) const;
  static ForestModel load(const std::string& path);
};

// Trains on the given sample subset (default: all rows). Throws
// DataError if the training labels are single-class.
ForestModel fit(const Dataset& dataset, const ForestConfig& config);
ForestModel fit(const Dataset& dataset, const ForestConfig& config,
                std::span<const std::size_t> train_indices);

// Mean of per-tree scores, summed in fixed tree-index order.
std::vector<double> predict(const ForestModel& model, const Dataset& dataset,
                            std::span<const std::size_t> rows);
double predict_row(const ForestModel& model, std::span<const int> row);

}  // namespace fairtree
