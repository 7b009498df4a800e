#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairtree/dataset.hpp"

namespace fairtree {

// Synthetic biased-data generator. Features comprise label-informative
// columns (group-shifted when bias > 0), sensitive-proxy columns, and
// pure noise. bias_strength controls how strongly an unconstrained
// scorer separates the groups; signal_strength controls class
// separability.
struct SyntheticConfig {
  std::size_t n = 2000;
  double bias_strength = 0.8;
  double signal_strength = 0.8;
  int n_groups = 2;
  std::uint64_t seed = 0;
  int n_signal_features = 1;
  int n_proxy_features = 5;
  int n_noise_features = 4;
};

// Raw (pre-discretization) draw, usable both as an in-memory Dataset
// and as a CSV on disk.
struct SyntheticData {
  std::vector<std::string> feature_names;
  std::vector<std::vector<double>> columns;  // column-major
  std::vector<std::uint8_t> labels;
  std::vector<int> group_ids;
  int n_groups = 0;
};

SyntheticData generate_synthetic_raw(const SyntheticConfig& config);
Dataset synthetic_to_dataset(const SyntheticData& data, int bins = 32);
Dataset generate_synthetic(const SyntheticConfig& config, int bins = 32);

// Writes feature columns plus "group" (g0..gK) and "y" (0/1) columns.
void write_synthetic_csv(const SyntheticData& data, const std::string& path);

// The DataConfig that loads a CSV produced by write_synthetic_csv.
DataConfig synthetic_data_config(int bins = 32);

}  // namespace fairtree
