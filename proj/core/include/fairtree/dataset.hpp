#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fairtree {

// One-vs-rest binary membership mask for a single sensitive category.
struct GroupMask {
  std::string attribute;
  std::string category;
  std::vector<std::uint8_t> mask;  // length n, 1 = member
  std::size_t s_plus = 0;          // member count
  std::size_t s_minus = 0;         // n - s_plus
};

// All retained OvR groups derived from the sensitive columns.
// Degenerate groups (empty or full) are dropped at load time and noted
// in `warnings`. For an attribute with exactly two categories only one
// group is kept; the complement is redundant under the max-symmetry of
// sensitive AUC.
struct SensitiveView {
  std::vector<GroupMask> groups;
  std::vector<std::string> warnings;
};

struct DiscretizationSpec {
  int bins_per_feature = 32;
};

// Encoded tabular dataset: binned ordinals per feature (column-major),
// binary class labels, and the sensitive view. Immutable after load.
struct Dataset {
  std::vector<std::vector<int>> columns;  // m columns, each length n
  std::vector<std::uint8_t> labels;       // length n, values {0,1}
  SensitiveView sensitive;
  std::vector<std::string> feature_names;
  std::vector<int> n_bins;  // per-feature bin capacity; ordinals in [0, n_bins[j])

  std::size_t n() const { return labels.size(); }
  std::size_t m() const { return columns.size(); }
};

enum class SensitiveMode { PerAttribute, Intersectional };
enum class ColumnKind { Numeric, Categorical };

struct DataConfig {
  std::string label_column;
  std::string positive_label;
  std::vector<std::string> sensitive_columns;
  SensitiveMode sensitive_mode = SensitiveMode::PerAttribute;
  std::map<std::string, ColumnKind> column_kinds;  // columns not listed are inferred
  int bins = 32;
  bool include_sensitive_features = false;

  static DataConfig from_json_string(const std::string& text);
  static DataConfig from_json_file(const std::string& path);
};

// How a raw CSV column maps onto encoded feature ordinals. Stored in
// serialized models so prediction can consume raw rows.
struct FeatureSpec {
  enum class Kind { Numeric, OneHot };
  std::string name;    // encoded feature name, e.g. "age" or "job=clerk"
  std::string source;  // CSV column name
  Kind kind = Kind::Numeric;
  std::vector<double> boundaries;  // Numeric: sorted cut points
  std::string category;            // OneHot: matched category value
};

struct Encoder {
  std::vector<FeatureSpec> features;

  // Ordinal for one raw cell. Missing numeric cells route to the
  // dedicated extra bin past the last boundary bin.
  int encode_cell(std::size_t feature, const std::string& raw) const;
  int bins_of(std::size_t feature) const;

  std::string to_json_string() const;
  static Encoder from_json_string(const std::string& text);
};

struct LoadResult {
  Dataset dataset;
  Encoder encoder;
  std::size_t dropped_rows = 0;  // rows lost to missing label/sensitive cells
};

LoadResult load_csv(const std::string& path, const DataConfig& config);
LoadResult load_csv_text(const std::string& csv_text, const DataConfig& config);

// Quantile binning. Boundaries are the distinct empirical quantiles at
// i/q; the ordinal of a value is the number of boundaries strictly
// below it. A constant column yields a single bin and no boundaries.
std::pair<std::vector<int>, std::vector<double>> discretize(std::span<const double> values, int q);

// Nearest-rank empirical quantile of `values` at probability q in (0,1).
double empirical_quantile(std::vector<double> values, double q);

// Deterministic stratified k-fold split; per-fold class proportions are
// within one sample of the global proportions.
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_kfold(
    std::span<const std::uint8_t> labels, int k, std::uint64_t seed);
std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_kfold(
    const Dataset& dataset, int k, std::uint64_t seed);

// n indices drawn uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed);

}  // namespace fairtree
