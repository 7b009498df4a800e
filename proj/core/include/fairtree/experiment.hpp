#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fairtree/dataset.hpp"
#include "fairtree/forest.hpp"
#include "fairtree/synthetic.hpp"

namespace fairtree {

struct ExperimentConfig {
  // Exactly one data source: a CSV + data config pair, or the
  // synthetic generator.
  std::string data_csv;
  std::string data_config;
  std::optional<SyntheticConfig> synthetic;

  // "scaff" expands over theta_grid; "scaff:<t>", "auc", "kamiran-sub",
  // "kamiran-div", "faht" are single cells.
  std::vector<std::string> criteria = {"scaff"};
  std::vector<double> theta_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  int k_folds = 10;
  ForestConfig forest;
  std::vector<double> dp_quantiles = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::uint64_t seed = 0;

  static ExperimentConfig from_json_string(const std::string& text);
  static ExperimentConfig from_json_file(const std::string& path);
};

// One (criterion, theta, fold) test-fold measurement. For scaff cells
// theta is the grid value; for single-criterion cells it is NaN.
struct FoldRecord {
  std::string criterion;  // label, e.g. "scaff" or "kamiran-sub"
  double theta = 0.0;
  bool has_theta = false;
  int fold = 0;
  double auc_y = 0.0;
  std::vector<std::pair<std::string, double>> auc_s_per_group;
  double auc_s_max = 0.0;
  std::vector<double> dp_per_quantile;  // thresholds from this fold's test scores
};

struct TradeoffRow {
  std::string criterion;
  double theta = 0.0;
  bool has_theta = false;
  double auc_y_mean = 0.0, auc_y_std = 0.0;
  double auc_s_max_mean = 0.0, auc_s_max_std = 0.0;
  std::vector<std::pair<std::string, double>> auc_s_group_mean;
};

struct PearsonRow {
  double quantile = 0.0;
  bool defined = false;
  double r = 0.0;
  double p = 1.0;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<std::string> group_names;
  std::vector<double> scaff_thetas;  // ascending grid actually swept
  std::vector<FoldRecord> folds;

  // Aggregates, recomputable from the per-fold records.
  std::vector<TradeoffRow> tradeoff;
  std::vector<std::vector<double>> dp_matrix;  // [theta index][quantile index], fold means
  std::vector<double> dp_spread;               // std across quantiles, per theta
  std::vector<PearsonRow> pearson_table;       // auc_s_max vs DP along theta, per quantile

  const TradeoffRow* find_row(const std::string& criterion, double theta) const;
  const TradeoffRow* find_row(const std::string& criterion) const;
};

ExperimentReport run_sweep(const Dataset& dataset, const ExperimentConfig& config);

// Loads or generates the configured dataset, then sweeps.
ExperimentReport run_sweep(const ExperimentConfig& config);

// DP fold means per (theta, quantile) plus the per-theta spread (std of
// the mean DP across thresholds).
std::pair<std::vector<std::vector<double>>, std::vector<double>> dp_threshold_analysis(
    const std::vector<FoldRecord>& folds, const std::vector<double>& thetas,
    std::size_t n_quantiles);

// One (r, p) Pearson row per quantile threshold; zero-variance columns
// are marked undefined.
std::vector<PearsonRow> correlation_table(const std::vector<double>& auc_s_per_theta,
                                          const std::vector<std::vector<double>>& dp_matrix,
                                          const std::vector<double>& quantiles);

// Writes report.json, tradeoff.csv, dp_matrix.csv, pearson.csv into
// `out_dir` (created if needed). The CSVs are byte-deterministic; only
// report.json carries a timestamp.
void write_report(const ExperimentReport& report, const std::string& out_dir);

}  // namespace fairtree
