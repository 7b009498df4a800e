#include "fairtree/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>

#include <json.hpp>

#include "fairtree/error.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SweepCell {
  std::string label;
  SplitCriterion criterion;
  bool has_theta = false;
};

std::vector<SweepCell> expand_cells(const ExperimentConfig& config) {
  std::vector<SweepCell> cells;
  for (const auto& entry : config.criteria) {
    if (entry == "scaff") {
      for (double theta : config.theta_grid) {
        SweepCell cell;
        cell.label = "scaff";
        cell.criterion.kind = CriterionKind::Scaff;
        cell.criterion.theta = theta;
        cell.has_theta = true;
        cells.push_back(std::move(cell));
      }
    } else {
      SweepCell cell;
      cell.criterion = SplitCriterion::parse(entry);
      cell.label = entry;
      cell.has_theta = false;
      cells.push_back(std::move(cell));
    }
  }
  if (cells.empty()) throw ConfigError("experiment: empty criterion list");
  return cells;
}

void validate_config(const ExperimentConfig& config) {
  if (config.k_folds < 2) throw ConfigError("experiment: k_folds must be >= 2");
  for (double theta : config.theta_grid)
    if (!(theta >= 0.0 && theta <= 1.0))
      throw ConfigError("experiment: theta grid values must be in [0,1]");
  double prev = 0.0;
  for (double q : config.dp_quantiles) {
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("experiment: dp quantiles must be in (0,1)");
    if (q < prev) throw ConfigError("experiment: dp quantiles must be sorted");
    prev = q;
  }
}

struct MeanStd {
  double mean = 0.0;
  double std_dev = 0.0;
};

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd result;
  if (values.empty()) return result;
  for (double v : values) result.mean += v;
  result.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - result.mean) * (v - result.mean);
    result.std_dev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return result;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

const TradeoffRow* ExperimentReport::find_row(const std::string& criterion, double theta) const {
  for (const auto& row : tradeoff)
    if (row.criterion == criterion && row.has_theta && std::fabs(row.theta - theta) < 1e-12)
      return &row;
  return nullptr;
}

const TradeoffRow* ExperimentReport::find_row(const std::string& criterion) const {
  for (const auto& row : tradeoff)
    if (row.criterion == criterion && !row.has_theta) return &row;
  return nullptr;
}

std::pair<std::vector<std::vector<double>>, std::vector<double>> dp_threshold_analysis(
    const std::vector<FoldRecord>& folds, const std::vector<double>& thetas,
    std::size_t n_quantiles) {
  std::vector<std::vector<double>> matrix(thetas.size(), std::vector<double>(n_quantiles, 0.0));
  std::vector<double> spread(thetas.size(), 0.0);
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    std::vector<std::vector<double>> per_quantile(n_quantiles);
    for (const auto& record : folds) {
      if (record.criterion != "scaff" || !record.has_theta) continue;
      if (std::fabs(record.theta - thetas[t]) >= 1e-12) continue;
      for (std::size_t q = 0; q < n_quantiles; ++q)
        per_quantile[q].push_back(record.dp_per_quantile[q]);
    }
    std::vector<double> means;
    for (std::size_t q = 0; q < n_quantiles; ++q) {
      matrix[t][q] = mean_std(per_quantile[q]).mean;
      means.push_back(matrix[t][q]);
    }
    spread[t] = mean_std(means).std_dev;
  }
  return {std::move(matrix), std::move(spread)};
}

std::vector<PearsonRow> correlation_table(const std::vector<double>& auc_s_per_theta,
                                          const std::vector<std::vector<double>>& dp_matrix,
                                          const std::vector<double>& quantiles) {
  if (auc_s_per_theta.size() < 3)
    throw ConfigError("correlation_table: need at least 3 theta points");
  std::vector<PearsonRow> table;
  for (std::size_t q = 0; q < quantiles.size(); ++q) {
    PearsonRow row;
    row.quantile = quantiles[q];
    std::vector<double> dp_column;
    for (const auto& theta_row : dp_matrix) dp_column.push_back(theta_row[q]);
    try {
      const PearsonResult result = pearson(auc_s_per_theta, dp_column);
      row.defined = true;
      row.r = result.r;
      row.p = result.p;
    } catch (const DataError&) {
      row.defined = false;
      row.r = kNaN;
      row.p = kNaN;
    }
    table.push_back(row);
  }
  return table;
}

ExperimentReport run_sweep(const Dataset& dataset, const ExperimentConfig& config) {
  validate_config(config);
  const std::vector<SweepCell> cells = expand_cells(config);

  ExperimentReport report;
  report.config = config;
  for (const auto& group : dataset.sensitive.groups)
    report.group_names.push_back(group.attribute + "=" + group.category);
  {
    std::set<double> thetas;
    for (const auto& cell : cells)
      if (cell.has_theta) thetas.insert(cell.criterion.theta);
    report.scaff_thetas.assign(thetas.begin(), thetas.end());
  }

  // One fold assignment shared by every (criterion, theta) cell, so
  // comparisons across cells are paired.
  const auto folds = stratified_kfold(dataset, config.k_folds, config.seed);

  for (const auto& cell : cells) {
    for (int f = 0; f < config.k_folds; ++f) {
      const auto& [train_idx, test_idx] = folds[static_cast<std::size_t>(f)];
      ForestConfig forest_config = config.forest;
      forest_config.tree.criterion = cell.criterion;
      // Seed depends on the fold only: cells at identical criteria see
      // identical forests.
      forest_config.seed = mix_seed(config.seed, static_cast<std::uint64_t>(f) + 1000);
      const ForestModel model = fit(dataset, forest_config, train_idx);
      const std::vector<double> scores = predict(model, dataset, test_idx);

      FoldRecord record;
      record.criterion = cell.label;
      record.theta = cell.has_theta ? cell.criterion.theta : kNaN;
      record.has_theta = cell.has_theta;
      record.fold = f;

      std::vector<std::uint8_t> test_labels;
      test_labels.reserve(test_idx.size());
      for (std::size_t i : test_idx) test_labels.push_back(dataset.labels[i]);
      record.auc_y = auc(scores, test_labels);

      record.auc_s_max = 0.5;
      std::vector<std::vector<std::uint8_t>> test_masks;
      for (std::size_t g = 0; g < dataset.sensitive.groups.size(); ++g) {
        std::vector<std::uint8_t> mask;
        mask.reserve(test_idx.size());
        for (std::size_t i : test_idx) mask.push_back(dataset.sensitive.groups[g].mask[i]);
        const double value = sensitive_auc(scores, mask);
        record.auc_s_per_group.emplace_back(report.group_names[g], value);
        record.auc_s_max = std::max(record.auc_s_max, value);
        test_masks.push_back(std::move(mask));
      }

      // DP thresholds come from this fold's test score distribution.
      const std::vector<double> thresholds =
          quantile_thresholds(scores, config.dp_quantiles);
      for (double t : thresholds) {
        double dp = 0.0;
        for (const auto& mask : test_masks)
          dp = std::max(dp, demographic_parity(scores, mask, t));
        record.dp_per_quantile.push_back(dp);
      }
      report.folds.push_back(std::move(record));
    }
  }

  // Aggregates.
  for (const auto& cell : cells) {
    TradeoffRow row;
    row.criterion = cell.label;
    row.theta = cell.has_theta ? cell.criterion.theta : kNaN;
    row.has_theta = cell.has_theta;
    std::vector<double> auc_ys, auc_s_maxes;
    std::vector<std::vector<double>> per_group(report.group_names.size());
    for (const auto& record : report.folds) {
      if (record.criterion != cell.label || record.has_theta != cell.has_theta) continue;
      if (cell.has_theta && std::fabs(record.theta - cell.criterion.theta) >= 1e-12) continue;
      auc_ys.push_back(record.auc_y);
      auc_s_maxes.push_back(record.auc_s_max);
      for (std::size_t g = 0; g < per_group.size(); ++g)
        per_group[g].push_back(record.auc_s_per_group[g].second);
    }
    const MeanStd y = mean_std(auc_ys);
    const MeanStd s = mean_std(auc_s_maxes);
    row.auc_y_mean = y.mean;
    row.auc_y_std = y.std_dev;
    row.auc_s_max_mean = s.mean;
    row.auc_s_max_std = s.std_dev;
    for (std::size_t g = 0; g < per_group.size(); ++g)
      row.auc_s_group_mean.emplace_back(report.group_names[g], mean_std(per_group[g]).mean);
    report.tradeoff.push_back(std::move(row));
  }

  if (!report.scaff_thetas.empty()) {
    auto [matrix, spread] =
        dp_threshold_analysis(report.folds, report.scaff_thetas, config.dp_quantiles.size());
    report.dp_matrix = std::move(matrix);
    report.dp_spread = std::move(spread);
    if (report.scaff_thetas.size() >= 3) {
      std::vector<double> auc_s_per_theta;
      for (double theta : report.scaff_thetas)
        auc_s_per_theta.push_back(report.find_row("scaff", theta)->auc_s_max_mean);
      report.pearson_table =
          correlation_table(auc_s_per_theta, report.dp_matrix, config.dp_quantiles);
    }
  }
  return report;
}

ExperimentReport run_sweep(const ExperimentConfig& config) {
  if (config.synthetic) {
    const Dataset dataset = generate_synthetic(*config.synthetic);
    return run_sweep(dataset, config);
  }
  if (config.data_csv.empty() || config.data_config.empty())
    throw ConfigError("experiment: need data_csv + data_config or a synthetic block");
  const DataConfig data_config = DataConfig::from_json_file(config.data_config);
  const LoadResult loaded = load_csv(config.data_csv, data_config);
  return run_sweep(loaded.dataset, config);
}

ExperimentConfig ExperimentConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid experiment JSON: ") + e.what());
  }
  ExperimentConfig config;
  config.data_csv = j.value("data_csv", "");
  config.data_config = j.value("data_config", "");
  if (j.contains("synthetic")) {
    const json& s = j["synthetic"];
    SyntheticConfig synthetic;
    synthetic.n = s.value("n", synthetic.n);
    synthetic.bias_strength = s.value("bias", synthetic.bias_strength);
    synthetic.signal_strength = s.value("signal", synthetic.signal_strength);
    synthetic.n_groups = s.value("groups", synthetic.n_groups);
    synthetic.seed = s.value("seed", synthetic.seed);
    config.synthetic = synthetic;
  }
  if (j.contains("criteria")) config.criteria = j["criteria"].get<std::vector<std::string>>();
  if (j.contains("theta_grid")) config.theta_grid = j["theta_grid"].get<std::vector<double>>();
  if (j.contains("k_folds")) config.k_folds = j["k_folds"].get<int>();
  if (j.contains("dp_quantiles"))
    config.dp_quantiles = j["dp_quantiles"].get<std::vector<double>>();
  if (j.contains("seed")) config.seed = j["seed"].get<std::uint64_t>();
  config.forest.n_trees = j.value("n_trees", config.forest.n_trees);
  config.forest.tree.max_depth = j.value("max_depth", config.forest.tree.max_depth);
  config.forest.tree.min_samples_leaf =
      j.value("min_samples_leaf", config.forest.tree.min_samples_leaf);
  config.forest.tree.features_per_split =
      j.value("features_per_split", config.forest.tree.features_per_split);
  config.forest.n_threads = j.value("threads", config.forest.n_threads);
  return config;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_string(text);
}

namespace {

json report_to_json(const ExperimentReport& report) {
  json j;
  std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  j["meta"] = {{"generated_at", stamp}, {"format", "fairtree-report"}, {"version", 1}};

  json cfg;
  cfg["criteria"] = report.config.criteria;
  cfg["theta_grid"] = report.config.theta_grid;
  cfg["k_folds"] = report.config.k_folds;
  cfg["n_trees"] = report.config.forest.n_trees;
  cfg["max_depth"] = report.config.forest.tree.max_depth;
  cfg["min_samples_leaf"] = report.config.forest.tree.min_samples_leaf;
  cfg["features_per_split"] = report.config.forest.tree.features_per_split;
  cfg["dp_quantiles"] = report.config.dp_quantiles;
  cfg["seed"] = report.config.seed;
  j["config"] = std::move(cfg);
  j["groups"] = report.group_names;

  json folds = json::array();
  for (const auto& record : report.folds) {
    json r;
    r["criterion"] = record.criterion;
    if (record.has_theta) r["theta"] = record.theta;
    r["fold"] = record.fold;
    r["auc_y"] = record.auc_y;
    r["auc_s_max"] = record.auc_s_max;
    json groups = json::object();
    for (const auto& [name, value] : record.auc_s_per_group) groups[name] = value;
    r["auc_s_per_group"] = std::move(groups);
    r["dp_per_quantile"] = record.dp_per_quantile;
    folds.push_back(std::move(r));
  }
  j["folds"] = std::move(folds);

  json tradeoff = json::array();
  for (const auto& row : report.tradeoff) {
    json r;
    r["criterion"] = row.criterion;
    if (row.has_theta) r["theta"] = row.theta;
    r["auc_y_mean"] = row.auc_y_mean;
    r["auc_y_std"] = row.auc_y_std;
    r["auc_s_max_mean"] = row.auc_s_max_mean;
    r["auc_s_max_std"] = row.auc_s_max_std;
    json groups = json::object();
    for (const auto& [name, value] : row.auc_s_group_mean) groups[name] = value;
    r["auc_s_group_mean"] = std::move(groups);
    tradeoff.push_back(std::move(r));
  }
  j["tradeoff"] = std::move(tradeoff);

  j["scaff_thetas"] = report.scaff_thetas;
  j["dp_matrix"] = report.dp_matrix;
  j["dp_spread"] = report.dp_spread;
  json pearson_rows = json::array();
  for (const auto& row : report.pearson_table) {
    json r;
    r["quantile"] = row.quantile;
    r["defined"] = row.defined;
    if (row.defined) {
      r["r"] = row.r;
      r["p"] = row.p;
    }
    pearson_rows.push_back(std::move(r));
  }
  j["pearson"] = std::move(pearson_rows);
  return j;
}

}  // namespace

void write_report(const ExperimentReport& report, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  {
    std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
    if (!out) throw DataError("cannot write report.json in " + out_dir);
    out << report_to_json(report).dump(2) << "\n";
  }

  {
    std::ofstream out(fs::path(out_dir) / "tradeoff.csv", std::ios::binary);
    out << "criterion,theta,auc_y_mean,auc_y_std,auc_s_max_mean,auc_s_max_std\n";
    for (const auto& row : report.tradeoff) {
      out << row.criterion << "," << (row.has_theta ? fmt(row.theta) : "") << ","
          << fmt(row.auc_y_mean) << "," << fmt(row.auc_y_std) << "," << fmt(row.auc_s_max_mean)
          << "," << fmt(row.auc_s_max_std) << "\n";
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "dp_matrix.csv", std::ios::binary);
    out << "theta";
    for (double q : report.config.dp_quantiles) out << ",dp_q" << fmt(q);
    out << ",spread\n";
    for (std::size_t t = 0; t < report.scaff_thetas.size(); ++t) {
      out << fmt(report.scaff_thetas[t]);
      for (double dp : report.dp_matrix[t]) out << "," << fmt(dp);
      out << "," << fmt(report.dp_spread[t]) << "\n";
    }
  }

  {
    std::ofstream out(fs::path(out_dir) / "pearson.csv", std::ios::binary);
    out << "quantile,r,p\n";
    for (const auto& row : report.pearson_table) {
      out << fmt(row.quantile) << ",";
      if (row.defined)
        out << fmt(row.r) << "," << fmt(row.p);
      else
        out << ",";
      out << "\n";
    }
  }
}

}  // namespace fairtree
