#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairtree/csv.hpp"
#include "fairtree/dataset.hpp"
#include "fairtree/error.hpp"
#include "fairtree/experiment.hpp"
#include "fairtree/forest.hpp"
#include "fairtree/synthetic.hpp"

namespace {

using namespace fairtree;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct ForestFlags {
  int n_trees = 500;
  int max_depth = 4;
  int min_samples_leaf = 1;
  int features_per_split = 0;
  int threads = 0;
  std::uint64_t seed = 0;

  void attach(CLI::App* cmd) {
    cmd->add_option("--trees", n_trees, "Number of trees")->check(CLI::PositiveNumber);
    cmd->add_option("--depth", max_depth, "Maximum tree depth")->check(CLI::PositiveNumber);
    cmd->add_option("--min-leaf", min_samples_leaf, "Minimum samples per leaf")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--features", features_per_split,
                    "Features considered per split (0 = ceil(sqrt(m)))");
    cmd->add_option("--threads", threads, "Worker threads (0 = auto)");
    cmd->add_option("--seed", seed, "Random seed");
  }

  ForestConfig to_config(const SplitCriterion& criterion) const {
    ForestConfig config;
    config.n_trees = n_trees;
    config.seed = seed;
    config.n_threads = threads;
    config.tree.max_depth = max_depth;
    config.tree.min_samples_leaf = min_samples_leaf;
    config.tree.features_per_split = features_per_split;
    config.tree.criterion = criterion;
    return config;
  }
};

int run_train(const std::string& data_path, const std::string& config_path,
              const std::string& criterion_text, const std::string& out_path,
              const ForestFlags& flags) {
  const DataConfig data_config = DataConfig::from_json_file(config_path);
  const SplitCriterion criterion = SplitCriterion::parse(criterion_text);
  LoadResult loaded = load_csv(data_path, data_config);
  for (const auto& warning : loaded.dataset.sensitive.warnings)
    std::cerr << "warning: " << warning << "\n";
  if (loaded.dropped_rows > 0)
    std::cerr << "note: dropped " << loaded.dropped_rows
              << " rows with missing label/sensitive values\n";
  std::cerr << "training " << criterion.to_string() << " forest: " << flags.n_trees
            << " trees, depth " << flags.max_depth << ", n=" << loaded.dataset.n()
            << ", m=" << loaded.dataset.m() << "\n";

  ForestModel model = fit(loaded.dataset, flags.to_config(criterion));
  model.encoder = std::move(loaded.encoder);
  model.save(out_path);
  std::cerr << "model written to " << out_path << "\n";
  return kExitOk;
}

int run_predict(const std::string& model_path, const std::string& data_path,
                const std::string& out_path) {
  const ForestModel model = ForestModel::load(model_path);
  if (!model.encoder)
    throw DataError("model has no feature encoder; it cannot score raw CSV rows");
  const CsvTable table = read_csv_file(data_path);

  std::vector<int> source_col(model.encoder->features.size(), -1);
  for (std::size_t f = 0; f < model.encoder->features.size(); ++f) {
    const std::string& source = model.encoder->features[f].source;
    source_col[f] = table.column_index(source);
    if (source_col[f] < 0) throw ConfigError("input CSV lacks column \"" + source + "\"");
  }

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + out_path);
  out << "row,score\n";
  std::vector<int> row(model.encoder->features.size(), 0);
  char buf[40];
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t f = 0; f < row.size(); ++f)
      row[f] = model.encoder->encode_cell(
          f, table.rows[r][static_cast<std::size_t>(source_col[f])]);
    std::snprintf(buf, sizeof buf, "%.17g", predict_row(model, row));
    out << r << "," << buf << "\n";
  }
  std::cerr << "scored " << table.rows.size() << " rows into " << out_path << "\n";
  return kExitOk;
}

int run_sweep_cmd(const std::string& config_path, const std::string& out_dir) {
  const ExperimentConfig config = ExperimentConfig::from_json_file(config_path);
  std::cerr << "sweep: " << config.criteria.size() << " criteria, " << config.k_folds
            << "-fold CV, " << config.forest.n_trees << " trees per forest\n";
  const ExperimentReport report = run_sweep(config);
  write_report(report, out_dir);
  std::cerr << "report written to " << out_dir << "/\n";
  return kExitOk;
}

int run_synth(const SyntheticConfig& config, const std::string& out_path) {
  const SyntheticData data = generate_synthetic_raw(config);
  write_synthetic_csv(data, out_path);
  std::cerr << "wrote " << data.labels.size() << " rows to " << out_path << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fairness-aware tree ensembles with AUC-based splitting criteria"};
  app.require_subcommand(1);

  std::string data_path, config_path, criterion_text = "scaff:0", out_path, model_path, out_dir;
  ForestFlags flags;
  SyntheticConfig synth;

  CLI::App* train = app.add_subcommand("train", "Train a forest on a CSV dataset");
  train->add_option("--data", data_path, "Input CSV")->required();
  train->add_option("--config", config_path, "Data config JSON")->required();
  train->add_option("--criterion", criterion_text,
                    "scaff:<theta> | auc | kamiran-sub | kamiran-div | faht");
  train->add_option("--out", out_path, "Output model JSON")->required();
  flags.attach(train);

  CLI::App* predict = app.add_subcommand("predict", "Score raw CSV rows with a saved model");
  predict->add_option("--model", model_path, "Model JSON")->required();
  predict->add_option("--data", data_path, "Input CSV")->required();
  predict->add_option("--out", out_path, "Output scores CSV")->required();

  CLI::App* sweep = app.add_subcommand("sweep", "Cross-validated criterion/theta sweep");
  sweep->add_option("--config", config_path, "Experiment config JSON")->required();
  sweep->add_option("--out", out_dir, "Output report directory")->required();

  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic biased dataset");
  synth_cmd->add_option("--n", synth.n, "Number of samples");
  synth_cmd->add_option("--bias", synth.bias_strength, "Bias strength in [0,1]");
  synth_cmd->add_option("--signal", synth.signal_strength, "Signal strength in [0,1]");
  synth_cmd->add_option("--groups", synth.n_groups, "Number of sensitive groups");
  synth_cmd->add_option("--seed", synth.seed, "Random seed");
  synth_cmd->add_option("--out", out_path, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (train->parsed())
      return run_train(data_path, config_path, criterion_text, out_path, flags);
    if (predict->parsed()) return run_predict(model_path, data_path, out_path);
    if (sweep->parsed()) return run_sweep_cmd(config_path, out_dir);
    if (synth_cmd->parsed()) return run_synth(synth, out_path);
  } catch (const fairtree::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fairtree::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitConfig;
}
