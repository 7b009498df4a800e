// End-to-end acceptance checks. Each check prints one PASS/FAIL line;
// the process exits nonzero if any check fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "fairtree/experiment.hpp"
#include "fairtree/forest.hpp"
#include "fairtree/metrics.hpp"
#include "fairtree/rng.hpp"
#include "fairtree/synthetic.hpp"
#include "fairtree/tree.hpp"
#include "test_support.hpp"

using namespace fairtree;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] %2d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::vector<std::size_t> all_rows(const Dataset& ds) {
  std::vector<std::size_t> rows(ds.n());
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

// 1. Worked split example: SG(gender) = 0.1, SG(race) = -0.0585 +- 5e-4,
//    OvR sensitive AUC 0.917 +- 1e-3.
void check_worked_example() {
  const auto start = std::chrono::steady_clock::now();
  auto ex = testsupport::make_split_example();
  auto rows = all_rows(ex.both);
  const SplitCandidate candidate{0, 0};
  const SplitCriterion criterion{CriterionKind::Scaff, 0.5};

  const double sg_gender = evaluate_split(candidate, rows, ex.gender_only, criterion).gain;
  const double sg_race = evaluate_split(candidate, rows, ex.race_only, criterion).gain;
  const double ovr = evaluate_split(candidate, rows, ex.both, criterion).auc_s_child_max;
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  const bool ok = std::fabs(sg_gender - 0.1) < 1e-9 && std::fabs(sg_race - (-0.0585)) < 5e-4 &&
                  std::fabs(ovr - 0.917) < 1e-3 && elapsed < 1.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "worked split example: SG(gender)=%.4f SG(race)=%.4f ovr=%.3f (%.2fs)",
                sg_gender, sg_race, ovr, elapsed);
  report(1, ok, buf);
}

// 2. Rank-based AUC equals the O(n^2) pairwise oracle to 1e-12 on 1000
//    random instances with heavy ties.
void check_auc_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const std::size_t n = 2 + rng.uniform_index(199);
    std::vector<double> z(n);
    for (auto& v : z) v = std::floor(rng.uniform() * 4.0) / 4.0;  // >= 20% tie mass
    std::vector<std::uint8_t> y(n);
    for (auto& b : y) b = rng.uniform() < 0.5 ? 1 : 0;
    worst = std::max(worst, std::fabs(auc(z, y) - testsupport::auc_oracle(z, y)));
  }
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool ok = worst < 1e-12 && elapsed < 10.0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "auc vs pairwise oracle: worst |delta|=%.2e (%.2fs)", worst,
                elapsed);
  report(2, ok, buf);
}

// 3. The theta=0 forest and the pure-AUC forest serialize to identical
//    tree sets on multiple datasets and seeds.
void check_theta_zero_reduction() {
  bool ok = true;
  for (std::uint64_t seed : {1ULL, 77ULL, 901ULL}) {
    SyntheticConfig synth;
    synth.n = 300;
    synth.bias_strength = 0.6;
    synth.signal_strength = 0.7;
    synth.seed = seed;
    Dataset ds = generate_synthetic(synth, 8);

    ForestConfig config;
    config.n_trees = 10;
    config.seed = seed * 31 + 5;
    config.n_threads = 1;
    config.tree.criterion = SplitCriterion::parse("scaff:0");
    auto scaff_model = fit(ds, config);
    config.tree.criterion = SplitCriterion::parse("auc");
    auto auc_model = fit(ds, config);
    if (scaff_model.trees.size() != auc_model.trees.size()) {
      ok = false;
      break;
    }
    for (std::size_t t = 0; t < scaff_model.trees.size(); ++t) {
      if (tree_to_json_string(*scaff_model.trees[t]) !=
          tree_to_json_string(*auc_model.trees[t])) {
        ok = false;
        break;
      }
    }
  }
  report(3, ok, "theta=0 forest serialization-identical to pure-AUC forest");
}

ExperimentConfig biased_sweep_config() {
  ExperimentConfig config;
  SyntheticConfig synth;
  synth.n = 2000;
  synth.bias_strength = 0.8;
  synth.signal_strength = 0.8;
  synth.seed = 29;
  config.synthetic = synth;
  config.criteria = {"scaff", "kamiran-sub", "kamiran-div", "faht"};
  config.k_folds = 5;
  config.forest.n_trees = 50;
  // Shallow trees concentrate each tree's score on its strongest
  // splits, which is where the proxy bias shows up at theta=0.
  config.forest.tree.max_depth = 2;
  config.forest.n_threads = 0;
  config.seed = 41;
  return config;
}

// 4. Trade-off along theta: non-increasing auc_s_max within 0.02 and an
//    endpoint drop of at least 0.1.
void check_tradeoff(const ExperimentReport& report_a, double elapsed) {
  bool monotone = true;
  double prev = -1.0;
  for (double theta : report_a.scaff_thetas) {
    const double value = report_a.find_row("scaff", theta)->auc_s_max_mean;
    if (prev >= 0.0 && value > prev + 0.02) monotone = false;
    prev = value;
  }
  const double at0 = report_a.find_row("scaff", 0.0)->auc_s_max_mean;
  const double at1 = report_a.find_row("scaff", 1.0)->auc_s_max_mean;
  const bool ok = monotone && at1 <= at0 - 0.1 && elapsed < 300.0;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "trade-off: auc_s_max %.3f -> %.3f, monotone within 0.02: %s (sweep %.1fs)",
                at0, at1, monotone ? "yes" : "no", elapsed);
  report(4, ok, buf);
}

// 5. Four intersectional groups: every group's sensitive AUC shrinks by
//    theta 0.7, and the across-group max is non-increasing within 0.02.
void check_multigroup() {
  ExperimentConfig config = biased_sweep_config();
  config.synthetic->n_groups = 4;
  config.synthetic->seed = 59;
  config.criteria = {"scaff"};
  auto rep = run_sweep(config);

  bool per_group_ok = true;
  const auto* row0 = rep.find_row("scaff", 0.0);
  const auto* row7 = rep.find_row("scaff", 0.7);
  for (std::size_t g = 0; g < row0->auc_s_group_mean.size(); ++g) {
    if (row7->auc_s_group_mean[g].second > row0->auc_s_group_mean[g].second)
      per_group_ok = false;
  }
  bool monotone = true;
  double prev = -1.0;
  for (double theta : rep.scaff_thetas) {
    const double value = rep.find_row("scaff", theta)->auc_s_max_mean;
    if (prev >= 0.0 && value > prev + 0.02) monotone = false;
    prev = value;
  }
  const bool ok = per_group_ok && monotone && row0->auc_s_group_mean.size() == 4;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "4-group convergence: all groups shrink by theta 0.7: %s, max monotone: %s",
                per_group_ok ? "yes" : "no", monotone ? "yes" : "no");
  report(5, ok, buf);
}

// 6. Spread of mean DP across the 9 thresholds: theta 0.9 below theta 0.
void check_dp_spread(const ExperimentReport& rep) {
  auto spread_at = [&](double theta) {
    for (std::size_t t = 0; t < rep.scaff_thetas.size(); ++t)
      if (std::fabs(rep.scaff_thetas[t] - theta) < 1e-12) return rep.dp_spread[t];
    return -1.0;
  };
  const double s0 = spread_at(0.0);
  const double s9 = spread_at(0.9);
  const bool ok = s9 >= 0.0 && s0 >= 0.0 && s9 < s0;
  char buf[120];
  std::snprintf(buf, sizeof buf, "DP spread: theta=0.9 %.4f < theta=0 %.4f", s9, s0);
  report(6, ok, buf);
}

// 7. Pearson r(auc_s_max, DP) >= 0.8 with p <= 0.05 for at least 7 of
//    the 9 thresholds.
void check_correlation(const ExperimentReport& rep) {
  int strong = 0;
  for (const auto& row : rep.pearson_table)
    if (row.defined && row.r >= 0.8 && row.p <= 0.05) ++strong;
  const bool ok = rep.pearson_table.size() == 9 && strong >= 7;
  char buf[120];
  std::snprintf(buf, sizeof buf, "correlation table: %d of %zu thresholds with r>=0.8, p<=0.05",
                strong, rep.pearson_table.size());
  report(7, ok, buf);
}

// 8. Each baseline lands strictly below the theta=0 forest's sensitive
//    AUC.
void check_baselines(const ExperimentReport& rep) {
  const double unconstrained = rep.find_row("scaff", 0.0)->auc_s_max_mean;
  bool ok = true;
  std::string detail;
  for (const char* name : {"kamiran-sub", "kamiran-div", "faht"}) {
    const auto* row = rep.find_row(name);
    if (row == nullptr) {
      ok = false;
      continue;
    }
    if (!(row->auc_s_max_mean < unconstrained)) ok = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s=%.3f", name, row->auc_s_max_mean);
    detail += buf;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "baselines below theta=0 auc_s_max=%.3f:%s", unconstrained,
                detail.c_str());
  report(8, ok, buf);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

// 9. Two executions of the full sweep write byte-identical CSV tables.
void check_determinism(const ExperimentReport& first) {
  auto second = run_sweep(biased_sweep_config());
  namespace fs = std::filesystem;
  const fs::path dir_a = "acceptance_report_a";
  const fs::path dir_b = "acceptance_report_b";
  write_report(first, dir_a.string());
  write_report(second, dir_b.string());
  bool ok = true;
  for (const char* name : {"tradeoff.csv", "dp_matrix.csv", "pearson.csv"}) {
    if (slurp(dir_a / name) != slurp(dir_b / name)) ok = false;
  }
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  report(9, ok, "repeated sweep produces byte-identical csv tables");
}

// 10. Tree-walk audit over 100 random grown trees.
void check_stopping_rule() {
  Rng rng(4242);
  bool ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 30 + rng.uniform_index(120);
    const std::size_t m = 2 + rng.uniform_index(6);
    std::vector<std::vector<int>> columns(m, std::vector<int>(n));
    for (auto& col : columns)
      for (auto& v : col) v = static_cast<int>(rng.uniform_index(1 + rng.uniform_index(6)));
    std::vector<std::uint8_t> labels(n);
    for (auto& b : labels) b = rng.uniform() < 0.5 ? 1 : 0;
    std::vector<std::uint8_t> mask(n);
    for (auto& b : mask) b = rng.uniform() < 0.5 ? 1 : 0;
    Dataset ds = testsupport::make_dataset(std::move(columns), std::move(labels),
                                           {testsupport::make_group("s", "1", mask)});
    TreeConfig config;
    config.max_depth = 1 + static_cast<int>(rng.uniform_index(5));
    config.min_samples_leaf = 1 + static_cast<int>(rng.uniform_index(3));
    config.seed = rng.next_u64();
    config.criterion = SplitCriterion{CriterionKind::Scaff, rng.uniform()};
    auto tree = grow(ds, all_rows(ds), config);
    auto audit = validate_tree(*tree, config);
    if (!audit.ok) {
      ok = false;
      for (const auto& problem : audit.problems)
        std::fprintf(stderr, "tree audit: %s\n", problem.c_str());
    }
  }
  report(10, ok, "stopping-rule audit over 100 random trees");
}

}  // namespace

int main() {
  check_worked_example();
  check_auc_oracle();
  check_theta_zero_reduction();

  const auto start = std::chrono::steady_clock::now();
  auto sweep = run_sweep(biased_sweep_config());
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  check_tradeoff(sweep, elapsed);
  check_multigroup();
  check_dp_spread(sweep);
  check_correlation(sweep);
  check_baselines(sweep);
  check_determinism(sweep);
  check_stopping_rule();

  if (failures > 0) {
    std::printf("%d acceptance check(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance checks passed\n");
  return 0;
}
