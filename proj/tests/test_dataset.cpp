#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "fairtree/dataset.hpp"
#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

using namespace fairtree;

namespace {

const char* kMinimalCsv =
    "age,sex,y\n"
    "25,female,yes\n"
    "37,male,no\n"
    "41,female,no\n"
    "52,male,yes\n";

DataConfig minimal_config() {
  return DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["sex"],
    "bins": 4
  })");
}

}  // namespace

TEST_CASE("minimal csv loads with one retained group") {
  auto result = load_csv_text(kMinimalCsv, minimal_config());
  const auto& ds = result.dataset;
  CHECK(ds.n() == 4);
  CHECK(ds.m() == 1);  // sensitive column excluded from features
  CHECK(ds.feature_names[0] == "age");
  REQUIRE(ds.sensitive.groups.size() == 1);  // binary attribute keeps one side
  CHECK(ds.sensitive.groups[0].attribute == "sex");
  CHECK(ds.sensitive.groups[0].s_plus == 2);
  CHECK(ds.sensitive.groups[0].s_minus == 2);
  CHECK(ds.labels == std::vector<std::uint8_t>{1, 0, 0, 1});
  CHECK(result.dropped_rows == 0);
}

TEST_CASE("intersectional mode yields one group per observed combination") {
  const char* csv =
      "f,race,gender,y\n"
      "1,W,F,yes\n"
      "2,W,M,no\n"
      "3,NW,F,yes\n"
      "4,NW,M,no\n"
      "5,W,F,no\n"
      "6,NW,M,yes\n";
  auto config = DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["race", "gender"],
    "sensitive_mode": "intersectional",
    "bins": 4
  })");
  auto result = load_csv_text(csv, config);
  const auto& groups = result.dataset.sensitive.groups;
  REQUIRE(groups.size() == 4);
  std::set<std::string> categories;
  std::vector<int> coverage(result.dataset.n(), 0);
  for (const auto& g : groups) {
    CHECK(g.attribute == "racexgender");
    categories.insert(g.category);
    for (std::size_t i = 0; i < g.mask.size(); ++i) coverage[i] += g.mask[i];
  }
  CHECK(categories == std::set<std::string>{"NW|F", "NW|M", "W|F", "W|M"});
  // Masks are mutually exclusive and collectively exhaustive.
  for (int c : coverage) CHECK(c == 1);
}

TEST_CASE("per-attribute mode on two sensitive columns") {
  const char* csv =
      "f,race,gender,y\n"
      "1,W,F,yes\n"
      "2,W,M,no\n"
      "3,NW,F,yes\n"
      "4,NW,M,no\n";
  auto config = DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["race", "gender"],
    "bins": 4
  })");
  auto result = load_csv_text(csv, config);
  REQUIRE(result.dataset.sensitive.groups.size() == 2);  // one per binary attribute
  CHECK(result.dataset.sensitive.groups[0].attribute == "race");
  CHECK(result.dataset.sensitive.groups[1].attribute == "gender");
}

TEST_CASE("single-valued sensitive attribute is dropped with a warning") {
  const char* csv =
      "f,region,sex,y\n"
      "1,east,female,yes\n"
      "2,east,male,no\n"
      "3,east,female,no\n";
  auto config = DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["region", "sex"],
    "bins": 4
  })");
  auto result = load_csv_text(csv, config);
  REQUIRE(result.dataset.sensitive.groups.size() == 1);
  CHECK(result.dataset.sensitive.groups[0].attribute == "sex");
  CHECK_FALSE(result.dataset.sensitive.warnings.empty());

  const char* only_degenerate =
      "f,region,y\n"
      "1,east,yes\n"
      "2,east,no\n";
  auto config2 = DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["region"],
    "bins": 4
  })");
  CHECK_THROWS_AS(load_csv_text(only_degenerate, config2), DataError);
}

TEST_CASE("load errors map to the documented exception types") {
  auto config = minimal_config();
  CHECK_THROWS_AS(load_csv_text("", config), DataError);

  const char* three_labels =
      "age,sex,y\n"
      "1,female,yes\n"
      "2,male,no\n"
      "3,male,maybe\n";
  CHECK_THROWS_AS(load_csv_text(three_labels, config), DataError);

  auto missing_col = DataConfig::from_json_string(R"({
    "label_column": "target",
    "positive_label": "yes",
    "sensitive_columns": ["sex"]
  })");
  CHECK_THROWS_AS(load_csv_text(kMinimalCsv, missing_col), ConfigError);

  auto missing_sensitive = DataConfig::from_json_string(R"({
    "label_column": "y",
    "positive_label": "yes",
    "sensitive_columns": ["nope"]
  })");
  CHECK_THROWS_AS(load_csv_text(kMinimalCsv, missing_sensitive), ConfigError);
}

TEST_CASE("data config validation") {
  CHECK_THROWS_AS(DataConfig::from_json_string("{not json"), ConfigError);
  CHECK_THROWS_AS(DataConfig::from_json_string(R"({"label_column": "y"})"), ConfigError);
  CHECK_THROWS_AS(DataConfig::from_json_string(R"({
    "label_column": "y", "positive_label": "yes",
    "sensitive_columns": ["s"], "sensitive_mode": "bogus"
  })"),
                  ConfigError);
  CHECK_THROWS_AS(DataConfig::from_json_string(R"({
    "label_column": "y", "positive_label": "yes",
    "sensitive_columns": ["s"], "bins": 1
  })"),
                  ConfigError);
  auto ok = DataConfig::from_json_string(R"({
    "label_column": "y", "positive_label": "yes",
    "sensitive_columns": ["s"],
    "column_kinds": {"zip": "categorical", "age": "numeric"},
    "include_sensitive_features": true
  })");
  CHECK(ok.bins == 32);
  CHECK(ok.include_sensitive_features);
  CHECK(ok.column_kinds.at("zip") == ColumnKind::Categorical);
  CHECK(ok.column_kinds.at("age") == ColumnKind::Numeric);
}

TEST_CASE("rows with missing label or sensitive cells are dropped") {
  const char* csv =
      "age,sex,y\n"
      "25,female,yes\n"
      "37,,no\n"
      "41,male,?\n"
      "52,male,no\n";
  auto result = load_csv_text(csv, minimal_config());
  CHECK(result.dataset.n() == 2);
  CHECK(result.dropped_rows == 2);
}

TEST_CASE("categorical features are one-hot encoded") {
  const char* csv =
      "job,sex,y\n"
      "clerk,female,yes\n"
      "nurse,male,no\n"
      "pilot,female,no\n"
      "clerk,male,yes\n";
  auto result = load_csv_text(csv, minimal_config());
  const auto& ds = result.dataset;
  REQUIRE(ds.m() == 3);
  CHECK(ds.feature_names[0] == "job=clerk");
  CHECK(ds.feature_names[1] == "job=nurse");
  CHECK(ds.feature_names[2] == "job=pilot");
  for (int bins : ds.n_bins) CHECK(bins == 2);
  CHECK(ds.columns[0] == std::vector<int>{1, 0, 0, 1});
  CHECK(ds.columns[1] == std::vector<int>{0, 1, 0, 0});
}

TEST_CASE("missing numeric cells route to the dedicated extra bin") {
  const char* csv =
      "age,sex,y\n"
      "10,female,yes\n"
      "20,male,no\n"
      "30,female,no\n"
      "40,male,yes\n"
      "?,female,yes\n";
  auto config = minimal_config();
  config.bins = 2;
  auto result = load_csv_text(csv, config);
  const auto& spec = result.encoder.features[0];
  REQUIRE(spec.kind == FeatureSpec::Kind::Numeric);
  const int missing_bin = static_cast<int>(spec.boundaries.size()) + 1;
  CHECK(result.dataset.columns[0][4] == missing_bin);
  CHECK(result.dataset.n_bins[0] == missing_bin + 1);
}

TEST_CASE("encoder json round trip preserves encoding") {
  auto result = load_csv_text(kMinimalCsv, minimal_config());
  auto restored = Encoder::from_json_string(result.encoder.to_json_string());
  REQUIRE(restored.features.size() == result.encoder.features.size());
  for (const char* cell : {"25", "37", "41", "52", "33.5", "", "?"}) {
    CHECK(restored.encode_cell(0, cell) == result.encoder.encode_cell(0, cell));
  }
  CHECK(restored.bins_of(0) == result.encoder.bins_of(0));
}

TEST_CASE("discretize median split and degenerate column") {
  std::vector<double> vals = {1, 2, 3, 4};
  auto [ordinals, boundaries] = discretize(vals, 2);
  CHECK(ordinals == std::vector<int>{0, 0, 1, 1});
  REQUIRE(boundaries.size() == 1);

  std::vector<double> flat = {5, 5, 5};
  auto [flat_ords, flat_bounds] = discretize(flat, 4);
  CHECK(flat_ords == std::vector<int>{0, 0, 0});
  CHECK(flat_bounds.empty());
}

TEST_CASE("discretize balances bins on uniform data") {
  Rng rng(11);
  std::vector<double> vals(100);
  for (auto& v : vals) v = rng.uniform();
  auto [ordinals, boundaries] = discretize(vals, 10);
  REQUIRE(boundaries.size() == 9);
  std::vector<int> counts(10, 0);
  for (int o : ordinals) counts[static_cast<std::size_t>(o)]++;
  for (int c : counts) {
    CHECK(c >= 9);
    CHECK(c <= 11);
  }
}

TEST_CASE("discretize is order-consistent with raw values") {
  Rng rng(23);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> vals(40);
    for (auto& v : vals) v = std::floor(rng.uniform() * 12.0);
    auto [ordinals, boundaries] = discretize(vals, 5);
    for (std::size_t i = 0; i < vals.size(); ++i)
      for (std::size_t j = 0; j < vals.size(); ++j)
        if (vals[i] <= vals[j]) CHECK(ordinals[i] <= ordinals[j]);
    CHECK(std::is_sorted(boundaries.begin(), boundaries.end()));
  }
}

TEST_CASE("discretize rejects bad input") {
  std::vector<double> vals = {1, 2};
  CHECK_THROWS_AS(discretize(vals, 1), ConfigError);
  std::vector<double> inf = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(discretize(inf, 2), DataError);
}

TEST_CASE("stratified kfold gives exact small-sample stratification") {
  std::vector<std::uint8_t> labels = {1, 1, 1, 1, 1, 0, 0, 0, 0, 0};
  auto folds = stratified_kfold(labels, 5, 99);
  REQUIRE(folds.size() == 5);
  for (const auto& [train, test] : folds) {
    REQUIRE(test.size() == 2);
    int pos = 0;
    for (auto i : test) pos += labels[i];
    CHECK(pos == 1);
    CHECK(train.size() == 8);
  }
}

TEST_CASE("stratified kfold with a 30/15 split over 3 folds") {
  std::vector<std::uint8_t> labels(45, 0);
  for (std::size_t i = 0; i < 30; ++i) labels[i] = 1;
  auto folds = stratified_kfold(labels, 3, 7);
  std::vector<int> seen(45, 0);
  for (const auto& [train, test] : folds) {
    int pos = 0;
    for (auto i : test) {
      pos += labels[i];
      seen[i]++;
    }
    CHECK(pos == 10);
    CHECK(test.size() == 15);
  }
  for (int s : seen) CHECK(s == 1);  // every sample in exactly one test fold
}

TEST_CASE("stratified kfold is deterministic and seed-sensitive") {
  std::vector<std::uint8_t> labels(40);
  Rng rng(5);
  int pos = 0;
  for (auto& b : labels) pos += (b = rng.uniform() < 0.4 ? 1 : 0);
  REQUIRE(pos >= 4);
  REQUIRE(static_cast<int>(labels.size()) - pos >= 4);
  auto a = stratified_kfold(labels, 4, 123);
  auto b = stratified_kfold(labels, 4, 123);
  auto c = stratified_kfold(labels, 4, 124);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("stratified kfold rejects undersized classes") {
  std::vector<std::uint8_t> labels = {1, 0, 0, 0, 0, 0};
  CHECK_THROWS_AS(stratified_kfold(labels, 2, 0), ConfigError);
  CHECK_THROWS_AS(stratified_kfold(labels, 1, 0), ConfigError);
}

TEST_CASE("bootstrap sampling") {
  CHECK(bootstrap_sample(1, 42) == std::vector<std::size_t>{0});
  CHECK(bootstrap_sample(50, 9) == bootstrap_sample(50, 9));
  CHECK(bootstrap_sample(50, 9) != bootstrap_sample(50, 10));

  auto sample = bootstrap_sample(10000, 3);
  REQUIRE(sample.size() == 10000);
  std::set<std::size_t> distinct(sample.begin(), sample.end());
  const double fraction = static_cast<double>(distinct.size()) / 10000.0;
  CHECK(std::fabs(fraction - (1.0 - 1.0 / std::exp(1.0))) < 0.02);
  for (auto i : sample) CHECK(i < 10000);
}

TEST_CASE("empirical quantile nearest-rank behaviour") {
  std::vector<double> vals = {3, 1, 4, 1, 5, 9, 2, 6};
  CHECK(empirical_quantile(vals, 0.5) == 3.0);   // rank ceil(4)-1 of sorted {1,1,2,3,4,5,6,9}
  CHECK(empirical_quantile(vals, 0.125) == 1.0);
  CHECK(empirical_quantile(vals, 0.99) == 9.0);
}
