#include "fairtree/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fairtree/csv.hpp"
#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

using nlohmann::json;

bool is_missing(const std::string& cell) { return cell.empty() || cell == "?"; }

bool parse_double(const std::string& cell, double* out) {
  char* end = nullptr;
  const double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0') return false;
  *out = v;
  return true;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

}  // namespace

DataConfig DataConfig::from_json_string(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid data config JSON: ") + e.what());
  }
  DataConfig config;
  try {
    config.label_column = j.at("label_column").get<std::string>();
    config.positive_label = j.at("positive_label").get<std::string>();
    config.sensitive_columns = j.at("sensitive_columns").get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("data config: ") + e.what());
  }
  if (config.sensitive_columns.empty())
    throw ConfigError("data config: sensitive_columns must be non-empty");
  if (j.contains("sensitive_mode")) {
    const auto mode = j["sensitive_mode"].get<std::string>();
    if (mode == "per-attribute")
      config.sensitive_mode = SensitiveMode::PerAttribute;
    else if (mode == "intersectional")
      config.sensitive_mode = SensitiveMode::Intersectional;
    else
      throw ConfigError("data config: sensitive_mode must be per-attribute or intersectional");
  }
  if (j.contains("column_kinds")) {
    for (const auto& [col, kind] : j["column_kinds"].items()) {
      const auto text_kind = kind.get<std::string>();
      if (text_kind == "numeric")
        config.column_kinds[col] = ColumnKind::Numeric;
      else if (text_kind == "categorical")
        config.column_kinds[col] = ColumnKind::Categorical;
      else
        throw ConfigError("data config: column kind must be numeric or categorical, got \"" +
                          text_kind + "\" for " + col);
    }
  }
  if (j.contains("bins")) config.bins = j["bins"].get<int>();
  if (config.bins < 2) throw ConfigError("data config: bins must be >= 2");
  if (j.contains("include_sensitive_features"))
    config.include_sensitive_features = j["include_sensitive_features"].get<bool>();
  return config;
}

DataConfig DataConfig::from_json_file(const std::string& path) {
  return from_json_string(read_json_file(path).dump());
}

int Encoder::encode_cell(std::size_t feature, const std::string& raw) const {
  const FeatureSpec& spec = features.at(feature);
  if (spec.kind == FeatureSpec::Kind::OneHot) return raw == spec.category ? 1 : 0;
  if (is_missing(raw)) return static_cast<int>(spec.boundaries.size()) + 1;
  double v = 0.0;
  if (!parse_double(raw, &v))
    throw DataError("non-numeric value \"" + raw + "\" in numeric column " + spec.source);
  const auto it = std::lower_bound(spec.boundaries.begin(), spec.boundaries.end(), v);
  return static_cast<int>(it - spec.boundaries.begin());
}

int Encoder::bins_of(std::size_t feature) const {
  const FeatureSpec& spec = features.at(feature);
  if (spec.kind == FeatureSpec::Kind::OneHot) return 2;
  return static_cast<int>(spec.boundaries.size()) + 2;  // +1 bins, +1 missing bin
}

std::string Encoder::to_json_string() const {
  json arr = json::array();
  for (const auto& spec : features) {
    json j;
    j["name"] = spec.name;
    j["source"] = spec.source;
    if (spec.kind == FeatureSpec::Kind::Numeric) {
      j["kind"] = "numeric";
      j["boundaries"] = spec.boundaries;
    } else {
      j["kind"] = "onehot";
      j["category"] = spec.category;
    }
    arr.push_back(std::move(j));
  }
  return arr.dump();
}

Encoder Encoder::from_json_string(const std::string& text) {
  Encoder encoder;
  json arr = json::parse(text);
  for (const auto& j : arr) {
    FeatureSpec spec;
    spec.name = j.at("name").get<std::string>();
    spec.source = j.at("source").get<std::string>();
    if (j.at("kind") == "numeric") {
      spec.kind = FeatureSpec::Kind::Numeric;
      spec.boundaries = j.at("boundaries").get<std::vector<double>>();
    } else {
      spec.kind = FeatureSpec::Kind::OneHot;
      spec.category = j.at("category").get<std::string>();
    }
    encoder.features.push_back(std::move(spec));
  }
  return encoder;
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw DataError("empirical_quantile: empty input");
  std::sort(values.begin(), values.end());
  auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(values.size()))) - 1;
  idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

std::pair<std::vector<int>, std::vector<double>> discretize(std::span<const double> values,
                                                            int q) {
  if (q < 2) throw ConfigError("discretize: bin count must be >= 2");
  for (double v : values)
    if (!std::isfinite(v)) throw DataError("discretize: non-finite value");

  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> boundaries;
  for (int i = 1; i < q; ++i) {
    auto idx = static_cast<std::ptrdiff_t>(
                   std::ceil(static_cast<double>(i) / q * static_cast<double>(sorted.size()))) -
               1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
    const double b = sorted[static_cast<std::size_t>(idx)];
    if (boundaries.empty() || b > boundaries.back()) boundaries.push_back(b);
  }
  // A boundary at the column maximum separates nothing (values route by
  // "strictly above"); a constant column ends up with no boundaries.
  while (!boundaries.empty() && boundaries.back() >= sorted.back()) boundaries.pop_back();

  std::vector<int> ordinals;
  ordinals.reserve(values.size());
  for (double v : values) {
    const auto it = std::lower_bound(boundaries.begin(), boundaries.end(), v);
    ordinals.push_back(static_cast<int>(it - boundaries.begin()));
  }
  return {std::move(ordinals), std::move(boundaries)};
}

namespace {

// Builds OvR groups for one attribute given per-row category values.
// An attribute with exactly two categories contributes a single group;
// sensitive AUC is symmetric under mask complement.
void append_attribute_groups(const std::string& attribute,
                             const std::vector<std::string>& values, SensitiveView* view) {
  std::set<std::string> categories(values.begin(), values.end());
  std::vector<std::string> retained(categories.begin(), categories.end());
  if (retained.size() < 2) {
    view->warnings.push_back("sensitive attribute \"" + attribute +
                             "\" has a single observed value; dropped");
    return;
  }
  const bool binary = retained.size() == 2;
  for (const std::string& category : retained) {
    GroupMask group;
    group.attribute = attribute;
    group.category = category;
    group.mask.reserve(values.size());
    for (const auto& v : values) group.mask.push_back(v == category ? 1 : 0);
    group.s_plus = static_cast<std::size_t>(
        std::count(group.mask.begin(), group.mask.end(), std::uint8_t{1}));
    group.s_minus = values.size() - group.s_plus;
    if (group.s_plus == 0 || group.s_minus == 0) {
      view->warnings.push_back("sensitive group " + attribute + "=" + category +
                               " is degenerate; dropped");
      continue;
    }
    view->groups.push_back(std::move(group));
    if (binary) break;  // complement group is redundant
  }
}

}  // namespace

LoadResult load_csv_text(const std::string& csv_text, const DataConfig& config) {
  const CsvTable table = parse_csv(csv_text);

  const int label_col = table.column_index(config.label_column);
  if (label_col < 0) throw ConfigError("label column \"" + config.label_column + "\" not found");
  std::vector<int> sensitive_cols;
  for (const auto& name : config.sensitive_columns) {
    const int idx = table.column_index(name);
    if (idx < 0) throw ConfigError("sensitive column \"" + name + "\" not found");
    sensitive_cols.push_back(idx);
  }

  // Rows with a missing label or sensitive cell carry no usable
  // supervision and are dropped.
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    bool ok = !is_missing(table.rows[r][static_cast<std::size_t>(label_col)]);
    for (int c : sensitive_cols)
      ok = ok && !is_missing(table.rows[r][static_cast<std::size_t>(c)]);
    if (ok) keep.push_back(r);
  }
  if (keep.empty()) throw DataError("no usable data rows in CSV");

  LoadResult result;
  result.dropped_rows = table.rows.size() - keep.size();
  Dataset& ds = result.dataset;
  const std::size_t n = keep.size();

  // Labels.
  std::set<std::string> label_values;
  ds.labels.reserve(n);
  for (std::size_t r : keep) {
    const std::string& v = table.rows[r][static_cast<std::size_t>(label_col)];
    label_values.insert(v);
    ds.labels.push_back(v == config.positive_label ? 1 : 0);
  }
  if (label_values.size() > 2) {
    std::string listed;
    for (const auto& v : label_values) listed += (listed.empty() ? "" : ", ") + v;
    throw DataError("label column has more than two values: " + listed);
  }

  // Sensitive view.
  if (config.sensitive_mode == SensitiveMode::Intersectional) {
    std::string attribute;
    for (const auto& name : config.sensitive_columns)
      attribute += (attribute.empty() ? "" : "x") + name;
    std::vector<std::string> combos;
    combos.reserve(n);
    for (std::size_t r : keep) {
      std::string combo;
      for (int c : sensitive_cols)
        combo += (combo.empty() ? "" : "|") + table.rows[r][static_cast<std::size_t>(c)];
      combos.push_back(std::move(combo));
    }
    append_attribute_groups(attribute, combos, &ds.sensitive);
  } else {
    for (std::size_t a = 0; a < sensitive_cols.size(); ++a) {
      std::vector<std::string> values;
      values.reserve(n);
      for (std::size_t r : keep)
        values.push_back(table.rows[r][static_cast<std::size_t>(sensitive_cols[a])]);
      append_attribute_groups(config.sensitive_columns[a], values, &ds.sensitive);
    }
  }
  if (ds.sensitive.groups.empty())
    throw DataError("no non-degenerate sensitive groups after load");

  // Feature source columns.
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (static_cast<int>(c) == label_col) continue;
    const bool is_sensitive =
        std::find(sensitive_cols.begin(), sensitive_cols.end(), static_cast<int>(c)) !=
        sensitive_cols.end();
    if (is_sensitive && !config.include_sensitive_features) continue;

    const std::string& name = table.header[c];
    std::vector<std::string> raw;
    raw.reserve(n);
    for (std::size_t r : keep) raw.push_back(table.rows[r][c]);

    ColumnKind kind;
    if (auto it = config.column_kinds.find(name); it != config.column_kinds.end()) {
      kind = it->second;
    } else {
      bool numeric = true;
      double tmp = 0.0;
      for (const auto& cell : raw)
        if (!is_missing(cell) && !parse_double(cell, &tmp)) {
          numeric = false;
          break;
        }
      kind = numeric ? ColumnKind::Numeric : ColumnKind::Categorical;
    }

    if (kind == ColumnKind::Numeric) {
      std::vector<double> present;
      for (const auto& cell : raw) {
        double v = 0.0;
        if (is_missing(cell)) continue;
        if (!parse_double(cell, &v))
          throw DataError("non-numeric value \"" + cell + "\" in numeric column " + name);
        present.push_back(v);
      }
      if (present.empty()) continue;  // nothing to bin; feature carries no information
      auto [unused, boundaries] = discretize(present, config.bins);
      (void)unused;
      FeatureSpec spec;
      spec.name = name;
      spec.source = name;
      spec.kind = FeatureSpec::Kind::Numeric;
      spec.boundaries = std::move(boundaries);
      result.encoder.features.push_back(std::move(spec));
    } else {
      std::set<std::string> categories;
      for (const auto& cell : raw)
        if (!is_missing(cell)) categories.insert(cell);
      for (const auto& category : categories) {
        FeatureSpec spec;
        spec.name = name + "=" + category;
        spec.source = name;
        spec.kind = FeatureSpec::Kind::OneHot;
        spec.category = category;
        result.encoder.features.push_back(std::move(spec));
      }
    }
  }

  // Encode the matrix column-major through the encoder, so load and
  // later prediction share one code path.
  const std::size_t m = result.encoder.features.size();
  ds.columns.assign(m, {});
  ds.feature_names.clear();
  ds.n_bins.clear();
  std::vector<int> source_col(m, -1);
  for (std::size_t f = 0; f < m; ++f) {
    const FeatureSpec& spec = result.encoder.features[f];
    source_col[f] = table.column_index(spec.source);
    ds.feature_names.push_back(spec.name);
    ds.n_bins.push_back(result.encoder.bins_of(f));
    ds.columns[f].reserve(n);
  }
  for (std::size_t r : keep)
    for (std::size_t f = 0; f < m; ++f)
      ds.columns[f].push_back(
          result.encoder.encode_cell(f, table.rows[r][static_cast<std::size_t>(source_col[f])]));

  return result;
}

LoadResult load_csv(const std::string& path, const DataConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_csv_text(buf.str(), config);
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_kfold(
    std::span<const std::uint8_t> labels, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be >= 2");
  const std::size_t n = labels.size();
  std::vector<std::vector<std::size_t>> by_class(2);
  for (std::size_t i = 0; i < n; ++i) by_class[labels[i] ? 1 : 0].push_back(i);
  for (int c = 0; c < 2; ++c) {
    if (!by_class[c].empty() && by_class[c].size() < static_cast<std::size_t>(k))
      throw ConfigError("stratified_kfold: class " + std::to_string(c) + " has " +
                        std::to_string(by_class[c].size()) + " members, need >= " +
                        std::to_string(k));
  }

  std::vector<std::size_t> fold_of(n, 0);
  for (int c = 0; c < 2; ++c) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(c)));
    rng.shuffle(by_class[c]);
    for (std::size_t i = 0; i < by_class[c].size(); ++i)
      fold_of[by_class[c][i]] = i % static_cast<std::size_t>(k);
  }

  std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> folds(
      static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < static_cast<std::size_t>(k); ++f)
      (fold_of[i] == f ? folds[f].second : folds[f].first).push_back(i);
  return folds;
}

std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> stratified_kfold(
    const Dataset& dataset, int k, std::uint64_t seed) {
  return stratified_kfold(std::span<const std::uint8_t>(dataset.labels), k, seed);
}

std::vector<std::size_t> bootstrap_sample(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ConfigError("bootstrap_sample: n must be >= 1");
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.uniform_index(n);
  return out;
}

}  // namespace fairtree
