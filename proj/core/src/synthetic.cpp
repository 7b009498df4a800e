#include "fairtree/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

void validate(const SyntheticConfig& config) {
  if (config.n < 20) throw ConfigError("synthetic: n must be >= 20");
  if (!(config.bias_strength >= 0.0 && config.bias_strength <= 1.0))
    throw ConfigError("synthetic: bias_strength must be in [0,1]");
  if (!(config.signal_strength >= 0.0 && config.signal_strength <= 1.0))
    throw ConfigError("synthetic: signal_strength must be in [0,1]");
  if (config.n_groups < 2) throw ConfigError("synthetic: n_groups must be >= 2");
  if (config.n_signal_features < 1 || config.n_proxy_features < 0 ||
      config.n_noise_features < 0)
    throw ConfigError("synthetic: invalid feature counts");
}

}  // namespace

SyntheticData generate_synthetic_raw(const SyntheticConfig& config) {
  validate(config);
  Rng rng(config.seed);

  SyntheticData data;
  data.n_groups = config.n_groups;
  const int m = config.n_signal_features + config.n_proxy_features + config.n_noise_features;
  data.columns.assign(static_cast<std::size_t>(m), {});
  for (auto& column : data.columns) column.reserve(config.n);
  for (int k = 0; k < config.n_signal_features; ++k)
    data.feature_names.push_back("sig" + std::to_string(k));
  for (int k = 0; k < config.n_proxy_features; ++k)
    data.feature_names.push_back("prox" + std::to_string(k));
  for (int k = 0; k < config.n_noise_features; ++k)
    data.feature_names.push_back("noise" + std::to_string(k));

  const double signal = config.signal_strength;
  const double bias = config.bias_strength;
  // Measurement noise on the label-informative columns shrinks as the
  // signal strengthens, so signal=1 is Bayes-separable from the
  // features and signal=0 leaves the label a pure coin flip.
  const double measurement_sd = 1.0 - 0.75 * signal;

  for (std::size_t i = 0; i < config.n; ++i) {
    const int g = static_cast<int>(rng.uniform_index(static_cast<std::size_t>(config.n_groups)));
    // Two group-offset channels so that every group, not just the
    // extreme ones, is strongly marked in some proxy column: the first
    // spreads groups evenly over [-1, 1], the second alternates sign.
    const double off_even = 2.0 * g / (config.n_groups - 1) - 1.0;
    const double off_odd = g % 2 == 0 ? -1.0 : 1.0;
    const double latent = rng.normal();
    const double label_noise = rng.normal();
    // The label depends on the latent signal only: group bias is
    // avoidable in principle, entering through the proxy columns below.
    const std::uint8_t y = (signal * latent + (1.0 - signal) * label_noise) > 0.0 ? 1 : 0;

    data.group_ids.push_back(g);
    data.labels.push_back(y);
    std::size_t c = 0;
    for (int k = 0; k < config.n_signal_features; ++k)
      data.columns[c++].push_back(latent + measurement_sd * rng.normal());
    // Proxies are confounded measurements: label-informative through
    // the latent but shifted per group, so an unconstrained learner
    // exploits them and inherits the shift, while a fairness-aware one
    // can fall back on the clean columns.
    for (int k = 0; k < config.n_proxy_features; ++k) {
      const double off = k % 2 == 0 ? off_even : off_odd;
      data.columns[c++].push_back(latent + 2.75 * bias * off + 0.2 * rng.normal());
    }
    for (int k = 0; k < config.n_noise_features; ++k)
      data.columns[c++].push_back(rng.normal());
  }
  return data;
}

Dataset synthetic_to_dataset(const SyntheticData& data, int bins) {
  Dataset ds;
  ds.labels = data.labels;
  ds.feature_names = data.feature_names;
  for (const auto& column : data.columns) {
    auto [ordinals, boundaries] = discretize(column, bins);
    ds.columns.push_back(std::move(ordinals));
    ds.n_bins.push_back(static_cast<int>(boundaries.size()) + 2);
  }

  const std::size_t n = data.labels.size();
  const bool binary = data.n_groups == 2;
  for (int g = 0; g < data.n_groups; ++g) {
    GroupMask group;
    group.attribute = "group";
    group.category = "g" + std::to_string(g);
    group.mask.reserve(n);
    for (std::size_t i = 0; i < n; ++i) group.mask.push_back(data.group_ids[i] == g ? 1 : 0);
    group.s_plus = 0;
    for (std::uint8_t b : group.mask) group.s_plus += b;
    group.s_minus = n - group.s_plus;
    if (group.s_plus == 0 || group.s_minus == 0) {
      ds.sensitive.warnings.push_back("sensitive group group=" + group.category +
                                      " is degenerate; dropped");
      continue;
    }
    ds.sensitive.groups.push_back(std::move(group));
    if (binary) break;
  }
  if (ds.sensitive.groups.empty()) throw DataError("synthetic: all sensitive groups degenerate");
  return ds;
}

Dataset generate_synthetic(const SyntheticConfig& config, int bins) {
  return synthetic_to_dataset(generate_synthetic_raw(config), bins);
}

void write_synthetic_csv(const SyntheticData& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  for (const auto& name : data.feature_names) out << name << ",";
  out << "group,y\n";
  char buf[40];
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    for (const auto& column : data.columns) {
      std::snprintf(buf, sizeof buf, "%.17g", column[i]);
      out << buf << ",";
    }
    out << "g" << data.group_ids[i] << "," << int(data.labels[i]) << "\n";
  }
}

DataConfig synthetic_data_config(int bins) {
  DataConfig config;
  config.label_column = "y";
  config.positive_label = "1";
  config.sensitive_columns = {"group"};
  config.sensitive_mode = SensitiveMode::PerAttribute;
  config.bins = bins;
  return config;
}

}  // namespace fairtree
