#include "fairtree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "fairtree/error.hpp"
#include "fairtree/rng.hpp"

namespace fairtree {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Per-side tallies for one candidate split. All counts are exact in
// double for direct use in the closed-form AUC/entropy expressions.
struct SideCounts {
  double n = 0.0;
  double pos = 0.0;
  std::vector<double> grp;      // group member count, per OvR group
  std::vector<double> pos_grp;  // positive-label members of each group
};

// AUC of a two-valued score assignment from pair counts: `hi_p`/`hi_n`
// are positive/negative counts on the higher-scored side. Degenerate
// (single-class) input is the neutral 0.5.
double counts_auc(double hi_p, double hi_n, double lo_p, double lo_n) {
  const double p = hi_p + lo_p;
  const double n = hi_n + lo_n;
  if (p == 0.0 || n == 0.0) return 0.5;
  return (hi_p * lo_n + 0.5 * (hi_p * hi_n + lo_p * lo_n)) / (p * n);
}

double counts_disc(double n, double pos, double g, double pos_g) {
  const double ng = n - g;
  if (g == 0.0 || ng == 0.0) return 0.0;
  return std::fabs(pos_g / g - (pos - pos_g) / ng);
}

double counts_entropy(double n, double pos) {
  return entropy_from_counts(pos, n - pos);
}

SplitEvaluation score_from_counts(const SideCounts& total, const SideCounts& left,
                                  const SplitCriterion& criterion) {
  SplitEvaluation eval;
  eval.auc_y_child = kNaN;
  eval.auc_s_child_max = kNaN;
  eval.ig_y = kNaN;
  eval.ig_s = kNaN;
  eval.fg = kNaN;

  const double n = total.n;
  const double n_l = left.n;
  const double n_r = n - n_l;
  const double pos_l = left.pos;
  const double pos_r = total.pos - left.pos;

  if (criterion.kind == CriterionKind::Scaff || criterion.kind == CriterionKind::AucOnly) {
    const double p_l = pos_l / n_l;
    const double p_r = pos_r / n_r;
    double auc_y;
    double auc_s_max = 0.5;
    if (p_l == p_r) {
      // Children score identically: the child assignment is constant in
      // AUC terms, exactly like the parent.
      auc_y = 0.5;
    } else {
      const bool right_hi = p_r > p_l;
      const double hi_pos = right_hi ? pos_r : pos_l;
      const double hi_neg = (right_hi ? n_r : n_l) - hi_pos;
      const double lo_pos = right_hi ? pos_l : pos_r;
      const double lo_neg = (right_hi ? n_l : n_r) - lo_pos;
      auc_y = counts_auc(hi_pos, hi_neg, lo_pos, lo_neg);
      for (std::size_t g = 0; g < total.grp.size(); ++g) {
        const double g_l = left.grp[g];
        const double g_r = total.grp[g] - g_l;
        const double hi_g = right_hi ? g_r : g_l;
        const double hi_og = (right_hi ? n_r : n_l) - hi_g;
        const double lo_g = right_hi ? g_l : g_r;
        const double lo_og = (right_hi ? n_l : n_r) - lo_g;
        const double u = counts_auc(hi_g, hi_og, lo_g, lo_og);
        auc_s_max = std::max(auc_s_max, std::max(u, 1.0 - u));
      }
    }
    eval.auc_y_child = auc_y;
    if (criterion.kind == CriterionKind::AucOnly) {
      eval.gain = auc_y - 0.5;
    } else {
      eval.auc_s_child_max = auc_s_max;
      const double theta = criterion.theta;
      // Parent scores are constant on the node, so SCAFF(parent) is the
      // all-tie value 0.5 - theta.
      eval.gain = (1.0 - theta) * auc_y - theta * auc_s_max - (0.5 - theta);
    }
    return eval;
  }

  // Baselines: single binary sensitive group (index 0).
  const double w_l = n_l / n;
  const double w_r = n_r / n;
  const double ig_y = counts_entropy(n, total.pos) - w_l * counts_entropy(n_l, pos_l) -
                      w_r * counts_entropy(n_r, pos_r);
  eval.ig_y = ig_y;
  const double g_total = total.grp[0];
  const double g_l = left.grp[0];
  const double g_r = g_total - g_l;

  switch (criterion.kind) {
    case CriterionKind::KamiranSub:
    case CriterionKind::KamiranDiv: {
      const double ig_s = counts_entropy(n, g_total) - w_l * counts_entropy(n_l, g_l) -
                          w_r * counts_entropy(n_r, g_r);
      eval.ig_s = ig_s;
      eval.gain = criterion.kind == CriterionKind::KamiranSub ? kamiran_sub(ig_y, ig_s)
                                                              : kamiran_div(ig_y, ig_s);
      return eval;
    }
    case CriterionKind::Faht: {
      const double pg_l = left.pos_grp[0];
      const double pg_r = total.pos_grp[0] - pg_l;
      const double fg = counts_disc(n, total.pos, g_total, total.pos_grp[0]) -
                        w_l * counts_disc(n_l, pos_l, g_l, pg_l) -
                        w_r * counts_disc(n_r, pos_r, g_r, pg_r);
      eval.fg = fg;
      eval.gain = faht(ig_y, fg);
      return eval;
    }
    default:
      throw std::logic_error("score_from_counts: unreachable criterion");
  }
}

void check_criterion_vs_view(const SplitCriterion& criterion, const Dataset& dataset) {
  if (criterion.is_baseline() && dataset.sensitive.groups.size() != 1)
    throw ConfigError("criterion " + criterion.to_string() +
                      " supports a single binary sensitive attribute (got " +
                      std::to_string(dataset.sensitive.groups.size()) + " OvR groups)");
  if (dataset.sensitive.groups.empty())
    throw ConfigError("dataset has no retained sensitive groups");
}

SideCounts tally(std::span<const std::size_t> samples, const Dataset& dataset) {
  const std::size_t n_groups = dataset.sensitive.groups.size();
  SideCounts counts;
  counts.grp.assign(n_groups, 0.0);
  counts.pos_grp.assign(n_groups, 0.0);
  counts.n = static_cast<double>(samples.size());
  for (std::size_t i : samples) {
    const bool pos = dataset.labels[i] != 0;
    if (pos) counts.pos += 1.0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (dataset.sensitive.groups[g].mask[i]) {
        counts.grp[g] += 1.0;
        if (pos) counts.pos_grp[g] += 1.0;
      }
    }
  }
  return counts;
}

// Split search over one node. Histograms each feature's ordinals once,
// then scans boundaries between occupied bins.
struct BestSplit {
  bool any_candidate = false;
  double gain = -std::numeric_limits<double>::infinity();
  int feature = -1;
  int threshold = 0;
};

BestSplit search_splits(std::span<const std::size_t> samples, const Dataset& dataset,
                        std::span<const int> feature_subset, const SplitCriterion& criterion,
                        int min_samples_leaf) {
  const std::size_t n_groups = dataset.sensitive.groups.size();
  const SideCounts total = tally(samples, dataset);

  BestSplit best;
  std::vector<double> cnt, pos;
  std::vector<std::vector<double>> grp(n_groups), pos_grp(n_groups);
  SideCounts left;
  left.grp.assign(n_groups, 0.0);
  left.pos_grp.assign(n_groups, 0.0);

  for (int f : feature_subset) {
    const auto& column = dataset.columns[static_cast<std::size_t>(f)];
    const std::size_t bins = static_cast<std::size_t>(dataset.n_bins[static_cast<std::size_t>(f)]);
    cnt.assign(bins, 0.0);
    pos.assign(bins, 0.0);
    for (std::size_t g = 0; g < n_groups; ++g) {
      grp[g].assign(bins, 0.0);
      pos_grp[g].assign(bins, 0.0);
    }
    for (std::size_t i : samples) {
      const auto b = static_cast<std::size_t>(column[i]);
      cnt[b] += 1.0;
      const bool is_pos = dataset.labels[i] != 0;
      if (is_pos) pos[b] += 1.0;
      for (std::size_t g = 0; g < n_groups; ++g) {
        if (dataset.sensitive.groups[g].mask[i]) {
          grp[g][b] += 1.0;
          if (is_pos) pos_grp[g][b] += 1.0;
        }
      }
    }

    left.n = 0.0;
    left.pos = 0.0;
    std::fill(left.grp.begin(), left.grp.end(), 0.0);
    std::fill(left.pos_grp.begin(), left.pos_grp.end(), 0.0);
    for (std::size_t b = 0; b < bins; ++b) {
      if (cnt[b] == 0.0) continue;
      left.n += cnt[b];
      left.pos += pos[b];
      for (std::size_t g = 0; g < n_groups; ++g) {
        left.grp[g] += grp[g][b];
        left.pos_grp[g] += pos_grp[g][b];
      }
      const double right_n = total.n - left.n;
      if (right_n == 0.0) break;  // past the last occupied ordinal
      if (left.n < min_samples_leaf || right_n < min_samples_leaf) continue;
      best.any_candidate = true;
      const SplitEvaluation eval = score_from_counts(total, left, criterion);
      if (eval.gain > best.gain) {
        best.gain = eval.gain;
        best.feature = f;
        best.threshold = static_cast<int>(b);
      }
    }
  }
  return best;
}

struct Grower {
  const Dataset& dataset;
  const TreeConfig& config;
  Rng rng;
  int features_per_split;

  Grower(const Dataset& ds, const TreeConfig& cfg)
      : dataset(ds), config(cfg), rng(cfg.seed) {
    features_per_split = cfg.features_per_split;
    const int m = static_cast<int>(ds.m());
    if (features_per_split <= 0)
      features_per_split = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m))));
    features_per_split = std::min(features_per_split, m);
  }

  std::vector<int> draw_feature_subset() {
    const int m = static_cast<int>(dataset.m());
    if (features_per_split >= m) {
      std::vector<int> all(static_cast<std::size_t>(m));
      std::iota(all.begin(), all.end(), 0);
      return all;
    }
    std::vector<int> pool(static_cast<std::size_t>(m));
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < features_per_split; ++i) {
      const std::size_t j =
          static_cast<std::size_t>(i) + rng.uniform_index(static_cast<std::size_t>(m - i));
      std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    std::vector<int> subset(pool.begin(), pool.begin() + features_per_split);
    std::sort(subset.begin(), subset.end());
    return subset;
  }

  std::unique_ptr<TreeNode> build(std::vector<std::size_t> samples, int depth) {
    auto node = std::make_unique<TreeNode>();
    node->n_samples = samples.size();
    std::size_t n_pos = 0;
    for (std::size_t i : samples) n_pos += dataset.labels[i] ? 1 : 0;
    node->p_pos = static_cast<double>(n_pos) / static_cast<double>(samples.size());

    if (depth >= config.max_depth) {
      node->reason = LeafReason::DepthCapped;
      return node;
    }
    const std::vector<int> subset = draw_feature_subset();
    const BestSplit best = search_splits(samples, dataset, subset, config.criterion,
                                         config.min_samples_leaf);
    if (!best.any_candidate) {
      node->reason = LeafReason::NoCandidates;
      node->gain = 0.0;
      return node;
    }
    if (!(best.gain > 0.0)) {
      node->reason = LeafReason::NoPositiveGain;
      node->gain = best.gain;
      return node;
    }

    node->is_leaf = false;
    node->feature = best.feature;
    node->threshold = best.threshold;
    node->gain = best.gain;
    const auto& column = dataset.columns[static_cast<std::size_t>(best.feature)];
    std::vector<std::size_t> left_samples, right_samples;
    for (std::size_t i : samples)
      (column[i] <= best.threshold ? left_samples : right_samples).push_back(i);
    samples.clear();
    samples.shrink_to_fit();
    node->left = build(std::move(left_samples), depth + 1);
    node->right = build(std::move(right_samples), depth + 1);
    return node;
  }
};

}  // namespace

std::vector<SplitCandidate> enumerate_splits(std::span<const std::size_t> samples,
                                             const Dataset& dataset,
                                             std::span<const int> feature_subset,
                                             int min_samples_leaf) {
  std::vector<SplitCandidate> candidates;
  std::vector<std::size_t> cnt;
  for (int f : feature_subset) {
    const auto& column = dataset.columns[static_cast<std::size_t>(f)];
    cnt.assign(static_cast<std::size_t>(dataset.n_bins[static_cast<std::size_t>(f)]), 0);
    for (std::size_t i : samples) ++cnt[static_cast<std::size_t>(column[i])];
    std::size_t left_n = 0;
    for (std::size_t b = 0; b < cnt.size(); ++b) {
      if (cnt[b] == 0) continue;
      left_n += cnt[b];
      const std::size_t right_n = samples.size() - left_n;
      if (right_n == 0) break;
      if (left_n < static_cast<std::size_t>(min_samples_leaf) ||
          right_n < static_cast<std::size_t>(min_samples_leaf))
        continue;
      candidates.push_back({f, static_cast<int>(b)});
    }
  }
  return candidates;
}

SplitEvaluation evaluate_split(const SplitCandidate& candidate,
                               std::span<const std::size_t> samples, const Dataset& dataset,
                               const SplitCriterion& criterion) {
  check_criterion_vs_view(criterion, dataset);
  const SideCounts total = tally(samples, dataset);
  const std::size_t n_groups = dataset.sensitive.groups.size();
  SideCounts left;
  left.grp.assign(n_groups, 0.0);
  left.pos_grp.assign(n_groups, 0.0);
  const auto& column = dataset.columns[static_cast<std::size_t>(candidate.feature)];
  for (std::size_t i : samples) {
    if (column[i] > candidate.threshold) continue;
    left.n += 1.0;
    const bool pos = dataset.labels[i] != 0;
    if (pos) left.pos += 1.0;
    for (std::size_t g = 0; g < n_groups; ++g) {
      if (dataset.sensitive.groups[g].mask[i]) {
        left.grp[g] += 1.0;
        if (pos) left.pos_grp[g] += 1.0;
      }
    }
  }
  if (left.n == 0.0 || left.n == total.n)
    throw std::logic_error("evaluate_split: candidate does not produce two nonempty children");
  return score_from_counts(total, left, criterion);
}

std::unique_ptr<TreeNode> grow(const Dataset& dataset, std::vector<std::size_t> samples,
                               const TreeConfig& config) {
  if (samples.empty()) throw std::logic_error("grow: empty sample set");
  if (config.max_depth < 1) throw ConfigError("tree: max_depth must be >= 1");
  if (config.min_samples_leaf < 1) throw ConfigError("tree: min_samples_leaf must be >= 1");
  if (config.features_per_split > static_cast<int>(dataset.m()))
    throw ConfigError("tree: features_per_split exceeds feature count");
  check_criterion_vs_view(config.criterion, dataset);
  Grower grower(dataset, config);
  return grower.build(std::move(samples), 0);
}

double predict_row(const TreeNode& tree, std::span<const int> row) {
  const TreeNode* node = &tree;
  while (!node->is_leaf) {
    if (static_cast<std::size_t>(node->feature) >= row.size())
      throw DataError("predict: row has too few features");
    node = row[static_cast<std::size_t>(node->feature)] <= node->threshold ? node->left.get()
                                                                           : node->right.get();
  }
  return node->p_pos;
}

std::vector<double> predict_scores(const TreeNode& tree, const Dataset& dataset,
                                   std::span<const std::size_t> rows) {
  std::vector<double> scores;
  scores.reserve(rows.size());
  for (std::size_t i : rows) {
    const TreeNode* node = &tree;
    while (!node->is_leaf) {
      node = dataset.columns[static_cast<std::size_t>(node->feature)][i] <= node->threshold
                 ? node->left.get()
                 : node->right.get();
    }
    scores.push_back(node->p_pos);
  }
  return scores;
}

namespace {

const char* reason_name(LeafReason reason) {
  switch (reason) {
    case LeafReason::DepthCapped:
      return "depth_capped";
    case LeafReason::NoCandidates:
      return "no_candidates";
    case LeafReason::NoPositiveGain:
      return "no_positive_gain";
  }
  return "unknown";
}

LeafReason reason_from_name(const std::string& name) {
  if (name == "depth_capped") return LeafReason::DepthCapped;
  if (name == "no_candidates") return LeafReason::NoCandidates;
  if (name == "no_positive_gain") return LeafReason::NoPositiveGain;
  throw DataError("tree json: unknown leaf reason \"" + name + "\"");
}

json node_to_json(const TreeNode& node) {
  json j;
  if (node.is_leaf) {
    j["p_pos"] = node.p_pos;
    j["n"] = node.n_samples;
    j["reason"] = reason_name(node.reason);
    j["best_gain"] = node.gain;
  } else {
    j["feature"] = node.feature;
    j["threshold"] = node.threshold;
    j["gain"] = node.gain;
    j["n"] = node.n_samples;
    j["left"] = node_to_json(*node.left);
    j["right"] = node_to_json(*node.right);
  }
  return j;
}

std::unique_ptr<TreeNode> node_from_json(const json& j) {
  auto node = std::make_unique<TreeNode>();
  if (j.contains("feature")) {
    node->is_leaf = false;
    node->feature = j.at("feature").get<int>();
    node->threshold = j.at("threshold").get<int>();
    node->gain = j.at("gain").get<double>();
    node->n_samples = j.at("n").get<std::size_t>();
    node->left = node_from_json(j.at("left"));
    node->right = node_from_json(j.at("right"));
  } else {
    node->is_leaf = true;
    node->p_pos = j.at("p_pos").get<double>();
    node->n_samples = j.at("n").get<std::size_t>();
    node->reason = reason_from_name(j.at("reason").get<std::string>());
    node->gain = j.value("best_gain", 0.0);
  }
  return node;
}

void audit_node(const TreeNode& node, int depth, int max_depth, TreeAudit* audit) {
  if (node.is_leaf) {
    if (depth > max_depth) {
      audit->ok = false;
      audit->problems.push_back("leaf deeper than max_depth");
    }
    switch (node.reason) {
      case LeafReason::DepthCapped:
        if (depth != max_depth) {
          audit->ok = false;
          audit->problems.push_back("depth-capped leaf not at max depth");
        }
        break;
      case LeafReason::NoPositiveGain:
        if (node.gain > 0.0) {
          audit->ok = false;
          audit->problems.push_back("no-positive-gain leaf records positive best gain");
        }
        break;
      case LeafReason::NoCandidates:
        break;
    }
    if (node.n_samples == 0) {
      audit->ok = false;
      audit->problems.push_back("empty leaf");
    }
    return;
  }
  if (!(node.gain > 0.0)) {
    audit->ok = false;
    audit->problems.push_back("internal split with non-positive gain");
  }
  if (!node.left || !node.right) {
    audit->ok = false;
    audit->problems.push_back("internal node missing a child");
    return;
  }
  if (node.left->n_samples + node.right->n_samples != node.n_samples) {
    audit->ok = false;
    audit->problems.push_back("child sample counts do not sum to parent");
  }
  audit_node(*node.left, depth + 1, max_depth, audit);
  audit_node(*node.right, depth + 1, max_depth, audit);
}

}  // namespace

std::string tree_to_json_string(const TreeNode& tree) { return node_to_json(tree).dump(); }

std::unique_ptr<TreeNode> tree_from_json_string(const std::string& text) {
  return node_from_json(json::parse(text));
}

TreeAudit validate_tree(const TreeNode& tree, const TreeConfig& config) {
  TreeAudit audit;
  audit_node(tree, 0, config.max_depth, &audit);
  return audit;
}

}  // namespace fairtree
