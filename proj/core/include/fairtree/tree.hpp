#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fairtree/criteria.hpp"
#include "fairtree/dataset.hpp"

namespace fairtree {

enum class LeafReason { DepthCapped, NoCandidates, NoPositiveGain };

// Either an internal split (left receives ordinals <= threshold) or a
// leaf scoring P(Y+) of its training samples.
struct TreeNode {
  bool is_leaf = true;

  // split fields
  int feature = -1;
  int threshold = 0;
  double gain = 0.0;  // split: selected gain; leaf: best rejected gain
  std::unique_ptr<TreeNode> left;
  std::unique_ptr<TreeNode> right;

  // leaf fields
  double p_pos = 0.0;
  std::size_t n_samples = 0;
  LeafReason reason = LeafReason::DepthCapped;
};

struct TreeConfig {
  int max_depth = 4;  // counted in edges; root at depth 0
  SplitCriterion criterion;
  int min_samples_leaf = 1;
  int features_per_split = 0;  // 0 = ceil(sqrt(m))
  std::uint64_t seed = 0;
};

struct SplitCandidate {
  int feature = -1;
  int threshold = 0;
};

// One candidate per boundary between adjacent occupied ordinals of each
// feature in the subset; candidates leaving a child smaller than
// min_samples_leaf are excluded.
std::vector<SplitCandidate> enumerate_splits(std::span<const std::size_t> samples,
                                             const Dataset& dataset,
                                             std::span<const int> feature_subset,
                                             int min_samples_leaf);

// Scores one candidate on the node's samples only. For SCAFF the parent
// term uses the node's constant score, the child term the two leaf
// probabilities the split would induce; baselines use their entropy and
// discrimination formulas over the same samples.
SplitEvaluation evaluate_split(const SplitCandidate& candidate,
                               std::span<const std::size_t> samples, const Dataset& dataset,
                               const SplitCriterion& criterion);

std::unique_ptr<TreeNode> grow(const Dataset& dataset, std::vector<std::size_t> samples,
                               const TreeConfig& config);

double predict_row(const TreeNode& tree, std::span<const int> row);
std::vector<double> predict_scores(const TreeNode& tree, const Dataset& dataset,
                                   std::span<const std::size_t> rows);

std::string tree_to_json_string(const TreeNode& tree);
std::unique_ptr<TreeNode> tree_from_json_string(const std::string& text);

struct TreeAudit {
  bool ok = true;
  std::vector<std::string> problems;
};

// Walks a fitted tree: every internal split must record strictly
// positive gain; every leaf must be depth-capped, candidate-exhausted,
// or max-gain-nonpositive; sample counts must be consistent.
TreeAudit validate_tree(const TreeNode& tree, const TreeConfig& config);

}  // namespace fairtree
