#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairtree/dataset.hpp"

namespace fairtree {

// ROC-AUC with the half-credit tie rule, computed by tied-rank
// summation in O(n log n). Exactly equals the pairwise mean of
// sigma(z_i, z_j) over positive/negative pairs. Degenerate input
// (a single class) returns the neutral 0.5.
double auc(std::span<const double> z, std::span<const std::uint8_t> labels);

// max(u, 1-u) where u is the AUC with the group mask as positive
// class. Range [0.5, 1]; 0.5 means strong demographic parity holds on
// this sample, 1 means maximal bias.
double sensitive_auc(std::span<const double> z, std::span<const std::uint8_t> mask);

struct OvrAucResult {
  double max = 0.5;
  std::vector<std::pair<std::string, double>> per_group;  // (attribute=category, value)
};

// Sensitive AUC for every retained OvR group plus their maximum.
OvrAucResult ovr_sensitive_auc(std::span<const double> z, const SensitiveView& view);

// |P(z >= t | S+) - P(z >= t | S-)|. Returns 0 when either group side
// is empty.
double demographic_parity(std::span<const double> z, std::span<const std::uint8_t> mask, double t);

// TPR gap between groups at threshold t; absent when a conditioning
// cell is empty.
std::optional<double> equal_opportunity(std::span<const double> z,
                                        std::span<const std::uint8_t> mask,
                                        std::span<const std::uint8_t> labels, double t);

struct OddsGaps {
  std::optional<double> tpr_gap;
  std::optional<double> fpr_gap;
};

OddsGaps equalized_odds(std::span<const double> z, std::span<const std::uint8_t> mask,
                        std::span<const std::uint8_t> labels, double t);

// Empirical (nearest-rank) quantiles of z; nondecreasing output.
std::vector<double> quantile_thresholds(std::span<const double> z,
                                        std::span<const double> quantiles);

struct PearsonResult {
  double r = 0.0;
  double p = 1.0;  // two-sided, Student-t with n-2 degrees of freedom
};

// Throws DataError on zero variance or n < 3.
PearsonResult pearson(std::span<const double> x, std::span<const double> y);

// Regularized incomplete beta I_x(a, b); used for the exact t-test
// p-value and exposed for tests.
double regularized_incomplete_beta(double a, double b, double x);

}  // namespace fairtree
