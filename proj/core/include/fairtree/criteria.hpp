#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fairtree/dataset.hpp"

namespace fairtree {

enum class CriterionKind {
  Scaff,       // (1-theta)*AUC_Y - theta*AUC_S_max
  AucOnly,     // plain AUC_Y; the theta=0 reference
  KamiranSub,  // IG_Y - IG_S
  KamiranDiv,  // IG_Y / max(IG_S, eps)
  Faht,        // IG_Y if FG == 0 else IG_Y * FG
};

struct SplitCriterion {
  CriterionKind kind = CriterionKind::Scaff;
  double theta = 0.0;  // orthogonality, only meaningful for Scaff

  // Parses "scaff:<theta>", "scaff" (theta 0), "auc", "kamiran-sub",
  // "kamiran-div", "faht". Throws ConfigError on anything else.
  static SplitCriterion parse(const std::string& text);
  std::string to_string() const;

  bool is_baseline() const {
    return kind == CriterionKind::KamiranSub || kind == CriterionKind::KamiranDiv ||
           kind == CriterionKind::Faht;
  }
};

// Criterion value plus the intermediate quantities that produced it.
// Fields not applicable to the active criterion are NaN.
struct SplitEvaluation {
  double gain = 0.0;
  double auc_y_child = 0.0;
  double auc_s_child_max = 0.0;
  double ig_y = 0.0;
  double ig_s = 0.0;
  double fg = 0.0;
};

// Binary entropy of a 0/1 vector, in bits; 0*log(0) := 0.
double entropy(std::span<const std::uint8_t> bits);
double entropy_from_counts(double ones, double zeros);

// H(parent) - sum |D_i|/|D| H(D_i). Children must partition the parent
// by size or a logic error is thrown.
double info_gain(std::span<const std::uint8_t> parent,
                 const std::vector<std::vector<std::uint8_t>>& children);

double kamiran_sub(double ig_y, double ig_s);
double kamiran_div(double ig_y, double ig_s);

// |P(Y+|S+) - P(Y+|S-)| on one set; 0 when a group side is empty.
double discrimination(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> mask);

// Disc(parent) - sum |D_i|/|D| Disc(D_i).
double fairness_gain(std::span<const std::uint8_t> parent_labels,
                     std::span<const std::uint8_t> parent_mask,
                     const std::vector<std::vector<std::uint8_t>>& children_labels,
                     const std::vector<std::vector<std::uint8_t>>& children_masks);

double faht(double ig_y, double fg);

double scaff_score(std::span<const double> z, std::span<const std::uint8_t> labels,
                   const SensitiveView& view, double theta);

// SCAFF(z_child) - SCAFF(z_parent) over the same sample set.
double scaff_gain(std::span<const double> z_parent, std::span<const double> z_child,
                  std::span<const std::uint8_t> labels, const SensitiveView& view, double theta);

}  // namespace fairtree
