#include "fairtree/criteria.hpp"

#include <cmath>
#include <cstdio>

#include "fairtree/error.hpp"
#include "fairtree/metrics.hpp"

namespace fairtree {

SplitCriterion SplitCriterion::parse(const std::string& text) {
  SplitCriterion criterion;
  if (text == "auc") {
    criterion.kind = CriterionKind::AucOnly;
    return criterion;
  }
  if (text == "kamiran-sub") {
    criterion.kind = CriterionKind::KamiranSub;
    return criterion;
  }
  if (text == "kamiran-div") {
    criterion.kind = CriterionKind::KamiranDiv;
    return criterion;
  }
  if (text == "faht") {
    criterion.kind = CriterionKind::Faht;
    return criterion;
  }
  if (text == "scaff") {
    criterion.kind = CriterionKind::Scaff;
    criterion.theta = 0.0;
    return criterion;
  }
  if (text.rfind("scaff:", 0) == 0) {
    criterion.kind = CriterionKind::Scaff;
    char* end = nullptr;
    const std::string arg = text.substr(6);
    criterion.theta = std::strtod(arg.c_str(), &end);
    if (end == arg.c_str() || *end != '\0' || !(criterion.theta >= 0.0 && criterion.theta <= 1.0))
      throw ConfigError("criterion: theta must be a number in [0,1], got \"" + arg + "\"");
    return criterion;
  }
  throw ConfigError("unknown criterion \"" + text +
                    "\" (expected scaff[:theta], auc, kamiran-sub, kamiran-div, faht)");
}

std::string SplitCriterion::to_string() const {
  switch (kind) {
    case CriterionKind::AucOnly:
      return "auc";
    case CriterionKind::KamiranSub:
      return "kamiran-sub";
    case CriterionKind::KamiranDiv:
      return "kamiran-div";
    case CriterionKind::Faht:
      return "faht";
    case CriterionKind::Scaff:
      break;
  }
  char buf[48];
  std::snprintf(buf, sizeof buf, "scaff:%g", theta);
  return buf;
}

double entropy_from_counts(double ones, double zeros) {
  const double total = ones + zeros;
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c : {ones, zeros}) {
    if (c > 0.0) {
      const double p = c / total;
      h -= p * std::log2(p);
    }
  }
  return h;
}

double entropy(std::span<const std::uint8_t> bits) {
  if (bits.empty()) return 0.0;
  std::size_t ones = 0;
  for (std::uint8_t b : bits) ones += b ? 1 : 0;
  return entropy_from_counts(static_cast<double>(ones), static_cast<double>(bits.size() - ones));
}

double info_gain(std::span<const std::uint8_t> parent,
                 const std::vector<std::vector<std::uint8_t>>& children) {
  std::size_t total = 0;
  for (const auto& child : children) total += child.size();
  if (total != parent.size()) throw std::logic_error("info_gain: children do not partition parent");
  double h = entropy(parent);
  for (const auto& child : children)
    h -= (static_cast<double>(child.size()) / static_cast<double>(parent.size())) *
         entropy(std::span<const std::uint8_t>(child));
  return h;
}

double kamiran_sub(double ig_y, double ig_s) { return ig_y - ig_s; }

double kamiran_div(double ig_y, double ig_s) {
  // IG_S = 0 is undefined in the source formulation; the floor keeps
  // fair splits maximally rewarded while staying finite.
  constexpr double kEps = 1e-6;
  return ig_y / std::max(ig_s, kEps);
}

double discrimination(std::span<const std::uint8_t> labels, std::span<const std::uint8_t> mask) {
  std::size_t in = 0, in_pos = 0, out = 0, out_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (mask[i]) {
      ++in;
      in_pos += labels[i] ? 1 : 0;
    } else {
      ++out;
      out_pos += labels[i] ? 1 : 0;
    }
  }
  // A set lacking one group cannot exhibit between-group disparity.
  if (in == 0 || out == 0) return 0.0;
  return std::fabs(static_cast<double>(in_pos) / in - static_cast<double>(out_pos) / out);
}

double fairness_gain(std::span<const std::uint8_t> parent_labels,
                     std::span<const std::uint8_t> parent_mask,
                     const std::vector<std::vector<std::uint8_t>>& children_labels,
                     const std::vector<std::vector<std::uint8_t>>& children_masks) {
  if (children_labels.size() != children_masks.size())
    throw std::logic_error("fairness_gain: children label/mask count mismatch");
  std::size_t total = 0;
  for (const auto& child : children_labels) total += child.size();
  if (total != parent_labels.size())
    throw std::logic_error("fairness_gain: children do not partition parent");

  double fg = discrimination(parent_labels, parent_mask);
  for (std::size_t i = 0; i < children_labels.size(); ++i) {
    if (children_labels[i].size() != children_masks[i].size())
      throw std::logic_error("fairness_gain: child label/mask length mismatch");
    fg -= (static_cast<double>(children_labels[i].size()) /
           static_cast<double>(parent_labels.size())) *
          discrimination(std::span<const std::uint8_t>(children_labels[i]),
                         std::span<const std::uint8_t>(children_masks[i]));
  }
  return fg;
}

double faht(double ig_y, double fg) { return fg == 0.0 ? ig_y : ig_y * fg; }

double scaff_score(std::span<const double> z, std::span<const std::uint8_t> labels,
                   const SensitiveView& view, double theta) {
  const double auc_y = auc(z, labels);
  const double auc_s = ovr_sensitive_auc(z, view).max;
  return (1.0 - theta) * auc_y - theta * auc_s;
}

double scaff_gain(std::span<const double> z_parent, std::span<const double> z_child,
                  std::span<const std::uint8_t> labels, const SensitiveView& view,
                  double theta) {
  if (z_parent.size() != z_child.size())
    throw std::logic_error("scaff_gain: score vector length mismatch");
  return scaff_score(z_child, labels, view, theta) - scaff_score(z_parent, labels, view, theta);
}

}  // namespace fairtree
