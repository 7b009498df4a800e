#include "fairtree/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>

#include "fairtree/error.hpp"

namespace fairtree {

double auc(std::span<const double> z, std::span<const std::uint8_t> labels) {
  const std::size_t n = z.size();
  if (labels.size() != n) throw std::logic_error("auc: length mismatch");
  std::size_t n_pos = 0;
  for (std::uint8_t y : labels) n_pos += y ? 1 : 0;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;  // ordering of an absent class is uninformative

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });

  // Tied-rank summation: tied scores share the average 1-based rank,
  // which reproduces the half-credit sigma rule exactly.
  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && z[order[j]] == z[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) rank_sum_pos += avg_rank;
    i = j;
  }
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

double sensitive_auc(std::span<const double> z, std::span<const std::uint8_t> mask) {
  const double u = auc(z, mask);
  return std::max(u, 1.0 - u);
}

OvrAucResult ovr_sensitive_auc(std::span<const double> z, const SensitiveView& view) {
  if (view.groups.empty()) throw ConfigError("ovr_sensitive_auc: no retained sensitive groups");
  OvrAucResult result;
  result.max = 0.5;
  for (const auto& group : view.groups) {
    const double value = sensitive_auc(z, group.mask);
    result.per_group.emplace_back(group.attribute + "=" + group.category, value);
    result.max = std::max(result.max, value);
  }
  return result;
}

double demographic_parity(std::span<const double> z, std::span<const std::uint8_t> mask,
                          double t) {
  std::size_t in = 0, in_pos = 0, out = 0, out_pos = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (mask[i]) {
      ++in;
      if (z[i] >= t) ++in_pos;
    } else {
      ++out;
      if (z[i] >= t) ++out_pos;
    }
  }
  if (in == 0 || out == 0) return 0.0;
  return std::fabs(static_cast<double>(in_pos) / in - static_cast<double>(out_pos) / out);
}

namespace {

std::optional<double> rate_gap(std::span<const double> z, std::span<const std::uint8_t> mask,
                               std::span<const std::uint8_t> labels, double t,
                               std::uint8_t condition_label) {
  std::size_t in = 0, in_hat = 0, out = 0, out_hat = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (labels[i] != condition_label) continue;
    if (mask[i]) {
      ++in;
      if (z[i] >= t) ++in_hat;
    } else {
      ++out;
      if (z[i] >= t) ++out_hat;
    }
  }
  if (in == 0 || out == 0) return std::nullopt;
  return std::fabs(static_cast<double>(in_hat) / in - static_cast<double>(out_hat) / out);
}

}  // namespace

std::optional<double> equal_opportunity(std::span<const double> z,
                                        std::span<const std::uint8_t> mask,
                                        std::span<const std::uint8_t> labels, double t) {
  return rate_gap(z, mask, labels, t, 1);
}

OddsGaps equalized_odds(std::span<const double> z, std::span<const std::uint8_t> mask,
                        std::span<const std::uint8_t> labels, double t) {
  OddsGaps gaps;
  gaps.tpr_gap = rate_gap(z, mask, labels, t, 1);
  gaps.fpr_gap = rate_gap(z, mask, labels, t, 0);
  return gaps;
}

std::vector<double> quantile_thresholds(std::span<const double> z,
                                        std::span<const double> quantiles) {
  if (z.empty()) throw DataError("quantile_thresholds: empty score vector");
  std::vector<double> sorted(z.begin(), z.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  out.reserve(quantiles.size());
  const double n = static_cast<double>(sorted.size());
  for (double q : quantiles) {
    auto idx = static_cast<std::ptrdiff_t>(std::ceil(q * n)) - 1;
    idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(sorted.size()) - 1);
    out.push_back(sorted[static_cast<std::size_t>(idx)]);
  }
  return out;
}

namespace {

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-15;
  constexpr double kTiny = 1e-300;

  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                          a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(ln_front) * beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(ln_front) * beta_continued_fraction(b, a, 1.0 - x) / b;
}

PearsonResult pearson(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (y.size() != n) throw std::logic_error("pearson: length mismatch");
  if (n < 3) throw DataError("pearson: need at least 3 points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DataError("pearson: zero variance");

  PearsonResult result;
  result.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double nu = static_cast<double>(n - 2);
  if (std::fabs(result.r) >= 1.0) {
    result.p = 0.0;
  } else {
    const double t2 = result.r * result.r * nu / (1.0 - result.r * result.r);
    result.p = regularized_incomplete_beta(0.5 * nu, 0.5, nu / (nu + t2));
  }
  return result;
}

}  // namespace fairtree
