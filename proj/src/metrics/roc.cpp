#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "gnnfuse/errors.hpp"
#include "gnnfuse/metrics.hpp"

namespace gnnfuse {

namespace {

// Distinct scores in ascending order with the label counts at each.
struct TieGroups {
  std::vector<double> value;
  std::vector<std::uint64_t> positives;
  std::vector<std::uint64_t> negatives;
  std::uint64_t total_positives = 0;
  std::uint64_t total_negatives = 0;
};

TieGroups group(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc: scores and labels differ in length");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  for (double s : scores)
    if (!std::isfinite(s)) throw ValidationError("roc: non-finite score");
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  TieGroups g;
  for (std::size_t idx : order) {
    if (g.value.empty() || scores[idx] != g.value.back()) {
      g.value.push_back(scores[idx]);
      g.positives.push_back(0);
      g.negatives.push_back(0);
    }
    if (labels[idx] > 1) throw ValidationError("roc: non-binary label");
    if (labels[idx]) {
      ++g.positives.back();
      ++g.total_positives;
    } else {
      ++g.negatives.back();
      ++g.total_negatives;
    }
  }
  if (g.total_positives == 0 || g.total_negatives == 0) {
    throw ValidationError("roc: labels need at least one positive and one negative");
  }
  return g;
}

// Twice the Mann-Whitney U, an exact integer.
double auc_from_groups(const TieGroups& g) {
  std::uint64_t twice_u = 0;
  std::uint64_t negatives_below = 0;
  for (std::size_t k = 0; k < g.value.size(); ++k) {
    twice_u += 2 * g.positives[k] * negatives_below + g.positives[k] * g.negatives[k];
    negatives_below += g.negatives[k];
  }
  return static_cast<double>(twice_u) /
         (2.0 * static_cast<double>(g.total_positives) * static_cast<double>(g.total_negatives));
}

// A threshold separating lower from upper: scores > t are exactly those >= upper.
double split_between(double lower, double upper) {
  const double mid = lower + (upper - lower) / 2.0;
  return (mid >= lower && mid < upper) ? mid : lower;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  return auc_from_groups(group(scores, labels));
}

RocCurve roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const TieGroups g = group(scores, labels);
  const double p = static_cast<double>(g.total_positives);
  const double n = static_cast<double>(g.total_negatives);
  RocCurve roc;
  roc.auc = auc_from_groups(g);
  const std::size_t m = g.value.size();
  roc.thresholds.reserve(m + 1);
  // Entry k predicts the k lowest groups negative.
  std::uint64_t pos_below = 0, neg_below = 0;
  for (std::size_t k = 0; k <= m; ++k) {
    double t;
    if (k == 0) t = -std::numeric_limits<double>::infinity();
    else if (k == m) t = std::numeric_limits<double>::infinity();
    else t = split_between(g.value[k - 1], g.value[k]);
    if (k > 0) {
      pos_below += g.positives[k - 1];
      neg_below += g.negatives[k - 1];
    }
    roc.thresholds.push_back(t);
    roc.sensitivity.push_back(static_cast<double>(g.total_positives - pos_below) / p);
    roc.specificity.push_back(static_cast<double>(neg_below) / n);
  }
  return roc;
}

OperatingPoint youden_point(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  const RocCurve roc = roc_curve(scores, labels);
  OperatingPoint best{roc.thresholds[0], roc.sensitivity[0], roc.specificity[0]};
  for (std::size_t k = 1; k < roc.thresholds.size(); ++k) {
    const OperatingPoint cand{roc.thresholds[k], roc.sensitivity[k], roc.specificity[k]};
    const double jc = cand.youden(), jb = best.youden();
    // Thresholds ascend, so an equal-J, equal-specificity candidate is never
    // preferred and the lower threshold is kept.
    if (jc > jb || (jc == jb && cand.specificity > best.specificity)) best = cand;
  }
  return best;
}

}  // namespace gnnfuse
