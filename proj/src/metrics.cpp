#include "agibench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "agibench/common.hpp"

namespace agibench {

namespace {

void check_lengths(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  if (scores.size() != labels.size()) {
    fail(ErrorKind::model, "length-mismatch",
         std::to_string(scores.size()) + " scores but " + std::to_string(labels.size()) + " labels");
  }
}

std::pair<std::size_t, std::size_t> class_counts(std::span<const std::uint8_t> labels) {
  std::size_t pos = 0;
  for (auto l : labels) pos += l != 0;
  return {pos, labels.size() - pos};
}

void require_both(std::span<const std::uint8_t> labels) {
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0 || neg == 0) fail(ErrorKind::model, "single-class", "metric needs both classes present");
}

std::vector<std::size_t> descending_order(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = r;
    i = j + 1;
  }
  return ranks;
}

double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  require_both(labels);
  const auto [pos, neg] = class_counts(labels);
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) rank_sum += ranks[i];
  }
  const double p = static_cast<double>(pos), n = static_cast<double>(neg);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0) fail(ErrorKind::model, "no-positives", "average precision needs at least one positive");
  const auto order = descending_order(scores);
  double tp = 0.0, ap = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!labels[order[r]]) continue;
    tp += 1.0;
    ap += tp / static_cast<double>(r + 1);
  }
  return ap / static_cast<double>(pos);
}

SensSpec sensitivity_specificity(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                 double threshold) {
  check_lengths(scores, labels);
  require_both(labels);
  std::size_t tp = 0, fn = 0, tn = 0, fp = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] > threshold;
    if (labels[i]) (predicted ? tp : fn)++;
    else (predicted ? fp : tn)++;
  }
  return {static_cast<double>(tp) / static_cast<double>(tp + fn), static_cast<double>(tn) / static_cast<double>(tn + fp)};
}

std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  require_both(labels);
  const auto [pos, neg] = class_counts(labels);
  const auto order = descending_order(scores);
  std::vector<CurvePoint> pts{{std::numeric_limits<double>::infinity(), 0.0, 0.0}};
  double tp = 0.0, fp = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    (labels[order[r]] ? tp : fp) += 1.0;
    if (r + 1 < order.size() && scores[order[r + 1]] == scores[order[r]]) continue;
    pts.push_back({scores[order[r]], fp / static_cast<double>(neg), tp / static_cast<double>(pos)});
  }
  return pts;
}

std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  check_lengths(scores, labels);
  const auto [pos, neg] = class_counts(labels);
  if (pos == 0) fail(ErrorKind::model, "no-positives", "precision-recall curve needs at least one positive");
  const auto order = descending_order(scores);
  std::vector<CurvePoint> pts;
  double tp = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    tp += labels[order[r]] ? 1.0 : 0.0;
    if (r + 1 < order.size() && scores[order[r + 1]] == scores[order[r]]) continue;
    pts.push_back({scores[order[r]], tp / static_cast<double>(pos), tp / static_cast<double>(r + 1)});
  }
  return pts;
}

RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) fail(ErrorKind::model, "empty-sample", "rank-sum test needs two non-empty samples");
  std::vector<double> all(a.begin(), a.end());
  all.insert(all.end(), b.begin(), b.end());
  const auto ranks = average_ranks(all);
  const double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size()), n = n1 + n2;
  double r1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) r1 += ranks[i];
  RankSumResult out;
  out.u = r1 - n1 * (n1 + 1.0) / 2.0;
  // Tie correction: sum over tie groups of t^3 - t.
  std::vector<double> sorted = all;
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double variance = n1 * n2 / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
  if (variance <= 0.0) {
    out.z = 0.0;
    out.p_greater = 0.5;
    return out;
  }
  out.z = (out.u - n1 * n2 / 2.0) / std::sqrt(variance);
  out.p_greater = 0.5 * std::erfc(out.z / std::sqrt(2.0));
  return out;
}

}  // namespace agibench
