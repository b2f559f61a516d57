#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace agibench {

/// Mann-Whitney form of the ROC area; tied scores count one half.
double auc_roc(std::span<const double> scores, std::span<const std::uint8_t> labels);

/// Average precision: mean over positives (descending score, ties kept in
/// input order) of the precision at that positive's rank.
double auc_pr(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct SensSpec {
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// A row is predicted positive when its score is strictly above `threshold`.
SensSpec sensitivity_specificity(std::span<const double> scores, std::span<const std::uint8_t> labels,
                                 double threshold);

struct CurvePoint {
  double threshold = 0.0;
  double x = 0.0;  // ROC: false-positive rate; PR: recall
  double y = 0.0;  // ROC: true-positive rate; PR: precision
};

std::vector<CurvePoint> roc_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);
std::vector<CurvePoint> pr_curve(std::span<const double> scores, std::span<const std::uint8_t> labels);

struct RankSumResult {
  double u = 0.0;        // Mann-Whitney U of `a` over `b`
  double z = 0.0;
  double p_greater = 1.0;  // one-sided: a tends to exceed b
};

/// Normal approximation with tie-corrected variance.
RankSumResult rank_sum_test(std::span<const double> a, std::span<const double> b);

/// Average ranks (1-based), ties share the mean rank.
std::vector<double> average_ranks(std::span<const double> values);

}  // namespace agibench
