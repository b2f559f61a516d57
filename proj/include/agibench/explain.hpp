#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

/// Scores a batch of rows. Must be safe to call concurrently.
using BatchPredictor = std::function<std::vector<double>(const Matrix&)>;

struct PermutationImportance {
  double baseline_auc = 0.0;
  std::vector<double> mean_drop;  // baseline AUC minus shuffled AUC, per feature
  std::vector<double> std_drop;   // population std over repeats
  std::size_t repeats = 0;
};

/// Column-wise permutation importance on AUC-ROC. Feature f, repeat r uses
/// its own stream, so results do not depend on the thread count.
PermutationImportance permutation_importance(const BatchPredictor& predict, const Matrix& rows,
                                             std::span<const std::uint8_t> labels, std::size_t repeats,
                                             std::uint64_t seed, int threads = 1);

struct ShapleyOptions {
  std::size_t permutations = 128;  // consumed in antithetic pairs
  std::uint64_t seed = 0;
};

/// Monte-Carlo Shapley values for one instance against a background set.
/// Every sampled permutation is walked from each background row to the
/// instance, so the attributions sum exactly to f(x) minus the mean
/// background output, and additive models are recovered exactly.
std::vector<double> shapley_sampling(const BatchPredictor& predict, std::span<const double> instance,
                                     const Matrix& background, const ShapleyOptions& options);

struct Attributions {
  Matrix values;                   // instances x features, signed
  std::vector<double> output;      // f(x) per instance
  double background_mean = 0.0;    // mean f over the background rows
};

/// Per-instance attributions; instance i uses seed derive_seed(seed, i).
Attributions explain_instances(const BatchPredictor& predict, const Matrix& instances, const Matrix& background,
                               const ShapleyOptions& options, int threads = 1);

struct FeatureSummary {
  std::size_t feature = 0;
  std::string name;
  std::size_t rank = 0;       // 1 = most important
  double mean_abs = 0.0;      // mean |attribution|
  double direction = 0.0;     // Pearson correlation of feature value and attribution
};

/// All features ranked by mean |attribution|; ties keep feature order.
/// Needs at least 30 instances.
std::vector<FeatureSummary> summary_rank(const Matrix& attributions, const Matrix& feature_values,
                                         std::span<const std::string> names);

double pearson(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace agibench
