#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

enum class AnomalyKind { isolation_forest, local_outlier_factor, one_class_kernel };

std::string_view anomaly_name(AnomalyKind kind) noexcept;
std::optional<AnomalyKind> parse_anomaly_kind(std::string_view name);

// Expected path length of an unsuccessful BST search over m points,
// c(m) = 2 H(m-1) - 2 (m-1)/m with exact harmonic numbers; c(1) = 0.
double average_path_length(std::size_t m) noexcept;

struct IsolationNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] < threshold
  int left = -1;
  int right = -1;
  std::size_t size = 0;  // training points reaching a leaf
};

struct IsolationForest {
  std::vector<std::vector<IsolationNode>> trees;
  std::size_t subsample = 256;
  double path_length(std::span<const double> row) const noexcept;  // mean over trees
  double score(std::span<const double> row) const noexcept;        // 2^(-E[h]/c(psi))
};

struct LofModel {
  Matrix train;
  std::size_t k = 20;
  std::vector<double> k_distance;
  std::vector<double> lrd;
};

struct OneClassKernelModel {
  Matrix support;
  std::vector<double> alpha;  // dual coefficients of the support rows
  double rho = 0.0;
  double gamma = 1.0;
  double nu = 0.1;
  std::size_t training_rows = 0;
  long iterations = 0;
  double kkt_gap = 0.0;
  // All dual coefficients (support and non-support), kept for audit.
  std::vector<double> full_alpha;

  double decision(std::span<const double> row) const noexcept;  // sum alpha K(x_i, x) - rho
};

/// Fitted anomaly predictor. Higher scores mean more anomalous for every kind.
struct AnomalyModel {
  AnomalyKind kind = AnomalyKind::isolation_forest;
  std::size_t feature_count = 0;
  std::variant<IsolationForest, LofModel, OneClassKernelModel> state;
  double threshold = 0.0;  // 95th percentile of training scores
};

struct IsolationForestParams {
  std::size_t trees = 100;
  std::size_t subsample = 256;
};

struct OneClassParams {
  double nu = 0.1;
  double gamma = 0.0;  // <= 0 means 1 / feature count
  double tolerance = 1e-4;
  long max_iterations = 0;  // <= 0 means max(10^7, 100 m)
  std::size_t cache_mb = 512;
};

AnomalyModel fit_iforest(const Matrix& rows, const IsolationForestParams& params, std::uint64_t seed, int threads = 1);
AnomalyModel fit_lof(const Matrix& rows, std::size_t k = 20, int threads = 1);
AnomalyModel fit_one_class_kernel(const Matrix& rows, const OneClassParams& params = {}, int threads = 1);

struct AnomalyScores {
  std::vector<double> scores;
  std::vector<std::uint8_t> flagged;  // score > threshold
  double threshold = 0.0;
};

std::vector<double> anomaly_raw_scores(const AnomalyModel& model, const Matrix& rows, int threads = 1);
AnomalyScores anomaly_score(const AnomalyModel& model, const Matrix& rows, int threads = 1);

// Linear-interpolation percentile, q in [0, 100].
double percentile(std::vector<double> values, double q);

}  // namespace agibench
