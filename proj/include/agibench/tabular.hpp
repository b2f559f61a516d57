#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

using Labels = std::vector<std::uint8_t>;

enum class ClassifierKind { logistic, gaussian_nb, gbdt_exact, gbdt_hist };

std::string_view classifier_name(ClassifierKind kind) noexcept;
std::optional<ClassifierKind> parse_classifier_kind(std::string_view name);

struct GbdtParams {
  int rounds = 100;
  double learning_rate = 0.1;
  int max_depth = 3;          // depth-wise growth (exact); <= 0 means unlimited
  int max_leaves = 31;        // leaf-wise growth (hist)
  int bins = 255;
  double lambda = 1.0;        // L2 on leaf values
  double min_child_hessian = 1e-3;
  int min_child_samples = 1;

  bool operator==(const GbdtParams&) const = default;
};

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::logistic;
  double l2 = 1e-3;           // logistic: penalty on the mean weighted NLL
  int max_iterations = 1000;  // logistic
  double tolerance = 1e-6;    // logistic gradient-norm stopping rule
  GbdtParams gbdt;
  bool class_weighting = false;
  std::uint64_t seed = 0;

  /// Documented defaults per kind (gbdt-hist: 31 leaves, 20 rows per leaf).
  static ClassifierSpec preset(ClassifierKind kind);
  std::string canonical() const;
  std::uint64_t hash() const { return fnv1a(canonical()); }
  bool operator==(const ClassifierSpec&) const = default;
};

struct ClassWeights {
  double negative = 1.0;
  double positive = 1.0;
};

// weight_c = N / (2 N_c); equalizes the weighted class masses.
ClassWeights class_weights(std::span<const std::uint8_t> labels);
std::vector<double> sample_weights(std::span<const std::uint8_t> labels, const ClassWeights& w);

struct SmoteResult {
  Matrix rows;  // originals first, then synthetic minority rows
  Labels labels;
  std::size_t synthetic = 0;
  std::vector<std::size_t> parent;    // per synthetic row
  std::vector<std::size_t> neighbor;  // per synthetic row
  std::vector<std::string> warnings;
};

SmoteResult smote_oversample(const Matrix& rows, std::span<const std::uint8_t> labels, std::size_t k,
                             std::uint64_t seed, int threads = 1);

struct LogisticModel {
  std::vector<double> coef;
  double intercept = 0.0;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool operator==(const LogisticModel&) const = default;
};

struct NaiveBayesModel {
  std::array<std::vector<double>, 2> mean;
  std::array<std::vector<double>, 2> variance;
  std::array<double, 2> log_prior{};
  bool operator==(const NaiveBayesModel&) const = default;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;  // go left when x[feature] <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf contribution, learning rate already applied
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes;  // node 0 is the root
  double predict(std::span<const double> row) const noexcept;
  bool operator==(const Tree&) const = default;
};

struct GbdtModel {
  double base_score = 0.0;  // prior log-odds
  std::vector<Tree> trees;
  double raw_score(std::span<const double> row) const noexcept;
  bool operator==(const GbdtModel&) const = default;
};

struct FittedClassifier {
  ClassifierSpec spec;
  std::size_t feature_count = 0;
  std::variant<LogisticModel, NaiveBayesModel, GbdtModel> params;
  std::string fold;  // training provenance
  std::vector<std::string> feature_names;

  double predict_one(std::span<const double> row) const;
  bool operator==(const FittedClassifier&) const = default;
};

/// Fits on rows x labels. `weights` may be empty (uniform). Rows must be finite.
FittedClassifier fit_classifier(const ClassifierSpec& spec, const Matrix& rows, std::span<const std::uint8_t> labels,
                                std::span<const double> weights = {});

std::vector<double> predict_proba(const FittedClassifier& model, const Matrix& rows);

// Internals exposed for tests and reuse.
LogisticModel fit_logistic(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                           double l2, int max_iterations, double tolerance);
NaiveBayesModel fit_gaussian_nb(const Matrix& rows, std::span<const std::uint8_t> labels, bool uniform_priors);
GbdtModel fit_gbdt_exact(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                         const GbdtParams& params);
GbdtModel fit_gbdt_hist(const Matrix& rows, std::span<const std::uint8_t> labels, std::span<const double> weights,
                        const GbdtParams& params);

/// Hash of every fitted parameter, for reproducibility checks.
std::uint64_t model_hash(const FittedClassifier& model);

double sigmoid(double z) noexcept;

}  // namespace agibench
