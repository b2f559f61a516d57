#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "agibench/artifact.hpp"
#include "agibench/config.hpp"
#include "agibench/explain.hpp"
#include "agibench/metrics.hpp"
#include "agibench/windowing.hpp"

namespace agibench {

inline constexpr const char* kToolVersion = "1.0.0";

struct FoldResult {
  std::string tag;
  std::size_t train_samples = 0;
  std::size_t train_rows_fitted = 0;  // after SMOTE, or normal rows for anomaly models
  std::size_t test_samples = 0;
  std::size_t test_positives = 0;
  std::optional<double> auc_roc;  // undefined when the test fold has one class
  std::optional<double> auc_pr;
  std::optional<double> sensitivity;
  std::optional<double> specificity;
  double threshold = 0.5;
  std::uint64_t preprocessor_hash = 0;
  std::uint64_t train_hash = 0;  // rows and labels the model was fitted on, after SMOTE
  std::uint64_t model_hash = 0;
  std::vector<std::string> all_missing;  // features missing in every training row
};

struct ModelReport {
  std::string model;
  SplitScheme scheme = SplitScheme::stratified_5_fold;
  std::string spec;  // canonical hyperparameters
  std::vector<FoldResult> folds;
  std::vector<double> scores;          // out-of-fold score per sample
  std::vector<std::uint8_t> predicted; // thresholded per sample
  std::vector<std::size_t> fold_of;    // fold index per sample
  double auc_roc = 0.0;
  double auc_pr = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
};

/// The labeled samples an experiment evaluates.
struct SampleTable {
  std::vector<std::string> participant;
  std::vector<Timestamp> start;  // start of the sample's last window
  Labels label;
  std::size_t windows = 0;           // windows built from the cohort
  std::size_t excluded_gap = 0;      // windows followed by a monitoring gap
  std::size_t excluded_history = 0;  // labeled windows lacking n-1 predecessors

  std::size_t size() const noexcept { return label.size(); }
  std::size_t positives() const;
};

struct ExperimentResult {
  RunConfig config;
  SampleTable samples;
  std::vector<std::string> feature_names;
  std::vector<ModelReport> reports;       // model-major, then scheme
  std::vector<ModelArtifact> artifacts;   // tabular formulation: one per model, fit on all samples
};

/// Runs every model under every split scheme of the config on `cohort`.
/// `threads` caps parallel fold evaluation; results do not depend on it.
ExperimentResult run_experiment(const RunConfig& config, const CohortStore& cohort, int threads = 1);

/// Writes reports, CSV tables, artifacts and the manifest into `dir`.
/// Returns the written file names in order.
std::vector<std::string> write_experiment(const ExperimentResult& result, const std::string& dir);

/// Aligned plain-text table: model x scheme x metrics.
std::string summary_table(const ExperimentResult& result);

struct ExplainResult {
  std::string model;
  std::uint64_t model_hash = 0;
  std::vector<std::string> feature_names;
  std::vector<std::size_t> background;  // sample indices
  std::vector<std::size_t> instances;   // sample indices
  Matrix instance_values;               // preprocessed rows of the instances
  Attributions attributions;
  PermutationImportance importance;
  std::vector<FeatureSummary> ranking;
  std::size_t top_m = 24;
  SampleTable samples;
};

/// Attribution analysis of a tabular artifact on the config's cohort.
ExplainResult run_explain(const RunConfig& config, const CohortStore& cohort, const ModelArtifact& artifact,
                          std::size_t top_m = 24, int threads = 1);

std::vector<std::string> write_explain(const ExplainResult& result, const RunConfig& config, const std::string& dir);

}  // namespace agibench
