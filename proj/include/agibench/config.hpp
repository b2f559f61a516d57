#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agibench/anomaly.hpp"
#include "agibench/features.hpp"
#include "agibench/ingest.hpp"
#include "agibench/kv_file.hpp"
#include "agibench/splits.hpp"
#include "agibench/tabular.hpp"

namespace agibench {

enum class Formulation { tabular_binary, sequence_binary, anomaly };
enum class Imbalance { none, class_weights, smote };

std::string_view formulation_name(Formulation f) noexcept;
std::string_view imbalance_name(Imbalance i) noexcept;

struct AnomalySpec {
  AnomalyKind kind = AnomalyKind::isolation_forest;
  IsolationForestParams forest;
  std::size_t lof_k = 20;
  OneClassParams one_class;
};

struct ExplainSettings {
  std::size_t background = 100;
  std::size_t permutations = 128;
  std::size_t repeats = 10;
  std::size_t instances = 100;
};

/// Fully resolved run description. Every key is validated when parsed.
struct RunConfig {
  std::string source;  // path of the config file, informational
  std::optional<CohortPaths> data;
  std::string schema_path;
  std::optional<SyntheticSpec> synthetic;
  int resolution_hours = 6;
  Formulation formulation = Formulation::tabular_binary;
  std::size_t sequence_n = 1;
  std::size_t sequence_kernels = 1000;
  FeatureOptions context;
  std::vector<ClassifierSpec> classifiers;  // tabular and sequence formulations
  std::vector<AnomalySpec> anomalies;       // anomaly formulation
  Imbalance imbalance = Imbalance::none;
  std::size_t smote_k = 5;
  std::vector<SplitScheme> splits{SplitScheme::stratified_5_fold};
  bool group_by_participant = false;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string output_dir;
  double threshold = 0.5;
  ExplainSettings explain;

  /// One `key=value` line per resolved setting, defaults included.
  std::string canonical() const;
  std::uint64_t hash() const { return fnv1a(canonical()); }
  std::vector<std::string> model_names() const;
};

/// Every accepted key, for the published schema.
const std::vector<std::string>& config_keys();

RunConfig parse_run_config(const KvFile& kv);
RunConfig load_run_config(const std::string& path);

/// Loads file data or generates the synthetic cohort the config describes.
CohortStore load_config_cohort(const RunConfig& config);

}  // namespace agibench
