#pragma once

#include <string>

#include "agibench/features.hpp"
#include "agibench/tabular.hpp"

namespace agibench {

/// A fitted tabular pipeline: preprocessing statistics plus classifier, with
/// the feature layout it was trained on.
struct ModelArtifact {
  FittedClassifier classifier;
  PreprocessorState preprocessor;
  int resolution_hours = 6;
  std::string config_hash;

  bool operator==(const ModelArtifact&) const = default;
};

/// Versioned JSON ("agibench-model", version 1). Doubles round-trip exactly.
std::string artifact_to_json(const ModelArtifact& artifact);
ModelArtifact artifact_from_json(const std::string& text);

void write_artifact(const ModelArtifact& artifact, const std::string& path);
ModelArtifact read_artifact(const std::string& path);

}  // namespace agibench
