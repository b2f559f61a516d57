#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "agibench/common.hpp"
#include "agibench/windowing.hpp"

namespace agibench {

inline constexpr std::size_t kStatisticalFeatureCount = 32;
inline constexpr std::size_t kContextualFeatureCount = 8;
inline constexpr std::size_t kPhysiologyFeatureCount = 8;
inline constexpr std::size_t kBaseFeatureCount = 48;

struct FeatureOptions {
  bool day_quarter = false;    // append day-quarter (0-3)
  bool agitation_now = false;  // append current-window agitation (0/1)

  std::size_t width() const noexcept { return kBaseFeatureCount + day_quarter + agitation_now; }
};

/// Canonical names: [location-count-{sum,max,mean,std} x 8 locations]
/// [8 contextual][8 physiology measures][optional day-quarter, agitation-now].
std::vector<std::string> feature_names(const FeatureOptions& options = {});

/// Index of a feature in the canonical order, or throws.
std::size_t feature_index(const std::string& name, const FeatureOptions& options = {});

// Per-location hourly counts over the window's hour grid, reduced to
// sum, max, mean and population std. Output layout: location-major.
void statistical_activity_features(const Window& window, std::span<double, kStatisticalFeatureCount> out);

// total-events, unique-locations, active-location-ratio,
// private-to-public-ratio, location-entropy, location-dominance-ratio,
// back-and-forth-count, num-transitions.
void contextual_activity_features(const Window& window, std::span<double, kContextualFeatureCount> out);

// Mean reading per measure; measures without readings are flagged missing
// and their value is left as NaN.
void physiology_features(const Window& window, std::span<double, kPhysiologyFeatureCount> values,
                         std::span<std::uint8_t, kPhysiologyFeatureCount> missing);

/// Feature rows with a per-entry missing mask.
struct FeatureMatrix {
  Matrix values;
  std::vector<std::uint8_t> missing;  // rows x cols, row-major
  std::vector<std::string> names;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }
  bool is_missing(std::size_t r, std::size_t c) const { return missing[r * values.cols() + c] != 0; }
  FeatureMatrix select_rows(std::span<const std::size_t> indices) const;
};

/// Extracts one row per listed window. OpenMP-parallel across windows with
/// `threads` workers (<= 1 runs serially); output is independent of the
/// thread count.
FeatureMatrix extract_features(const WindowSet& windows, std::span<const std::size_t> window_indices,
                               const FeatureOptions& options, int threads = 1);

void write_feature_csv(const FeatureMatrix& features, const WindowSet& windows,
                       std::span<const std::size_t> window_indices, const std::string& path,
                       const std::string& mask_path);

/// Training statistics for impute -> standardize -> min-max scale.
struct PreprocessorState {
  std::vector<double> impute_mean;
  std::vector<double> mean;
  std::vector<double> scale;  // population std, 1 for constant features
  std::vector<double> min;
  std::vector<double> max;
  std::vector<std::size_t> all_missing;  // features missing in every training row

  std::size_t width() const noexcept { return mean.size(); }
  std::uint64_t hash() const;
  bool operator==(const PreprocessorState&) const = default;
};

PreprocessorState fit_preprocessor(const FeatureMatrix& train);
Matrix apply_preprocessor(const PreprocessorState& state, const FeatureMatrix& rows);

std::uint64_t hash_values(std::span<const double> values, std::uint64_t h = 14695981039346656037ULL) noexcept;

}  // namespace agibench
