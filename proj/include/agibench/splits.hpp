#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace agibench {

enum class SplitScheme { stratified_5_fold, lopo };

std::string_view split_name(SplitScheme scheme) noexcept;
std::optional<SplitScheme> parse_split_scheme(std::string_view name);

struct Fold {
  std::vector<std::size_t> train;  // ascending sample indices
  std::vector<std::size_t> test;
  std::string tag;  // fold number or held-out participant id
};

struct SplitPlan {
  SplitScheme scheme = SplitScheme::stratified_5_fold;
  std::uint64_t seed = 0;
  bool grouped = false;
  std::vector<Fold> folds;
};

/// Stratified k-fold. Positives and negatives are shuffled separately and
/// dealt round-robin, so per-fold positive counts differ by at most one.
/// With `groups`, whole participants are assigned to folds instead (greedy
/// balancing of positives, then sample counts).
SplitPlan make_stratified_splits(std::span<const std::uint8_t> labels, std::uint64_t seed, std::size_t folds = 5,
                                 std::span<const std::string> groups = {});

/// One fold per participant, ordered by participant id.
SplitPlan make_lopo_splits(std::span<const std::string> groups);

SplitPlan make_splits(SplitScheme scheme, std::span<const std::uint8_t> labels, std::span<const std::string> groups,
                      std::uint64_t seed, bool group_by_participant = false);

}  // namespace agibench
