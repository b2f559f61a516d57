#include "agibench/splits.hpp"

#include <algorithm>
#include <map>
#include <numeric>

#include "agibench/common.hpp"

namespace agibench {

std::string_view split_name(SplitScheme scheme) noexcept {
  return scheme == SplitScheme::lopo ? "lopo" : "stratified-5-fold";
}

std::optional<SplitScheme> parse_split_scheme(std::string_view name) {
  if (name == "stratified-5-fold") return SplitScheme::stratified_5_fold;
  if (name == "lopo") return SplitScheme::lopo;
  return std::nullopt;
}

namespace {

void fill_train(SplitPlan& plan, std::size_t n) {
  std::vector<std::size_t> owner(n, plan.folds.size());
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    std::sort(plan.folds[f].test.begin(), plan.folds[f].test.end());
    for (auto i : plan.folds[f].test) owner[i] = f;
  }
  for (std::size_t f = 0; f < plan.folds.size(); ++f) {
    for (std::size_t i = 0; i < n; ++i) {
      if (owner[i] != f) plan.folds[f].train.push_back(i);
    }
  }
}

}  // namespace

SplitPlan make_stratified_splits(std::span<const std::uint8_t> labels, std::uint64_t seed, std::size_t folds,
                                 std::span<const std::string> groups) {
  const std::size_t n = labels.size();
  if (n < 2) fail(ErrorKind::config, "too-few-samples", "need at least 2 samples to split");
  std::size_t positives = 0;
  for (auto l : labels) positives += l != 0;
  if (positives < folds) {
    fail(ErrorKind::data, "too-few-positives-to-stratify",
         std::to_string(positives) + " positive samples cannot fill " + std::to_string(folds) + " folds");
  }
  SplitPlan plan;
  plan.seed = seed;
  plan.folds.resize(folds);
  for (std::size_t f = 0; f < folds; ++f) plan.folds[f].tag = std::to_string(f + 1);
  Rng rng(derive_seed(seed, 0x5f01d));

  if (groups.empty()) {
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < n; ++i) (labels[i] ? pos : neg).push_back(i);
    rng.shuffle(pos);
    rng.shuffle(neg);
    for (std::size_t i = 0; i < pos.size(); ++i) plan.folds[i % folds].test.push_back(pos[i]);
    // Continue the deal where positives stopped so fold sizes stay level.
    for (std::size_t i = 0; i < neg.size(); ++i) plan.folds[(pos.size() + i) % folds].test.push_back(neg[i]);
  } else {
    if (groups.size() != n) fail(ErrorKind::config, "length-mismatch", "one group id per sample required");
    plan.grouped = true;
    std::map<std::string, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members[groups[i]].push_back(i);
    struct Group {
      const std::vector<std::size_t>* rows;
      std::size_t positives;
    };
    std::vector<Group> gs;
    for (const auto& [id, rows] : members) {
      std::size_t p = 0;
      for (auto i : rows) p += labels[i] != 0;
      gs.push_back({&rows, p});
    }
    rng.shuffle(gs);
    std::stable_sort(gs.begin(), gs.end(), [](const Group& a, const Group& b) { return a.positives > b.positives; });
    std::vector<std::size_t> fold_pos(folds, 0);
    for (const auto& g : gs) {
      std::size_t best = 0;
      for (std::size_t f = 1; f < folds; ++f) {
        if (fold_pos[f] < fold_pos[best] ||
            (fold_pos[f] == fold_pos[best] && plan.folds[f].test.size() < plan.folds[best].test.size())) {
          best = f;
        }
      }
      fold_pos[best] += g.positives;
      plan.folds[best].test.insert(plan.folds[best].test.end(), g.rows->begin(), g.rows->end());
    }
  }
  fill_train(plan, n);
  return plan;
}

SplitPlan make_lopo_splits(std::span<const std::string> groups) {
  const std::size_t n = groups.size();
  if (n < 2) fail(ErrorKind::config, "too-few-samples", "need at least 2 samples to split");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < n; ++i) members[groups[i]].push_back(i);
  SplitPlan plan;
  plan.scheme = SplitScheme::lopo;
  plan.grouped = true;
  for (auto& [id, rows] : members) plan.folds.push_back({{}, rows, id});
  fill_train(plan, n);
  return plan;
}

SplitPlan make_splits(SplitScheme scheme, std::span<const std::uint8_t> labels, std::span<const std::string> groups,
                      std::uint64_t seed, bool group_by_participant) {
  if (scheme == SplitScheme::lopo) return make_lopo_splits(groups);
  return make_stratified_splits(labels, seed, 5, group_by_participant ? groups : std::span<const std::string>{});
}

}  // namespace agibench
