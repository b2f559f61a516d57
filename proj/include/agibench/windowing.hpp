#pragma once

#include <span>
#include <string>
#include <vector>

#include "agibench/ingest.hpp"

namespace agibench {

/// One fixed-resolution interval of a participant's data. Slices view into
/// the CohortStore the window was built from, which must outlive it.
struct Window {
  const std::string* participant = nullptr;
  std::size_t participant_index = 0;  // position in the cohort's sorted id order
  std::size_t position = 0;           // index within the participant's tiling
  Timestamp start = 0;
  int resolution_hours = 6;
  std::span<const ActivityEvent> activity;
  std::span<const PhysiologyReading> physiology;
  bool agitation_now = false;
  bool has_label = false;  // a following window exists and is observed
  bool label_next = false;
  int day_quarter = 0;

  Timestamp end() const noexcept { return start + resolution_hours * kSecondsPerHour; }
};

struct WindowSet {
  int resolution_hours = 6;
  std::vector<Window> windows;  // grouped by participant, time-ordered
  // Windows whose following window is a monitoring gap (a day with no
  // activity and no labels); they stay as history but carry no label.
  std::size_t excluded_gap = 0;

  std::size_t labeled_count() const;
  std::size_t positive_count() const;
};

WindowSet build_windows(const CohortStore& cohort, int resolution_hours);

struct HistoryStatistics {
  std::size_t positives = 0;
  std::size_t positives_without_current = 0;
  double fraction_without_current = 0.0;
};

HistoryStatistics history_statistics(const WindowSet& windows);

struct SequenceSample {
  std::vector<std::size_t> windows;  // indices into WindowSet::windows, oldest first
  bool label = false;

  std::size_t last() const { return windows.back(); }
};

/// One sample per labeled window preceded by n-1 windows of the same
/// participant.
std::vector<SequenceSample> make_sequences(const WindowSet& windows, std::size_t n);

void write_windows_csv(const WindowSet& windows, const std::string& path);

}  // namespace agibench
