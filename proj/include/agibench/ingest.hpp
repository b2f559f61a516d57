#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

enum class Location : std::uint8_t {
  back_door,
  bathroom,
  bedroom,
  fridge_door,
  front_door,
  hallway,
  kitchen,
  lounge,
};
inline constexpr std::size_t kLocationCount = 8;

enum class Measure : std::uint8_t {
  body_temperature,
  body_weight,
  diastolic_bp,
  systolic_bp,
  heart_rate,
  muscle_mass,
  total_body_water,
  skin_temperature,
};
inline constexpr std::size_t kMeasureCount = 8;

enum class LabelKind : std::uint8_t { agitation, other_clinical_event };

std::string_view location_name(Location l) noexcept;
std::string_view measure_name(Measure m) noexcept;
// Accept canonical hyphenated names and the TIHM release spellings
// ("Back Door", "Heart rate", "Diastolic blood pressure", ...).
std::optional<Location> parse_location(std::string_view text);
std::optional<Measure> parse_measure(std::string_view text);
LabelKind classify_label(std::string_view text) noexcept;

bool is_private(Location l) noexcept;

struct ActivityEvent {
  Timestamp time = 0;
  Location location = Location::hallway;
  auto operator<=>(const ActivityEvent&) const = default;
};

struct PhysiologyReading {
  Timestamp time = 0;
  Measure measure = Measure::heart_rate;
  double value = 0.0;
  auto operator<=>(const PhysiologyReading&) const = default;
};

struct LabelEvent {
  Timestamp time = 0;
  LabelKind kind = LabelKind::agitation;
  std::string raw_type;  // original label text, kept for pass-through
  auto operator<=>(const LabelEvent&) const = default;
};

struct ParticipantRecord {
  std::vector<ActivityEvent> activity;
  std::vector<PhysiologyReading> physiology;
  std::vector<LabelEvent> labels;
  // Distinct days (midnight timestamps) carrying at least one sleep row.
  std::vector<Timestamp> sleep_days;

  bool operator==(const ParticipantRecord&) const = default;
};

struct RejectedRow {
  std::string file;
  std::size_t line = 0;
  std::string reason;
  bool operator==(const RejectedRow&) const = default;
};

/// Validated, time-sorted per-participant event store. Immutable once built.
struct CohortStore {
  std::map<std::string, ParticipantRecord> participants;
  std::vector<RejectedRow> rejected;

  std::size_t activity_count() const;
  std::size_t physiology_count() const;
  std::size_t label_count() const;

  // Sorts every per-participant list into canonical order.
  void normalize();

  bool operator==(const CohortStore&) const = default;
};

/// Column names for each input CSV.
struct SchemaMap {
  std::string activity_participant = "patient_id";
  std::string activity_location = "location_name";
  std::string activity_time = "date";
  std::string physiology_participant = "patient_id";
  std::string physiology_measure = "device_type";
  std::string physiology_value = "value";
  std::string physiology_time = "date";
  std::string labels_participant = "patient_id";
  std::string labels_kind = "type";
  std::string labels_time = "date";
  std::string sleep_participant = "patient_id";
  std::string sleep_time = "date";

  // Overrides from a key-value file, e.g. `activity.location = location`.
  static SchemaMap load(const std::string& path);
};

struct CohortPaths {
  std::string activity;
  std::string physiology;
  std::string labels;
  std::string sleep;  // optional, empty to skip
};

CohortStore load_cohort(const CohortPaths& paths, const SchemaMap& schema = {});

struct ParticipantSummary {
  std::string id;
  std::size_t span_days = 0;
  std::size_t observed_days = 0;
  std::size_t activity_missing_days = 0;
  std::size_t physiology_missing_days = 0;
  std::size_t sleep_missing_days = 0;
  std::size_t agitation_events = 0;
};

struct CohortSummary {
  int resolution_hours = 6;
  std::size_t participants = 0;
  std::size_t participants_with_agitation = 0;
  // Days in the first-to-last-event span; observed days have any data.
  std::size_t total_days = 0;
  std::size_t observed_days = 0;
  // Daily missingness over span days, and over observed days.
  double activity_missing = 0.0;
  double physiology_missing = 0.0;
  double sleep_missing = 0.0;
  double activity_missing_observed = 0.0;
  double physiology_missing_observed = 0.0;
  double sleep_missing_observed = 0.0;
  // Window-level missingness at the requested resolution.
  double activity_missing_windows = 0.0;
  double physiology_missing_windows = 0.0;
  std::size_t agitation_events = 0;
  std::size_t agitation_windows = 0;
  std::array<std::size_t, 4> quarter_counts{};
  std::array<double, 4> quarter_fractions{};
  std::vector<ParticipantSummary> per_participant;
};

CohortSummary summarize(const CohortStore& cohort, int resolution_hours);

struct SyntheticSpec {
  int participants = 20;
  int days = 60;
  std::uint64_t seed = 1;
  double agitation_rate = 135.0 / 2803.0;  // episodes per participant-day
  double precursor_strength = 1.0;
};

struct PlantedWindow {
  std::string participant;
  Timestamp start = 0;  // 6-hour aligned
  std::string role;     // "precursor" (window before episode) or "lead" (two before)
  int burst_events = 0;
};

struct SyntheticManifest {
  SyntheticSpec spec;
  std::vector<std::pair<std::string, Timestamp>> episodes;
  std::vector<PlantedWindow> planted;
};

struct SyntheticCohort {
  CohortStore cohort;
  SyntheticManifest manifest;
};

SyntheticCohort generate_synthetic(const SyntheticSpec& spec);

// Writes activity.csv, physiology.csv, labels.csv (default schema columns)
// and, when given, manifest.json into `dir`.
CohortPaths write_cohort_csv(const CohortStore& cohort, const std::string& dir);
void write_manifest(const SyntheticManifest& manifest, const std::string& path);
std::string manifest_json(const SyntheticManifest& manifest);

}  // namespace agibench
