#include "agibench/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <unordered_map>

#include "agibench/kv_file.hpp"
#include "csv.hpp"

namespace agibench {

namespace {

constexpr std::array<std::string_view, kLocationCount> kLocationNames = {
    "back-door", "bathroom", "bedroom", "fridge-door", "front-door", "hallway", "kitchen", "lounge"};

constexpr std::array<std::string_view, kMeasureCount> kMeasureNames = {
    "body-temperature", "body-weight",      "diastolic-bp",    "systolic-bp",
    "heart-rate",       "muscle-mass",      "total-body-water", "skin-temperature"};

}  // namespace

std::string_view location_name(Location l) noexcept { return kLocationNames[static_cast<std::size_t>(l)]; }
std::string_view measure_name(Measure m) noexcept { return kMeasureNames[static_cast<std::size_t>(m)]; }

std::optional<Location> parse_location(std::string_view text) {
  const std::string t = normalize_token(text);
  for (std::size_t i = 0; i < kLocationCount; ++i) {
    if (t == kLocationNames[i]) return static_cast<Location>(i);
  }
  if (t == "backdoor") return Location::back_door;
  if (t == "frontdoor") return Location::front_door;
  if (t == "fridge" || t == "fridgedoor") return Location::fridge_door;
  if (t == "living-room") return Location::lounge;
  return std::nullopt;
}

std::optional<Measure> parse_measure(std::string_view text) {
  const std::string t = normalize_token(text);
  for (std::size_t i = 0; i < kMeasureCount; ++i) {
    if (t == kMeasureNames[i]) return static_cast<Measure>(i);
  }
  static const std::unordered_map<std::string, Measure> aliases = {
      {"body-temperature", Measure::body_temperature},
      {"body-temp", Measure::body_temperature},
      {"weight", Measure::body_weight},
      {"diastolic-blood-pressure", Measure::diastolic_bp},
      {"systolic-blood-pressure", Measure::systolic_bp},
      {"pulse", Measure::heart_rate},
      {"body-water", Measure::total_body_water},
      {"skin-temp", Measure::skin_temperature},
  };
  if (auto it = aliases.find(t); it != aliases.end()) return it->second;
  return std::nullopt;
}

LabelKind classify_label(std::string_view text) noexcept {
  return normalize_token(text) == "agitation" ? LabelKind::agitation : LabelKind::other_clinical_event;
}

bool is_private(Location l) noexcept { return l == Location::bathroom || l == Location::bedroom; }

std::size_t CohortStore::activity_count() const {
  std::size_t n = 0;
  for (const auto& [id, p] : participants) n += p.activity.size();
  return n;
}

std::size_t CohortStore::physiology_count() const {
  std::size_t n = 0;
  for (const auto& [id, p] : participants) n += p.physiology.size();
  return n;
}

std::size_t CohortStore::label_count() const {
  std::size_t n = 0;
  for (const auto& [id, p] : participants) n += p.labels.size();
  return n;
}

void CohortStore::normalize() {
  for (auto& [id, p] : participants) {
    std::sort(p.activity.begin(), p.activity.end());
    std::sort(p.physiology.begin(), p.physiology.end());
    std::sort(p.labels.begin(), p.labels.end());
    std::sort(p.sleep_days.begin(), p.sleep_days.end());
    p.sleep_days.erase(std::unique(p.sleep_days.begin(), p.sleep_days.end()), p.sleep_days.end());
  }
  std::sort(rejected.begin(), rejected.end(), [](const RejectedRow& a, const RejectedRow& b) {
    return std::tie(a.file, a.line, a.reason) < std::tie(b.file, b.line, b.reason);
  });
}

SchemaMap SchemaMap::load(const std::string& path) {
  const KvFile kv = KvFile::load(path);
  SchemaMap m;
  const std::vector<std::pair<std::string, std::string*>> fields = {
      {"activity.participant", &m.activity_participant},
      {"activity.location", &m.activity_location},
      {"activity.timestamp", &m.activity_time},
      {"physiology.participant", &m.physiology_participant},
      {"physiology.measure", &m.physiology_measure},
      {"physiology.value", &m.physiology_value},
      {"physiology.timestamp", &m.physiology_time},
      {"labels.participant", &m.labels_participant},
      {"labels.kind", &m.labels_kind},
      {"labels.timestamp", &m.labels_time},
      {"sleep.participant", &m.sleep_participant},
      {"sleep.timestamp", &m.sleep_time},
  };
  std::vector<std::string> allowed;
  for (const auto& [key, target] : fields) {
    allowed.push_back(key);
    if (auto v = kv.get_string(key)) *target = *v;
  }
  kv.require_known(allowed);
  return m;
}

namespace {

class CsvTable {
 public:
  CsvTable(const std::string& path, std::string label) : path_(path), label_(std::move(label)), in_(path) {
    if (!std::filesystem::is_regular_file(path) || !in_) {
      fail(ErrorKind::data, "file-missing", label_ + " file `" + path + "` not found");
    }
    std::string header;
    if (!std::getline(in_, header)) {
      fail(ErrorKind::data, "header-mismatch", label_ + " file `" + path + "` has no header row");
    }
    if (header.size() >= 3 && header.compare(0, 3, "\xEF\xBB\xBF") == 0) header.erase(0, 3);
    for (auto& h : csv::split_line(header)) columns_.push_back(trim(h));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i) {
      if (columns_[i] == name) return i;
    }
    fail(ErrorKind::data, "header-mismatch",
         label_ + " file `" + path_ + "` has no column `" + name + "`");
  }

  // Returns false at EOF. Blank lines are skipped.
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      if (trim(line).empty()) continue;
      fields = csv::split_line(line);
      return true;
    }
    return false;
  }

  std::size_t line() const noexcept { return line_ + 1; }  // 1-based, header is line 1

 private:
  std::string path_;
  std::string label_;
  std::ifstream in_;
  std::vector<std::string> columns_;
  std::size_t line_ = 0;
};

struct RowContext {
  CohortStore& cohort;
  std::string file;
  void reject(std::size_t line, std::string reason) {
    cohort.rejected.push_back({file, line, std::move(reason)});
  }
};

const std::string* field_at(const std::vector<std::string>& fields, std::size_t i) {
  return i < fields.size() ? &fields[i] : nullptr;
}

}  // namespace

CohortStore load_cohort(const CohortPaths& paths, const SchemaMap& schema) {
  CohortStore cohort;
  std::vector<std::string> f;

  {
    CsvTable t(paths.activity, "activity");
    const auto ip = t.column(schema.activity_participant);
    const auto il = t.column(schema.activity_location);
    const auto it = t.column(schema.activity_time);
    RowContext ctx{cohort, "activity"};
    while (t.next(f)) {
      const auto* pid = field_at(f, ip);
      const auto* loc = field_at(f, il);
      const auto* ts = field_at(f, it);
      if (!pid || !loc || !ts) { ctx.reject(t.line(), "short row"); continue; }
      const std::string id = trim(*pid);
      if (id.empty()) { ctx.reject(t.line(), "empty participant id"); continue; }
      Timestamp time = 0;
      if (!parse_timestamp(*ts, time)) { ctx.reject(t.line(), "unparseable timestamp `" + *ts + "`"); continue; }
      auto l = parse_location(*loc);
      if (!l) { ctx.reject(t.line(), "unknown location `" + *loc + "`"); continue; }
      cohort.participants[id].activity.push_back({time, *l});
    }
  }

  {
    CsvTable t(paths.physiology, "physiology");
    const auto ip = t.column(schema.physiology_participant);
    const auto im = t.column(schema.physiology_measure);
    const auto iv = t.column(schema.physiology_value);
    const auto it = t.column(schema.physiology_time);
    RowContext ctx{cohort, "physiology"};
    while (t.next(f)) {
      const auto* pid = field_at(f, ip);
      const auto* meas = field_at(f, im);
      const auto* val = field_at(f, iv);
      const auto* ts = field_at(f, it);
      if (!pid || !meas || !val || !ts) { ctx.reject(t.line(), "short row"); continue; }
      const std::string id = trim(*pid);
      if (id.empty()) { ctx.reject(t.line(), "empty participant id"); continue; }
      Timestamp time = 0;
      if (!parse_timestamp(*ts, time)) { ctx.reject(t.line(), "unparseable timestamp `" + *ts + "`"); continue; }
      auto m = parse_measure(*meas);
      if (!m) { ctx.reject(t.line(), "unknown measure `" + *meas + "`"); continue; }
      const std::string vs = trim(*val);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(vs.data(), vs.data() + vs.size(), v);
      if (ec != std::errc{} || ptr != vs.data() + vs.size() || !std::isfinite(v)) {
        ctx.reject(t.line(), "non-finite value `" + *val + "`");
        continue;
      }
      cohort.participants[id].physiology.push_back({time, *m, v});
    }
  }

  if (!paths.sleep.empty()) {
    CsvTable t(paths.sleep, "sleep");
    const auto ip = t.column(schema.sleep_participant);
    const auto it = t.column(schema.sleep_time);
    RowContext ctx{cohort, "sleep"};
    while (t.next(f)) {
      const auto* pid = field_at(f, ip);
      const auto* ts = field_at(f, it);
      Timestamp time = 0;
      if (!pid || !ts || trim(*pid).empty() || !parse_timestamp(*ts, time)) {
        ctx.reject(t.line(), "unparseable sleep row");
        continue;
      }
      cohort.participants[trim(*pid)].sleep_days.push_back(day_start(time));
    }
  }

  // Labels must fall inside the participant's activity/physiology span.
  std::map<std::string, std::pair<Timestamp, Timestamp>> spans;
  for (const auto& [id, p] : cohort.participants) {
    Timestamp lo = INT64_MAX, hi = INT64_MIN;
    for (const auto& e : p.activity) { lo = std::min(lo, e.time); hi = std::max(hi, e.time); }
    for (const auto& r : p.physiology) { lo = std::min(lo, r.time); hi = std::max(hi, r.time); }
    if (lo <= hi) spans[id] = {day_start(lo), day_start(hi) + kSecondsPerDay};
  }

  {
    CsvTable t(paths.labels, "labels");
    const auto ip = t.column(schema.labels_participant);
    const auto ik = t.column(schema.labels_kind);
    const auto it = t.column(schema.labels_time);
    RowContext ctx{cohort, "labels"};
    while (t.next(f)) {
      const auto* pid = field_at(f, ip);
      const auto* kind = field_at(f, ik);
      const auto* ts = field_at(f, it);
      if (!pid || !kind || !ts) { ctx.reject(t.line(), "short row"); continue; }
      const std::string id = trim(*pid);
      Timestamp time = 0;
      if (!parse_timestamp(*ts, time)) { ctx.reject(t.line(), "unparseable timestamp `" + *ts + "`"); continue; }
      auto span = spans.find(id);
      if (span == spans.end() || time < span->second.first || time >= span->second.second) {
        ctx.reject(t.line(), "label outside observation span of `" + id + "`");
        continue;
      }
      const std::string raw = trim(*kind);
      cohort.participants[id].labels.push_back({time, classify_label(raw), raw});
    }
  }

  cohort.normalize();
  if (cohort.activity_count() + cohort.physiology_count() + cohort.label_count() == 0) {
    fail(ErrorKind::data, "empty-cohort",
         "no valid rows (" + std::to_string(cohort.rejected.size()) + " rejected)");
  }
  return cohort;
}

CohortSummary summarize(const CohortStore& cohort, int resolution_hours) {
  if (resolution_hours <= 0 || 24 % resolution_hours != 0) {
    fail(ErrorKind::config, "bad-resolution", "resolution must divide 24");
  }
  const Timestamp window = resolution_hours * kSecondsPerHour;
  CohortSummary s;
  s.resolution_hours = resolution_hours;
  s.participants = cohort.participants.size();

  std::size_t activity_missing = 0, physiology_missing = 0, sleep_missing = 0;
  std::size_t activity_missing_obs = 0, physiology_missing_obs = 0, sleep_missing_obs = 0;
  std::size_t total_windows = 0, activity_empty_windows = 0, physiology_empty_windows = 0;

  for (const auto& [id, p] : cohort.participants) {
    ParticipantSummary ps;
    ps.id = id;
    Timestamp lo = INT64_MAX, hi = INT64_MIN;
    auto extend = [&](Timestamp t) { lo = std::min(lo, t); hi = std::max(hi, t); };
    for (const auto& e : p.activity) extend(e.time);
    for (const auto& r : p.physiology) extend(r.time);
    for (const auto& l : p.labels) extend(l.time);
    for (const auto d : p.sleep_days) extend(d);

    if (lo <= hi) {
      const Timestamp first = day_start(lo);
      const std::size_t ndays = static_cast<std::size_t>((day_start(hi) - first) / kSecondsPerDay + 1);
      const std::size_t wpd = static_cast<std::size_t>(24 / resolution_hours);
      std::vector<std::uint8_t> act(ndays, 0), phys(ndays, 0), sleep(ndays, 0), any(ndays, 0);
      std::vector<std::uint8_t> act_w(ndays * wpd, 0), phys_w(ndays * wpd, 0);
      for (const auto& e : p.activity) {
        act[static_cast<std::size_t>((e.time - first) / kSecondsPerDay)] = 1;
        act_w[static_cast<std::size_t>((e.time - first) / window)] = 1;
      }
      for (const auto& r : p.physiology) {
        phys[static_cast<std::size_t>((r.time - first) / kSecondsPerDay)] = 1;
        phys_w[static_cast<std::size_t>((r.time - first) / window)] = 1;
      }
      for (const auto d : p.sleep_days) sleep[static_cast<std::size_t>((d - first) / kSecondsPerDay)] = 1;
      for (const auto& l : p.labels) any[static_cast<std::size_t>((l.time - first) / kSecondsPerDay)] = 1;
      ps.span_days = ndays;
      for (std::size_t d = 0; d < ndays; ++d) {
        const bool observed = act[d] || phys[d] || sleep[d] || any[d];
        ps.observed_days += observed;
        ps.activity_missing_days += !act[d];
        ps.physiology_missing_days += !phys[d];
        ps.sleep_missing_days += !sleep[d];
        if (observed) {
          activity_missing_obs += !act[d];
          physiology_missing_obs += !phys[d];
          sleep_missing_obs += !sleep[d];
        }
      }
      total_windows += ndays * wpd;
      for (std::size_t w = 0; w < ndays * wpd; ++w) {
        activity_empty_windows += !act_w[w];
        physiology_empty_windows += !phys_w[w];
      }
      std::set<Timestamp> agitation_windows;
      for (const auto& l : p.labels) {
        if (l.kind != LabelKind::agitation) continue;
        ++ps.agitation_events;
        ++s.quarter_counts[static_cast<std::size_t>(hour_of_day(l.time) / 6)];
        agitation_windows.insert(floor_div(l.time, window));
      }
      s.agitation_windows += agitation_windows.size();
    }
    s.total_days += ps.span_days;
    s.observed_days += ps.observed_days;
    activity_missing += ps.activity_missing_days;
    physiology_missing += ps.physiology_missing_days;
    sleep_missing += ps.sleep_missing_days;
    s.agitation_events += ps.agitation_events;
    s.participants_with_agitation += ps.agitation_events > 0;
    s.per_participant.push_back(std::move(ps));
  }

  auto frac = [](std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  s.activity_missing = frac(activity_missing, s.total_days);
  s.physiology_missing = frac(physiology_missing, s.total_days);
  s.sleep_missing = frac(sleep_missing, s.total_days);
  s.activity_missing_observed = frac(activity_missing_obs, s.observed_days);
  s.physiology_missing_observed = frac(physiology_missing_obs, s.observed_days);
  s.sleep_missing_observed = frac(sleep_missing_obs, s.observed_days);
  s.activity_missing_windows = frac(activity_empty_windows, total_windows);
  s.physiology_missing_windows = frac(physiology_empty_windows, total_windows);
  for (std::size_t q = 0; q < 4; ++q) s.quarter_fractions[q] = frac(s.quarter_counts[q], s.agitation_events);
  return s;
}

CohortPaths write_cohort_csv(const CohortStore& cohort, const std::string& dir) {
  std::filesystem::create_directories(dir);
  CohortPaths paths{dir + "/activity.csv", dir + "/physiology.csv", dir + "/labels.csv", ""};
  std::ofstream act(paths.activity), phys(paths.physiology), lab(paths.labels);
  if (!act || !phys || !lab) fail(ErrorKind::data, "write-failed", "cannot write CSV files into `" + dir + "`");
  act << "patient_id,location_name,date\n";
  phys << "patient_id,device_type,value,date\n";
  lab << "patient_id,type,date\n";
  for (const auto& [id, p] : cohort.participants) {
    const std::string qid = csv::quote(id);
    for (const auto& e : p.activity) {
      act << qid << ',' << location_name(e.location) << ',' << format_timestamp(e.time) << '\n';
    }
    for (const auto& r : p.physiology) {
      phys << qid << ',' << measure_name(r.measure) << ',' << format_double(r.value) << ','
           << format_timestamp(r.time) << '\n';
    }
    for (const auto& l : p.labels) {
      lab << qid << ',' << csv::quote(l.raw_type) << ',' << format_timestamp(l.time) << '\n';
    }
  }
  return paths;
}

}  // namespace agibench
