#include "agibench/windowing.hpp"

#include <algorithm>
#include <fstream>

namespace agibench {

std::size_t WindowSet::labeled_count() const {
  return static_cast<std::size_t>(std::count_if(windows.begin(), windows.end(), [](const Window& w) { return w.has_label; }));
}

std::size_t WindowSet::positive_count() const {
  return static_cast<std::size_t>(
      std::count_if(windows.begin(), windows.end(), [](const Window& w) { return w.has_label && w.label_next; }));
}

namespace {

template <typename T>
std::span<const T> slice(const std::vector<T>& events, Timestamp lo, Timestamp hi) {
  auto b = std::lower_bound(events.begin(), events.end(), lo, [](const T& e, Timestamp t) { return e.time < t; });
  auto e = std::lower_bound(b, events.end(), hi, [](const T& ev, Timestamp t) { return ev.time < t; });
  return {events.data() + (b - events.begin()), static_cast<std::size_t>(e - b)};
}

}  // namespace

WindowSet build_windows(const CohortStore& cohort, int resolution_hours) {
  if (resolution_hours != 6 && resolution_hours != 12 && resolution_hours != 24) {
    fail(ErrorKind::config, "bad-resolution", "resolution must be one of 6, 12, 24");
  }
  const Timestamp width = resolution_hours * kSecondsPerHour;
  WindowSet set;
  set.resolution_hours = resolution_hours;

  std::size_t pindex = 0;
  for (const auto& [id, p] : cohort.participants) {
    Timestamp lo = INT64_MAX, hi = INT64_MIN;
    auto extend = [&](Timestamp t) { lo = std::min(lo, t); hi = std::max(hi, t); };
    for (const auto& e : p.activity) extend(e.time);
    for (const auto& r : p.physiology) extend(r.time);
    for (const auto& l : p.labels) extend(l.time);
    if (lo > hi) {
      ++pindex;
      continue;
    }
    const Timestamp first = day_start(lo);
    const Timestamp last = day_start(hi) + kSecondsPerDay;
    const auto count = static_cast<std::size_t>((last - first) / width);

    // Days with any activity, for gap detection.
    const auto ndays = static_cast<std::size_t>((last - first) / kSecondsPerDay);
    std::vector<std::uint8_t> activity_day(ndays, 0);
    for (const auto& e : p.activity) activity_day[static_cast<std::size_t>((e.time - first) / kSecondsPerDay)] = 1;

    std::vector<std::uint8_t> agitation(count, 0);
    for (const auto& l : p.labels) {
      if (l.kind == LabelKind::agitation) agitation[static_cast<std::size_t>((l.time - first) / width)] = 1;
    }

    const std::size_t base = set.windows.size();
    for (std::size_t i = 0; i < count; ++i) {
      Window w;
      w.participant = &id;
      w.participant_index = pindex;
      w.position = i;
      w.start = first + static_cast<Timestamp>(i) * width;
      w.resolution_hours = resolution_hours;
      w.activity = slice(p.activity, w.start, w.end());
      w.physiology = slice(p.physiology, w.start, w.end());
      w.agitation_now = agitation[i] != 0;
      w.day_quarter = hour_of_day(w.start) / 6;
      set.windows.push_back(w);
    }
    for (std::size_t i = 0; i + 1 < count; ++i) {
      Window& w = set.windows[base + i];
      const bool next_positive = agitation[i + 1] != 0;
      const auto next_day = static_cast<std::size_t>((w.end() - first) / kSecondsPerDay);
      if (!next_positive && !activity_day[next_day]) {
        ++set.excluded_gap;
        continue;
      }
      w.has_label = true;
      w.label_next = next_positive;
    }
    ++pindex;
  }
  return set;
}

HistoryStatistics history_statistics(const WindowSet& windows) {
  HistoryStatistics s;
  const auto& ws = windows.windows;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (!ws[i].has_label || !ws[i].label_next) continue;
    ++s.positives;
    // The labeled window is the one before the episode; its own agitation
    // flag says whether the episode was preceded by agitation.
    s.positives_without_current += !ws[i].agitation_now;
  }
  if (s.positives == 0) fail(ErrorKind::data, "no-positives", "no positive windows");
  s.fraction_without_current = static_cast<double>(s.positives_without_current) / static_cast<double>(s.positives);
  return s;
}

std::vector<SequenceSample> make_sequences(const WindowSet& windows, std::size_t n) {
  if (n < 1) fail(ErrorKind::config, "bad-sequence-length", "n must be at least 1");
  std::vector<SequenceSample> out;
  const auto& ws = windows.windows;
  for (std::size_t i = 0; i < ws.size(); ++i) {
    if (!ws[i].has_label || ws[i].position + 1 < n) continue;
    SequenceSample s;
    s.windows.reserve(n);
    for (std::size_t k = n; k-- > 0;) s.windows.push_back(i - k);
    s.label = ws[i].label_next;
    out.push_back(std::move(s));
  }
  return out;
}

void write_windows_csv(const WindowSet& windows, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::data, "write-failed", "cannot write `" + path + "`");
  f << "participant_id,window_start,resolution_hours,day_quarter,agitation_now,has_label,label_next,"
       "activity_events,physiology_readings\n";
  for (const auto& w : windows.windows) {
    f << *w.participant << ',' << format_timestamp(w.start) << ',' << w.resolution_hours << ',' << w.day_quarter
      << ',' << int(w.agitation_now) << ',' << int(w.has_label) << ',' << int(w.label_next) << ','
      << w.activity.size() << ',' << w.physiology.size() << '\n';
  }
}

}  // namespace agibench
