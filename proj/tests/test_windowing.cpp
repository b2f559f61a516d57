#include <doctest.h>

#include <set>

#include "agibench/windowing.hpp"
#include "support.hpp"

using namespace agibench;
using namespace testing_support;

namespace {

// Activity on every day in [0, days) so no window is a gap.
ParticipantRecord daily_activity(int days) {
  ParticipantRecord r;
  for (int d = 0; d < days; ++d) r.activity.push_back({at(d, 9), Location::kitchen});
  return r;
}

const Window& window_at(const WindowSet& ws, Timestamp start) {
  for (const auto& w : ws.windows) {
    if (w.start == start) return w;
  }
  FAIL("no window at " << format_timestamp(start));
  return ws.windows.front();
}

}  // namespace

TEST_CASE("single agitation at 14:30 labels only the preceding window") {
  auto r = daily_activity(2);
  r.labels.push_back({at(0, 14, 30), LabelKind::agitation, "Agitation"});
  const auto ws = build_windows(keep(single(r)), 6);
  REQUIRE(ws.windows.size() == 8);
  for (const auto& w : ws.windows) {
    const bool morning = w.start == at(0, 6);
    CHECK(w.label_next == morning);
    CHECK(w.agitation_now == (w.start == at(0, 12)));
  }
  CHECK(window_at(ws, at(0, 6)).has_label);
  CHECK(window_at(ws, at(0, 12)).day_quarter == 2);
  CHECK(ws.positive_count() == 1);
}

TEST_CASE("windows tile midnight to midnight and keep empty windows") {
  ParticipantRecord r;
  r.activity = {{at(0, 10), Location::kitchen}, {at(2, 23, 59), Location::lounge}};
  r.activity.push_back({at(1, 3), Location::bedroom});
  const auto ws = build_windows(keep(single(r)), 12);
  REQUIRE(ws.windows.size() == 6);
  CHECK(ws.windows.front().start == at(0, 0));
  CHECK(ws.windows.back().end() == at(3, 0));
  CHECK(ws.windows[1].activity.empty());
  CHECK(ws.windows[5].activity.size() == 1);
  // The last window has no successor and carries no label.
  CHECK_FALSE(ws.windows.back().has_label);
  CHECK(ws.labeled_count() == 5);
}

TEST_CASE("multiple episodes in one window label it once") {
  auto r = daily_activity(2);
  r.labels = {{at(0, 13), LabelKind::agitation, "Agitation"}, {at(0, 15), LabelKind::agitation, "Agitation"},
              {at(0, 19), LabelKind::other_clinical_event, "Blood pressure"}};
  const auto ws = build_windows(keep(single(r)), 6);
  CHECK(ws.positive_count() == 1);
  CHECK(window_at(ws, at(0, 6)).label_next);
  CHECK_FALSE(window_at(ws, at(0, 12)).label_next);  // other clinical events are not targets
}

TEST_CASE("windows before a monitoring gap carry no label") {
  auto r = daily_activity(1);
  r.activity.push_back({at(2, 9), Location::kitchen});  // day 1 has nothing
  const auto ws = build_windows(keep(single(r)), 6);
  REQUIRE(ws.windows.size() == 12);
  // 18:00 on day 0 is followed by an unobserved day; all of day 1 too,
  // except its last window whose successor is observed.
  CHECK_FALSE(window_at(ws, at(0, 18)).has_label);
  CHECK_FALSE(window_at(ws, at(1, 0)).has_label);
  CHECK(window_at(ws, at(1, 18)).has_label);
  CHECK(ws.excluded_gap == 4);
  CHECK(ws.labeled_count() == 3 + 1 + 3);
}

TEST_CASE("a positive successor is never treated as a gap") {
  auto r = daily_activity(1);
  r.activity.push_back({at(2, 9), Location::kitchen});
  r.labels.push_back({at(1, 14), LabelKind::agitation, "Agitation"});
  const auto ws = build_windows(keep(single(r)), 6);
  CHECK(window_at(ws, at(1, 6)).has_label);
  CHECK(window_at(ws, at(1, 6)).label_next);
}

TEST_CASE("bad resolution is rejected") {
  try {
    (void)build_windows(keep(single(daily_activity(1))), 8);
    FAIL("expected bad-resolution");
  } catch (const Error& e) {
    CHECK(e.code() == "bad-resolution");
    CHECK(std::string(e.what()).find("resolution must be one of 6, 12, 24") != std::string::npos);
  }
}

TEST_CASE("sequence counts") {
  const auto cohort = single(daily_activity(3));
  const auto ws = build_windows(cohort, 6);  // 12 windows, 11 labeled
  CHECK(make_sequences(ws, 1).size() == ws.labeled_count());
  CHECK(make_sequences(ws, 2).size() == 10);
  CHECK(make_sequences(ws, 12).size() == 0);
  CHECK_THROWS_AS(make_sequences(ws, 0), Error);

  // 10 consecutive labeled windows, n = 2: 9 samples.
  auto r = daily_activity(3);
  const auto ws24 = build_windows(keep(single(r)), 24);
  CHECK(ws24.labeled_count() == 2);
  const auto ws6 = build_windows(keep(single(daily_activity(3))), 6);
  std::size_t labeled = 0;
  for (std::size_t i = 0; i < 10; ++i) labeled += ws6.windows[i].has_label;
  REQUIRE(labeled == 10);
  WindowSet ten = ws6;
  ten.windows.resize(10);
  CHECK(make_sequences(ten, 2).size() == 9);

  for (const auto& s : make_sequences(ws, 3)) {
    REQUIRE(s.windows.size() == 3);
    CHECK(s.windows[1] == s.windows[0] + 1);
    CHECK(s.windows[2] == s.windows[1] + 1);
    CHECK(s.label == ws.windows[s.last()].label_next);
  }
}

TEST_CASE("sequences never cross participants") {
  CohortStore c;
  c.participants.emplace("A", daily_activity(1));
  c.participants.emplace("B", daily_activity(1));
  const auto ws = build_windows(c, 6);
  CHECK(ws.windows.size() == 8);
  // Each participant has 3 labeled windows; n = 3 needs two predecessors.
  const auto seqs = make_sequences(ws, 3);
  CHECK(seqs.size() == 2);
  for (const auto& s : seqs) CHECK(ws.windows[s.windows[0]].participant == ws.windows[s.last()].participant);
}

TEST_CASE("history statistics") {
  auto r = daily_activity(2);
  // Episodes in windows 0, 1 and 2: every positive window is itself agitated.
  r.labels = {{at(0, 1), LabelKind::agitation, "Agitation"},
              {at(0, 7), LabelKind::agitation, "Agitation"},
              {at(0, 13), LabelKind::agitation, "Agitation"}};
  auto h = history_statistics(build_windows(keep(single(r)), 6));
  CHECK(h.positives == 2);
  CHECK(h.fraction_without_current == 0.0);

  auto r2 = daily_activity(2);
  r2.labels = {{at(0, 14), LabelKind::agitation, "Agitation"}, {at(1, 14), LabelKind::agitation, "Agitation"}};
  h = history_statistics(build_windows(keep(single(r2)), 6));
  CHECK(h.positives == 2);
  CHECK(h.fraction_without_current == 1.0);

  CHECK_THROWS_AS(history_statistics(build_windows(keep(single(daily_activity(2))), 6)), Error);
}

namespace {

using Key = std::pair<std::string, Timestamp>;

std::set<Key> episode_windows(const SyntheticManifest& m) {
  std::set<Key> out;
  for (const auto& [id, t] : m.episodes) out.insert({id, floor_div(t, 6 * kSecondsPerHour) * 6 * kSecondsPerHour});
  return out;
}

}  // namespace

TEST_CASE("positive adjacency and history match the generator manifest") {
  SyntheticSpec spec;
  spec.seed = 9;
  spec.agitation_rate = 0.3;  // dense enough that adjacent episodes occur
  const auto syn = generate_synthetic(spec);
  const auto ws = build_windows(syn.cohort, 6);

  const auto ep = episode_windows(syn.manifest);
  std::size_t adjacent = 0;
  for (const auto& [id, start] : ep) adjacent += ep.count({id, start - 6 * kSecondsPerHour});
  const double manifest_adjacent = static_cast<double>(adjacent) / static_cast<double>(ep.size());
  REQUIRE(adjacent > 0);

  std::size_t positives = 0, follow = 0;
  for (std::size_t i = 0; i < ws.windows.size(); ++i) {
    const auto& w = ws.windows[i];
    if (!w.has_label || !w.label_next) continue;
    ++positives;
    if (w.position > 0 && ws.windows[i - 1].has_label && ws.windows[i - 1].label_next) ++follow;
  }
  CHECK(positives == ep.size());
  CHECK(static_cast<double>(follow) / static_cast<double>(positives) == doctest::Approx(manifest_adjacent));

  // A positive window is agitated itself exactly when its own window holds an episode.
  const auto h = history_statistics(ws);
  CHECK(h.fraction_without_current == doctest::Approx(1.0 - manifest_adjacent));
}
