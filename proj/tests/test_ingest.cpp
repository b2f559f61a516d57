#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "agibench/features.hpp"
#include "agibench/ingest.hpp"
#include "agibench/metrics.hpp"
#include "agibench/windowing.hpp"
#include "support.hpp"

using namespace agibench;
using namespace testing_support;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

void shuffle_rows(const std::string& path, std::uint64_t seed) {
  auto lines = lines_of(read_text(path));
  std::vector<std::string> body(lines.begin() + 1, lines.end());
  Rng r(seed);
  r.shuffle(body);
  std::string text = lines[0] + "\n";
  for (const auto& l : body) text += l + "\n";
  write_text(path, text);
}

}  // namespace

TEST_CASE("location and measure spellings") {
  CHECK(parse_location("Back Door") == Location::back_door);
  CHECK(parse_location("fridge-door") == Location::fridge_door);
  CHECK(parse_location("Hallway") == Location::hallway);
  CHECK_FALSE(parse_location("garage").has_value());
  CHECK(parse_measure("Heart rate") == Measure::heart_rate);
  CHECK(parse_measure("Diastolic blood pressure") == Measure::diastolic_bp);
  CHECK(parse_measure("body-temperature") == Measure::body_temperature);
  CHECK(classify_label("Agitation") == LabelKind::agitation);
  CHECK(classify_label("Blood pressure") == LabelKind::other_clinical_event);
  CHECK(is_private(Location::bathroom));
  CHECK(is_private(Location::bedroom));
  CHECK_FALSE(is_private(Location::kitchen));
}

TEST_CASE("unknown location row is rejected and counted") {
  const auto dir = scratch_dir("garage");
  write_text(dir + "/a.csv", "patient_id,location_name,date\nP1,garage,2020-01-01 10:00:00\n");
  write_text(dir + "/p.csv", "patient_id,device_type,value,date\nP1,Heart rate,70,2020-01-01 11:00:00\n");
  write_text(dir + "/l.csv", "patient_id,type,date\n");
  const auto c = load_cohort({dir + "/a.csv", dir + "/p.csv", dir + "/l.csv", ""});
  CHECK(c.activity_count() == 0);
  REQUIRE(c.rejected.size() == 1);
  CHECK(c.rejected[0].file == "activity");
  CHECK(c.rejected[0].line == 2);
  CHECK(c.physiology_count() == 1);
}

TEST_CASE("loader errors") {
  const auto dir = scratch_dir("errors");
  write_text(dir + "/a.csv", "patient_id,where,date\nP1,Hallway,2020-01-01 10:00:00\n");
  write_text(dir + "/p.csv", "patient_id,device_type,value,date\n");
  write_text(dir + "/l.csv", "patient_id,type,date\n");
  try {
    (void)load_cohort({dir + "/a.csv", dir + "/p.csv", dir + "/l.csv", ""});
    FAIL("expected header-mismatch");
  } catch (const Error& e) {
    CHECK(e.code() == "header-mismatch");
    CHECK(e.kind() == ErrorKind::data);
    CHECK(std::string(e.what()).find("location_name") != std::string::npos);
  }

  SchemaMap schema;
  schema.activity_location = "where";
  const auto c = load_cohort({dir + "/a.csv", dir + "/p.csv", dir + "/l.csv", ""}, schema);
  CHECK(c.activity_count() == 1);

  try {
    (void)load_cohort({dir + "/nope.csv", dir + "/p.csv", dir + "/l.csv", ""});
    FAIL("expected file-missing");
  } catch (const Error& e) {
    CHECK(e.code() == "file-missing");
  }

  write_text(dir + "/bad.csv", "patient_id,location_name,date\nP1,Hallway,not a time\n");
  try {
    (void)load_cohort({dir + "/bad.csv", dir + "/p.csv", dir + "/l.csv", ""});
    FAIL("expected empty-cohort");
  } catch (const Error& e) {
    CHECK(e.code() == "empty-cohort");
  }
}

TEST_CASE("schema overrides load from a key-value file") {
  const auto dir = scratch_dir("schema");
  write_text(dir + "/schema.conf", "activity.location = where\nlabels.kind = label\n");
  const auto s = SchemaMap::load(dir + "/schema.conf");
  CHECK(s.activity_location == "where");
  CHECK(s.labels_kind == "label");
  CHECK(s.activity_time == "date");
  write_text(dir + "/bad.conf", "activity.colour = x\n");
  CHECK_THROWS_AS(SchemaMap::load(dir + "/bad.conf"), Error);
}

TEST_CASE("labels outside the observation span are rejected") {
  const auto dir = scratch_dir("span");
  write_text(dir + "/a.csv", "patient_id,location_name,date\nP1,Hallway,2020-01-01 10:00:00\n");
  write_text(dir + "/p.csv", "patient_id,device_type,value,date\n");
  write_text(dir + "/l.csv", "patient_id,type,date\nP1,Agitation,2020-01-01 12:00:00\nP1,Agitation,2020-03-01 12:00:00\n"
                             "P9,Agitation,2020-01-01 12:00:00\n");
  const auto c = load_cohort({dir + "/a.csv", dir + "/p.csv", dir + "/l.csv", ""});
  CHECK(c.label_count() == 1);
  CHECK(c.rejected.size() == 2);
  CHECK(c.participants.size() == 1);
}

TEST_CASE("synthetic cohort round-trips through CSV") {
  SyntheticSpec spec;
  spec.participants = 6;
  spec.days = 20;
  spec.seed = 7;
  const auto syn = generate_synthetic(spec);
  const auto dir = scratch_dir("roundtrip");
  const auto paths = write_cohort_csv(syn.cohort, dir);
  const auto loaded = load_cohort(paths);
  CHECK(loaded.rejected.empty());
  CHECK(loaded.activity_count() == syn.cohort.activity_count());
  CHECK(loaded.physiology_count() == syn.cohort.physiology_count());
  CHECK(loaded.label_count() == syn.cohort.label_count());
  CHECK(loaded == syn.cohort);
}

TEST_CASE("row order does not matter") {
  SyntheticSpec spec;
  spec.participants = 4;
  spec.days = 10;
  spec.seed = 3;
  const auto syn = generate_synthetic(spec);
  const auto dir = scratch_dir("shuffle");
  const auto paths = write_cohort_csv(syn.cohort, dir);
  const auto before = load_cohort(paths);
  shuffle_rows(paths.activity, 1);
  shuffle_rows(paths.physiology, 2);
  shuffle_rows(paths.labels, 3);
  const auto after = load_cohort(paths);
  CHECK(after == before);
}

TEST_CASE("generator output is byte-identical for a seed") {
  SyntheticSpec spec;
  spec.participants = 5;
  spec.days = 15;
  spec.seed = 1;
  const auto d1 = scratch_dir("det1"), d2 = scratch_dir("det2");
  const auto p1 = write_cohort_csv(generate_synthetic(spec).cohort, d1);
  const auto p2 = write_cohort_csv(generate_synthetic(spec).cohort, d2);
  CHECK(read_text(p1.activity) == read_text(p2.activity));
  CHECK(read_text(p1.physiology) == read_text(p2.physiology));
  CHECK(read_text(p1.labels) == read_text(p2.labels));
  CHECK(manifest_json(generate_synthetic(spec).manifest) == manifest_json(generate_synthetic(spec).manifest));
  spec.seed = 2;
  const auto d3 = scratch_dir("det3");
  const auto p3 = write_cohort_csv(generate_synthetic(spec).cohort, d3);
  CHECK(read_text(p1.activity) != read_text(p3.activity));
}

TEST_CASE("generator rejects nonpositive counts") {
  SyntheticSpec spec;
  spec.participants = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
  spec.participants = 1;
  spec.days = 0;
  CHECK_THROWS_AS(generate_synthetic(spec), Error);
}

TEST_CASE("episode count tracks the configured rate over 100 seeds") {
  SyntheticSpec spec;  // 20 participants, 60 days, 135/2803 per day
  const double expected = spec.agitation_rate * spec.participants * spec.days;
  double total = 0.0;
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    spec.seed = seed;
    const auto n = static_cast<double>(generate_synthetic(spec).manifest.episodes.size());
    total += n;
    within += std::abs(n - expected) <= 0.3 * expected;
  }
  CHECK(std::abs(total / 100.0 - expected) <= 0.3 * expected);
  CHECK(within >= 90);
}

TEST_CASE("episodes follow the day-quarter weights") {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.participants = 40;
  spec.days = 200;
  const auto syn = generate_synthetic(spec);
  const auto s = summarize(syn.cohort, 6);
  CHECK(s.quarter_counts[0] == 0);
  CHECK(s.quarter_fractions[2] == doctest::Approx(0.5852).epsilon(0.1));
  CHECK(s.quarter_fractions[1] < s.quarter_fractions[3]);
}

namespace {

// Rank-sum p-value (two-sided) comparing num-transitions of precursor windows
// against all other windows, after removing each participant's per-quarter mean.
double precursor_transition_p(double strength, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.seed = seed;
  spec.precursor_strength = strength;
  const auto syn = generate_synthetic(spec);
  const auto ws = build_windows(syn.cohort, 6);
  std::vector<std::size_t> all(ws.windows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto fm = extract_features(ws, all, {});
  const std::size_t col = feature_index("num-transitions");

  std::map<std::pair<std::size_t, int>, std::pair<double, int>> cell;
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto& c = cell[{ws.windows[i].participant_index, ws.windows[i].day_quarter}];
    c.first += fm.values(i, col);
    c.second += 1;
  }
  std::map<std::pair<std::string, Timestamp>, bool> planted;
  for (const auto& p : syn.manifest.planted) {
    if (p.role == "precursor") planted[{p.participant, p.start}] = true;
  }
  std::vector<double> a, b;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& w = ws.windows[i];
    const auto& c = cell[{w.participant_index, w.day_quarter}];
    const double resid = fm.values(i, col) - c.first / c.second;
    (planted.count({*w.participant, w.start}) ? a : b).push_back(resid);
  }
  REQUIRE(a.size() > 10);
  const auto r = rank_sum_test(a, b);
  return 2.0 * std::min(r.p_greater, 1.0 - r.p_greater);
}

}  // namespace

TEST_CASE("strength 0 leaves precursor windows indistinguishable") {
  CHECK(precursor_transition_p(0.0, 11) > 0.01);
  // The same test has power when the plant is present.
  CHECK(precursor_transition_p(1.0, 11) < 0.01);
}

TEST_CASE("summary of a single event") {
  ParticipantRecord r;
  r.activity.push_back({at(0, 10), Location::kitchen});
  const auto s = summarize(single(r), 6);
  CHECK(s.participants == 1);
  CHECK(s.total_days == 1);
  CHECK(s.agitation_events == 0);
  CHECK(s.activity_missing == 0.0);
  CHECK(s.physiology_missing == 1.0);
  CHECK(summarize(CohortStore{}, 6).total_days == 0);
}

TEST_CASE("summary counts missing days over the span") {
  ParticipantRecord r;
  r.activity = {{at(0, 10), Location::kitchen}, {at(3, 10), Location::kitchen}};
  r.physiology = {{at(1, 9), Measure::heart_rate, 70.0}};
  r.labels = {{at(2, 14, 30), LabelKind::agitation, "Agitation"}, {at(2, 20), LabelKind::agitation, "Agitation"}};
  const auto s = summarize(single(r), 6);
  CHECK(s.total_days == 4);
  CHECK(s.observed_days == 4);
  CHECK(s.activity_missing == doctest::Approx(0.5));
  CHECK(s.physiology_missing == doctest::Approx(0.75));
  CHECK(s.sleep_missing == 1.0);
  CHECK(s.agitation_events == 2);
  CHECK(s.quarter_counts[2] == 1);
  CHECK(s.quarter_counts[3] == 1);
  CHECK(s.quarter_fractions[2] == 0.5);
  CHECK(s.agitation_windows == 2);
  CHECK(summarize(single(r), 24).agitation_windows == 1);
  CHECK_THROWS_AS(summarize(single(r), 7), Error);
}
