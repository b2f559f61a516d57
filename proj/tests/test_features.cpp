#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "agibench/features.hpp"
#include "reference.hpp"
#include "support.hpp"

using namespace agibench;
using namespace testing_support;

namespace {

std::array<double, kStatisticalFeatureCount> stats_of(const Window& w) {
  std::array<double, kStatisticalFeatureCount> out{};
  statistical_activity_features(w, out);
  return out;
}

std::array<double, kContextualFeatureCount> context_of(const Window& w) {
  std::array<double, kContextualFeatureCount> out{};
  contextual_activity_features(w, out);
  return out;
}

std::size_t stat(Location l, int s) { return static_cast<std::size_t>(l) * 4 + static_cast<std::size_t>(s); }

// One participant, events given as (hour offset in the 6h window at 06:00, location).
WindowSet one_window(const std::vector<std::pair<double, Location>>& events) {
  ParticipantRecord r;
  for (const auto& [h, l] : events) r.activity.push_back({at(0, 6) + static_cast<Timestamp>(h * 3600), l});
  r.activity.push_back({at(0, 1), Location::back_door});  // pins the tiling to day 0
  return build_windows(keep(single(r)), 6);
}

const Window& morning(const WindowSet& ws) { return ws.windows[1]; }

}  // namespace

TEST_CASE("feature names are canonical") {
  const auto names = feature_names();
  REQUIRE(names.size() == 48);
  CHECK(names[0] == "back-door-count-sum");
  CHECK(names[stat(Location::hallway, 3)] == "hallway-count-std");
  CHECK(names[32] == "total-events");
  CHECK(names[39] == "num-transitions");
  CHECK(names[40] == "body-temperature");
  CHECK(names[44] == "heart-rate");
  FeatureOptions both{true, true};
  CHECK(feature_names(both).size() == 50);
  CHECK(feature_names(both)[48] == "day-quarter");
  CHECK(feature_names(both)[49] == "agitation-now");
  CHECK_THROWS_AS(feature_index("hallway-count-median"), Error);
}

TEST_CASE("empty window gives zero statistical features") {
  ParticipantRecord r;
  r.activity.push_back({at(0, 20), Location::lounge});
  const auto ws = build_windows(keep(single(r)), 6);
  for (double v : stats_of(ws.windows[0])) CHECK(v == 0.0);
  const auto c = context_of(ws.windows[0]);
  CHECK(c[0] == 0.0);
  CHECK(c[4] == 0.0);
  CHECK(c[5] == 0.0);
}

TEST_CASE("constant hourly hallway counts") {
  std::vector<std::pair<double, Location>> ev;
  for (int h = 0; h < 6; ++h) {
    ev.push_back({h + 0.1, Location::hallway});
    ev.push_back({h + 0.6, Location::hallway});
  }
  const auto s = stats_of(morning(one_window(ev)));
  CHECK(s[stat(Location::hallway, 0)] == 12);
  CHECK(s[stat(Location::hallway, 1)] == 2);
  CHECK(s[stat(Location::hallway, 2)] == 2);
  CHECK(s[stat(Location::hallway, 3)] == 0);
}

TEST_CASE("kitchen counts 0,0,3,1,0,2") {
  const std::vector<std::pair<double, Location>> ev = {{2.1, Location::kitchen}, {2.2, Location::kitchen},
                                                       {2.9, Location::kitchen}, {3.5, Location::kitchen},
                                                       {5.0, Location::kitchen}, {5.99, Location::kitchen}};
  const auto s = stats_of(morning(one_window(ev)));
  CHECK(s[stat(Location::kitchen, 0)] == 6);
  CHECK(s[stat(Location::kitchen, 1)] == 3);
  CHECK(s[stat(Location::kitchen, 2)] == 1);
  CHECK(s[stat(Location::kitchen, 3)] == doctest::Approx(std::sqrt(4.0 / 3.0)).epsilon(1e-12));
  CHECK(s[stat(Location::kitchen, 3)] == doctest::Approx(1.1547).epsilon(1e-4));
}

TEST_CASE("all events in the bedroom") {
  const auto c = context_of(morning(one_window({{0.5, Location::bedroom}, {1.5, Location::bedroom}, {4, Location::bedroom}})));
  CHECK(c[0] == 3);
  CHECK(c[1] == 1);
  CHECK(c[2] == 0.125);
  CHECK(c[4] == 0.0);
  CHECK(c[5] == 1.0);
  CHECK(c[6] == 0);
  CHECK(c[7] == 0);
}

TEST_CASE("kitchen to hallway to kitchen") {
  const auto c = context_of(morning(one_window({{1, Location::kitchen}, {2, Location::hallway}, {3, Location::kitchen}})));
  CHECK(c[7] == 2);
  CHECK(c[6] == 1);
}

TEST_CASE("two kitchens and two lounges") {
  const auto c = context_of(morning(
      one_window({{1, Location::kitchen}, {2, Location::lounge}, {3, Location::kitchen}, {4, Location::lounge}})));
  CHECK(c[4] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(c[5] == 0.5);
  CHECK(c[3] == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(c[6] == 2);  // K L K, L K L
}

TEST_CASE("physiology means and missingness") {
  ParticipantRecord r;
  r.activity.push_back({at(0, 7), Location::kitchen});
  r.physiology = {{at(0, 8), Measure::heart_rate, 70.0}, {at(0, 10), Measure::heart_rate, 74.0},
                  {at(0, 13), Measure::heart_rate, 90.0}};
  const auto ws = build_windows(keep(single(r)), 6);
  std::array<double, kPhysiologyFeatureCount> v{};
  std::array<std::uint8_t, kPhysiologyFeatureCount> miss{};
  physiology_features(ws.windows[1], v, miss);
  CHECK(v[static_cast<std::size_t>(Measure::heart_rate)] == 72.0);
  CHECK(miss[static_cast<std::size_t>(Measure::heart_rate)] == 0);
  CHECK(miss[static_cast<std::size_t>(Measure::body_weight)] == 1);
  CHECK(std::isnan(v[static_cast<std::size_t>(Measure::body_weight)]));
}

TEST_CASE("context columns") {
  ParticipantRecord r;
  r.activity.push_back({at(0, 7), Location::kitchen});
  r.activity.push_back({at(1, 7), Location::kitchen});
  r.labels.push_back({at(0, 15), LabelKind::agitation, "Agitation"});
  const auto ws = build_windows(keep(single(r)), 6);
  const std::vector<std::size_t> idx{1, 2, 3};
  const auto fm = extract_features(ws, idx, FeatureOptions{true, true});
  REQUIRE(fm.cols() == 50);
  CHECK(fm.values(0, 48) == 1);
  CHECK(fm.values(1, 48) == 2);
  CHECK(fm.values(2, 48) == 3);
  CHECK(fm.values(0, 49) == 0);
  CHECK(fm.values(1, 49) == 1);
}

TEST_CASE("1000 random windows equal the brute-force recomputation") {
  SyntheticSpec spec;
  spec.participants = 8;
  spec.days = 30;
  spec.seed = 21;
  const auto syn = generate_synthetic(spec);
  Rng rng(99);
  const int resolutions[] = {6, 12, 24};
  std::size_t checked = 0;
  for (int res : resolutions) {
    const auto ws = build_windows(syn.cohort, res);
    std::vector<std::size_t> idx;
    for (int i = 0; i < 334; ++i) idx.push_back(rng.index(ws.windows.size()));
    const auto fm = extract_features(ws, idx, {}, 2);
    for (std::size_t r = 0; r < idx.size(); ++r) {
      const auto& w = ws.windows[idx[r]];
      const auto& rec = syn.cohort.participants.at(*w.participant);
      const auto expect = ref::activity_features(rec, w.start, res);
      for (std::size_t c = 0; c < 40; ++c) {
        const bool count = c >= 32 ? (c == 32 || c == 33 || c == 38 || c == 39) : (c % 4 == 0 || c % 4 == 1);
        if (count) {
          REQUIRE(fm.values(r, c) == expect[c]);
        } else {
          REQUIRE(std::abs(fm.values(r, c) - expect[c]) <= 1e-9);
        }
      }
      ++checked;
    }
  }
  CHECK(checked == 1002);
}

TEST_CASE("physiology means equal a groupby over the raw CSV") {
  SyntheticSpec spec;
  spec.participants = 5;
  spec.days = 20;
  spec.seed = 4;
  const auto syn = generate_synthetic(spec);
  const auto dir = scratch_dir("groupby");
  const auto paths = write_cohort_csv(syn.cohort, dir);

  // (participant, window start, measure) -> (sum, n), straight from the text.
  std::map<std::tuple<std::string, Timestamp, std::string>, std::pair<double, int>> group;
  std::istringstream in(read_text(paths.physiology));
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) {
    const auto f = split(line, ',');
    Timestamp t = 0;
    REQUIRE(parse_timestamp(f[3], t));
    auto& g = group[{f[0], floor_div(t, 6 * kSecondsPerHour) * 6 * kSecondsPerHour, f[1]}];
    g.first += std::stod(f[2]);
    g.second += 1;
  }

  const auto ws = build_windows(syn.cohort, 6);
  std::vector<std::size_t> all(ws.windows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto fm = extract_features(ws, all, {});
  std::size_t present = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    for (std::size_t m = 0; m < kMeasureCount; ++m) {
      const auto key = std::make_tuple(*ws.windows[i].participant, ws.windows[i].start,
                                       std::string(measure_name(static_cast<Measure>(m))));
      const auto it = group.find(key);
      const std::size_t col = 40 + m;
      if (it == group.end()) {
        CHECK(fm.is_missing(i, col));
      } else {
        ++present;
        CHECK_FALSE(fm.is_missing(i, col));
        CHECK(std::abs(fm.values(i, col) - it->second.first / it->second.second) <= 1e-9);
      }
    }
  }
  CHECK(present > 100);
}

TEST_CASE("extraction does not depend on thread count") {
  SyntheticSpec spec;
  spec.participants = 4;
  spec.days = 15;
  const auto syn = generate_synthetic(spec);
  const auto ws = build_windows(syn.cohort, 6);
  std::vector<std::size_t> all(ws.windows.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  const auto a = extract_features(ws, all, FeatureOptions{true, true}, 1);
  const auto b = extract_features(ws, all, FeatureOptions{true, true}, 4);
  CHECK(a.missing == b.missing);
  for (std::size_t i = 0; i < a.values.data().size(); ++i) {
    const double x = a.values.data()[i], y = b.values.data()[i];
    CHECK(((std::isnan(x) && std::isnan(y)) || x == y));
  }
}

namespace {

FeatureMatrix column(std::vector<double> values, std::vector<std::uint8_t> missing = {}) {
  FeatureMatrix f;
  f.values = Matrix(values.size(), 1);
  for (std::size_t i = 0; i < values.size(); ++i) f.values(i, 0) = values[i];
  f.missing = missing.empty() ? std::vector<std::uint8_t>(values.size(), 0) : missing;
  f.names = {"x"};
  return f;
}

}  // namespace

TEST_CASE("preprocessor on rows 1 and 3") {
  const auto s = fit_preprocessor(column({1, 3}));
  CHECK(s.impute_mean[0] == 2);
  CHECK(s.mean[0] == 2);
  CHECK(s.scale[0] == 1);
  CHECK(s.min[0] == -1);
  CHECK(s.max[0] == 1);
  const auto own = apply_preprocessor(s, column({1, 3}));
  CHECK(own(0, 0) == 0.0);
  CHECK(own(1, 0) == 1.0);
  // Standardized value 5 lands at 3 after the [-1, 1] -> [0, 1] map; no clipping.
  CHECK(apply_preprocessor(s, column({7}))(0, 0) == 3.0);
  // The training mean standardizes to 0, which is the midpoint here.
  CHECK(apply_preprocessor(s, column({2}))(0, 0) == 0.5);
}

TEST_CASE("preprocessor degenerate and missing cases") {
  const auto s = fit_preprocessor(column({4, 4, 4}));
  CHECK(s.scale[0] == 1);
  const auto out = apply_preprocessor(s, column({4, 4}));
  CHECK(out(0, 0) == out(1, 0));

  const auto m = fit_preprocessor(column({1, 0, 5}, {0, 1, 0}));
  CHECK(m.impute_mean[0] == 3);
  CHECK(m.all_missing.empty());
  CHECK(apply_preprocessor(m, column({0}, {1}))(0, 0) == doctest::Approx(0.5));

  const auto all = fit_preprocessor(column({0, 0}, {1, 1}));
  CHECK(all.all_missing == std::vector<std::size_t>{0});
  CHECK(std::isfinite(apply_preprocessor(all, column({9}))(0, 0)));
  CHECK_THROWS_AS(fit_preprocessor(column({1})), Error);
}

TEST_CASE("preprocessor outputs stay in [0, 1] on training rows and ignore row order") {
  Rng r(5);
  FeatureMatrix f;
  f.values = Matrix(200, 6);
  f.missing.assign(1200, 0);
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t c = 0; c < 6; ++c) {
      f.values(i, c) = r.normal() * static_cast<double>(c + 1) + static_cast<double>(c);
      f.missing[i * 6 + c] = r.bernoulli(0.1);
    }
  }
  f.names = {"a", "b", "c", "d", "e", "f"};
  const auto s = fit_preprocessor(f);
  const auto out = apply_preprocessor(s, f);
  for (double v : out.data()) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1 + 1e-12);
  }
  std::vector<std::size_t> order(200);
  for (std::size_t i = 0; i < 200; ++i) order[i] = 199 - i;
  const auto rev = apply_preprocessor(s, f.select_rows(order));
  for (std::size_t i = 0; i < 200; ++i) {
    for (std::size_t c = 0; c < 6; ++c) CHECK(rev(199 - i, c) == out(i, c));
  }
  CHECK(s.hash() == fit_preprocessor(f).hash());
  CHECK_THROWS_AS(apply_preprocessor(s, column({1})), Error);
}
