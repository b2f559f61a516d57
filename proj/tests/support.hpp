#pragma once

// Small builders shared by the unit tests.

#include <deque>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "agibench/ingest.hpp"

namespace testing_support {

using namespace agibench;

inline Timestamp at(int day, int hour, int minute = 0, int second = 0) {
  return make_timestamp(2020, 1, 1) + day * kSecondsPerDay + hour * kSecondsPerHour + minute * 60 + second;
}

inline ParticipantRecord with_activity(std::vector<ActivityEvent> events) {
  ParticipantRecord r;
  r.activity = std::move(events);
  return r;
}

inline CohortStore single(ParticipantRecord r, const std::string& id = "P1") {
  CohortStore c;
  c.participants.emplace(id, std::move(r));
  c.normalize();
  return c;
}

// Windows view into their cohort, so fixtures built inline must outlive the test.
inline const CohortStore& keep(CohortStore c) {
  static std::deque<CohortStore> alive;
  alive.push_back(std::move(c));
  return alive.back();
}

// Fresh directory under the system temp dir, removed up front.
inline std::string scratch_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("agibench-test-" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p.string();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  f << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace testing_support
