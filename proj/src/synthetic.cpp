#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>

#include <json.hpp>

#include "agibench/ingest.hpp"

namespace agibench {

namespace {

// Day-quarter distribution of episodes: none overnight, afternoon peak.
constexpr std::array<double, 4> kQuarterWeights = {0.0, 0.0815, 0.5852, 0.3333};

// Mean PIR events per hour of day before per-participant scaling.
constexpr std::array<double, 24> kDiurnalRate = {0.6, 0.4, 0.4, 0.4, 0.5, 0.8, 2.5, 5.0, 6.0, 5.0, 5.0, 5.0,
                                                 6.0, 4.5, 4.5, 4.5, 4.5, 5.5, 6.0, 5.0, 5.0, 3.5, 2.0, 1.0};

constexpr std::array<double, kLocationCount> kLocationPreference = {0.15, 1.0, 1.2, 0.5, 0.2, 1.5, 1.3, 1.6};

struct MeasureModel {
  double mean, between_sd, circadian_amp, noise_sd;
};
constexpr std::array<MeasureModel, kMeasureCount> kMeasureModels = {{
    {36.6, 0.3, 0.2, 0.15},  // body-temperature
    {72.0, 12.0, 0.0, 0.4},  // body-weight
    {78.0, 8.0, 3.0, 4.0},   // diastolic-bp
    {132.0, 12.0, 5.0, 6.0}, // systolic-bp
    {70.0, 8.0, 4.0, 4.0},   // heart-rate
    {48.0, 6.0, 0.0, 0.5},   // muscle-mass
    {55.0, 5.0, 0.0, 0.6},   // total-body-water
    {33.0, 1.0, 0.4, 0.4},   // skin-temperature
}};

constexpr double kBurstMean = 10.0;             // pacing events per planted burst at strength 1
constexpr double kBackgroundBurstRate = 0.04;   // fraction of windows with unprompted restlessness
constexpr double kHeartRateLift = 6.0;          // bpm at strength 1
constexpr double kOtherLabelRate = 0.02;        // non-agitation clinical labels per day
constexpr Timestamp kQuarter = 6 * kSecondsPerHour;

std::size_t sample_cumulative(const std::array<double, kLocationCount>& cdf, double u) {
  for (std::size_t i = 0; i < kLocationCount; ++i) {
    if (u < cdf[i]) return i;
  }
  return kLocationCount - 1;
}

struct Burst {
  int events = 0;
  Location partner = Location::lounge;
};

void generate_participant(const SyntheticSpec& spec, int index, CohortStore& cohort,
                          SyntheticManifest& manifest) {
  char idbuf[16];
  std::snprintf(idbuf, sizeof idbuf, "P%03d", index + 1);
  const std::string id = idbuf;
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(index)));

  const Timestamp start = make_timestamp(2019, 4, 1) + (index % 7) * kSecondsPerDay;
  const std::size_t quarters = static_cast<std::size_t>(spec.days) * 4;

  // Participant traits.
  const double rate_scale = 0.6 + 0.8 * rng.uniform();
  const double susceptibility = 0.5 + rng.uniform();
  std::array<double, kLocationCount> pref{};
  for (std::size_t l = 0; l < kLocationCount; ++l) pref[l] = kLocationPreference[l] * std::exp(0.3 * rng.normal());
  std::array<std::array<double, kLocationCount>, kLocationCount> cdf{};
  const auto hallway = static_cast<std::size_t>(Location::hallway);
  for (std::size_t i = 0; i < kLocationCount; ++i) {
    double total = 0.0;
    std::array<double, kLocationCount> w{};
    for (std::size_t j = 0; j < kLocationCount; ++j) {
      w[j] = pref[j] * (i == j ? 1.5 : 1.0) * ((i == hallway || j == hallway) ? 1.5 : 1.0) *
             std::exp(0.25 * rng.normal());
      total += w[j];
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < kLocationCount; ++j) {
      acc += w[j] / total;
      cdf[i][j] = acc;
    }
    cdf[i][kLocationCount - 1] = 1.0;
  }
  std::array<double, kMeasureCount> baseline{};
  for (std::size_t m = 0; m < kMeasureCount; ++m) {
    baseline[m] = kMeasureModels[m].mean + kMeasureModels[m].between_sd * rng.normal();
  }

  // Episodes, with precursor (one window before) and lead (two before) plants.
  std::vector<Burst> bursts(quarters);
  std::vector<double> hr_lift(quarters, 0.0);
  ParticipantRecord rec;
  for (std::size_t q = 0; q < quarters; ++q) {
    const double p = spec.agitation_rate * susceptibility * kQuarterWeights[q % 4];
    if (p <= 0.0 || !rng.bernoulli(p)) continue;
    const Timestamp t = start + static_cast<Timestamp>(q) * kQuarter +
                        static_cast<Timestamp>(rng.index(static_cast<std::size_t>(kQuarter)));
    rec.labels.push_back({t, LabelKind::agitation, "Agitation"});
    manifest.episodes.emplace_back(id, t);
    for (std::size_t back = 1; back <= 2 && back <= q; ++back) {
      const std::size_t w = q - back;
      const int n = rng.poisson(spec.precursor_strength * kBurstMean);
      const auto partner = std::array{Location::lounge, Location::kitchen, Location::bedroom}[rng.index(3)];
      bursts[w].events += n;
      bursts[w].partner = partner;
      hr_lift[w] += spec.precursor_strength * kHeartRateLift / static_cast<double>(back);
      manifest.planted.push_back({id, start + static_cast<Timestamp>(w) * kQuarter,
                                  back == 1 ? "precursor" : "lead", n});
    }
  }
  for (std::size_t q = 0; q < quarters; ++q) {
    if (rng.bernoulli(kBackgroundBurstRate)) {
      bursts[q].events += rng.poisson(kBurstMean);
      bursts[q].partner = std::array{Location::lounge, Location::kitchen, Location::bedroom}[rng.index(3)];
    }
  }

  // Activity: Markov chain over locations with diurnal event intensity.
  std::size_t state = static_cast<std::size_t>(Location::bedroom);
  for (int d = 0; d < spec.days; ++d) {
    const bool missing = d > 0 && d + 1 < spec.days && rng.bernoulli(0.03);
    const Timestamp day0 = start + d * kSecondsPerDay;
    std::vector<int> burst_hour(4, -1);
    for (int q = 0; q < 4; ++q) {
      const auto w = static_cast<std::size_t>(d * 4 + q);
      if (bursts[w].events > 0) burst_hour[static_cast<std::size_t>(q)] = q * 6 + static_cast<int>(rng.index(6));
    }
    for (int h = 0; h < 24; ++h) {
      const Timestamp hour0 = day0 + h * kSecondsPerHour;
      std::vector<ActivityEvent> hour_events;
      if (!missing) {
        const int n = rng.poisson(rate_scale * kDiurnalRate[static_cast<std::size_t>(h)]);
        std::vector<Timestamp> times(static_cast<std::size_t>(n));
        for (auto& t : times) t = hour0 + static_cast<Timestamp>(rng.index(3600));
        std::sort(times.begin(), times.end());
        for (const auto t : times) {
          state = sample_cumulative(cdf[state], rng.uniform());
          hour_events.push_back({t, static_cast<Location>(state)});
        }
      }
      const auto q = static_cast<std::size_t>(h / 6);
      if (burst_hour[q] == h) {
        const Burst& b = bursts[static_cast<std::size_t>(d * 4) + q];
        const double spacing = std::min(20.0 + 40.0 * rng.uniform(), 3400.0 / b.events);
        Timestamp t = hour0 + static_cast<Timestamp>(rng.index(120));
        for (int i = 0; i < b.events; ++i) {
          hour_events.push_back({t, i % 2 == 0 ? Location::hallway : b.partner});
          t += static_cast<Timestamp>(spacing);
        }
      }
      std::sort(hour_events.begin(), hour_events.end());
      rec.activity.insert(rec.activity.end(), hour_events.begin(), hour_events.end());
    }

    // Physiology on roughly three quarters of days, daytime readings only.
    if (rng.bernoulli(0.77)) {
      for (std::size_t m = 0; m < kMeasureCount; ++m) {
        if (!rng.bernoulli(0.85)) continue;
        const auto measure = static_cast<Measure>(m);
        const bool repeated = measure == Measure::heart_rate || measure == Measure::systolic_bp ||
                              measure == Measure::diastolic_bp;
        const int readings = repeated && rng.bernoulli(0.4) ? 2 : 1;
        for (int r = 0; r < readings; ++r) {
          const int hour = 7 + static_cast<int>(rng.index(15));
          const Timestamp t = day0 + hour * kSecondsPerHour + static_cast<Timestamp>(rng.index(3600));
          const auto& mm = kMeasureModels[m];
          double v = baseline[m] + mm.circadian_amp * std::sin(2.0 * std::numbers::pi * (hour - 10) / 24.0) +
                     mm.noise_sd * rng.normal();
          if (measure == Measure::heart_rate) v += hr_lift[static_cast<std::size_t>((t - start) / kQuarter)];
          // Two decimals, as recorded by the devices.
          v = std::round(v * 100.0) / 100.0;
          rec.physiology.push_back({t, measure, v});
        }
      }
    }
    if (rng.bernoulli(kOtherLabelRate)) {
      const Timestamp t = day0 + static_cast<Timestamp>(rng.index(static_cast<std::size_t>(kSecondsPerDay)));
      rec.labels.push_back({t, LabelKind::other_clinical_event, "Blood pressure"});
    }
  }
  cohort.participants.emplace(id, std::move(rec));
}

}  // namespace

SyntheticCohort generate_synthetic(const SyntheticSpec& spec) {
  if (spec.participants < 1 || spec.days < 1) {
    fail(ErrorKind::config, "invalid-spec", "participants and days must be positive");
  }
  if (!(spec.agitation_rate >= 0.0) || !(spec.precursor_strength >= 0.0)) {
    fail(ErrorKind::config, "invalid-spec", "agitation rate and precursor strength must be non-negative");
  }
  SyntheticCohort out;
  out.manifest.spec = spec;
  for (int p = 0; p < spec.participants; ++p) generate_participant(spec, p, out.cohort, out.manifest);
  out.cohort.normalize();
  std::sort(out.manifest.episodes.begin(), out.manifest.episodes.end());
  return out;
}

std::string manifest_json(const SyntheticManifest& manifest) {
  nlohmann::ordered_json j;
  j["format"] = "agibench-synthetic-manifest";
  j["version"] = 1;
  j["spec"] = {{"participants", manifest.spec.participants},
               {"days", manifest.spec.days},
               {"seed", manifest.spec.seed},
               {"agitation_rate", manifest.spec.agitation_rate},
               {"precursor_strength", manifest.spec.precursor_strength}};
  auto episodes = nlohmann::ordered_json::array();
  for (const auto& [id, t] : manifest.episodes) {
    episodes.push_back({{"participant", id}, {"timestamp", format_timestamp(t)}});
  }
  j["episodes"] = std::move(episodes);
  auto planted = nlohmann::ordered_json::array();
  for (const auto& p : manifest.planted) {
    planted.push_back({{"participant", p.participant},
                       {"window_start", format_timestamp(p.start)},
                       {"role", p.role},
                       {"burst_events", p.burst_events}});
  }
  j["planted_windows"] = std::move(planted);
  return j.dump(2) + "\n";
}

void write_manifest(const SyntheticManifest& manifest, const std::string& path) {
  std::ofstream f(path);
  if (!f) fail(ErrorKind::data, "write-failed", "cannot write `" + path + "`");
  f << manifest_json(manifest);
}

}  // namespace agibench
