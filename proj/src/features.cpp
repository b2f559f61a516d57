#include "agibench/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "csv.hpp"

namespace agibench {

namespace {

constexpr std::array<std::string_view, 4> kStatNames = {"sum", "max", "mean", "std"};
constexpr std::array<std::string_view, kContextualFeatureCount> kContextualNames = {
    "total-events",         "unique-locations",         "active-location-ratio", "private-to-public-ratio",
    "location-entropy",     "location-dominance-ratio", "back-and-forth-count",  "num-transitions"};

}  // namespace

std::vector<std::string> feature_names(const FeatureOptions& options) {
  std::vector<std::string> names;
  names.reserve(options.width());
  for (std::size_t l = 0; l < kLocationCount; ++l) {
    for (const auto stat : kStatNames) {
      names.push_back(std::string(location_name(static_cast<Location>(l))) + "-count-" + std::string(stat));
    }
  }
  for (const auto n : kContextualNames) names.emplace_back(n);
  for (std::size_t m = 0; m < kMeasureCount; ++m) names.emplace_back(measure_name(static_cast<Measure>(m)));
  if (options.day_quarter) names.emplace_back("day-quarter");
  if (options.agitation_now) names.emplace_back("agitation-now");
  return names;
}

std::size_t feature_index(const std::string& name, const FeatureOptions& options) {
  const auto names = feature_names(options);
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) fail(ErrorKind::config, "unknown-feature", "no feature named `" + name + "`");
  return static_cast<std::size_t>(it - names.begin());
}

void statistical_activity_features(const Window& window, std::span<double, kStatisticalFeatureCount> out) {
  const auto hours = static_cast<std::size_t>(window.resolution_hours);
  // Windows start on clock-hour boundaries, so window-relative hours are clock hours.
  std::vector<double> counts(kLocationCount * hours, 0.0);
  for (const auto& e : window.activity) {
    const auto h = static_cast<std::size_t>((e.time - window.start) / kSecondsPerHour);
    counts[static_cast<std::size_t>(e.location) * hours + h] += 1.0;
  }
  const double n = static_cast<double>(hours);
  for (std::size_t l = 0; l < kLocationCount; ++l) {
    const double* c = counts.data() + l * hours;
    double sum = 0.0, mx = 0.0;
    for (std::size_t h = 0; h < hours; ++h) {
      sum += c[h];
      mx = std::max(mx, c[h]);
    }
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t h = 0; h < hours; ++h) ss += (c[h] - mean) * (c[h] - mean);
    out[l * 4 + 0] = sum;
    out[l * 4 + 1] = mx;
    out[l * 4 + 2] = mean;
    out[l * 4 + 3] = std::sqrt(ss / n);
  }
}

void contextual_activity_features(const Window& window, std::span<double, kContextualFeatureCount> out) {
  std::array<std::size_t, kLocationCount> counts{};
  std::size_t back_and_forth = 0, transitions = 0;
  const auto& ev = window.activity;
  for (std::size_t i = 0; i < ev.size(); ++i) {
    ++counts[static_cast<std::size_t>(ev[i].location)];
    if (i >= 1 && ev[i].location != ev[i - 1].location) ++transitions;
    if (i >= 2 && ev[i].location == ev[i - 2].location && ev[i].location != ev[i - 1].location) ++back_and_forth;
  }
  const std::size_t total = ev.size();
  std::size_t unique = 0, priv = 0, dominant = 0;
  double entropy = 0.0;
  for (std::size_t l = 0; l < kLocationCount; ++l) {
    if (counts[l] == 0) continue;
    ++unique;
    if (is_private(static_cast<Location>(l))) priv += counts[l];
    dominant = std::max(dominant, counts[l]);
    const double p = static_cast<double>(counts[l]) / static_cast<double>(total);
    entropy -= p * std::log(p);
  }
  const std::size_t pub = total - priv;
  out[0] = static_cast<double>(total);
  out[1] = static_cast<double>(unique);
  out[2] = static_cast<double>(unique) / static_cast<double>(kLocationCount);
  out[3] = (static_cast<double>(priv) + 1.0) / (static_cast<double>(pub) + 1.0);
  out[4] = entropy;
  out[5] = total == 0 ? 0.0 : static_cast<double>(dominant) / static_cast<double>(total);
  out[6] = static_cast<double>(back_and_forth);
  out[7] = static_cast<double>(transitions);
}

void physiology_features(const Window& window, std::span<double, kPhysiologyFeatureCount> values,
                         std::span<std::uint8_t, kPhysiologyFeatureCount> missing) {
  std::array<double, kMeasureCount> sum{};
  std::array<std::size_t, kMeasureCount> n{};
  for (const auto& r : window.physiology) {
    sum[static_cast<std::size_t>(r.measure)] += r.value;
    ++n[static_cast<std::size_t>(r.measure)];
  }
  for (std::size_t m = 0; m < kMeasureCount; ++m) {
    missing[m] = n[m] == 0;
    values[m] = n[m] == 0 ? std::numeric_limits<double>::quiet_NaN() : sum[m] / static_cast<double>(n[m]);
  }
}

FeatureMatrix FeatureMatrix::select_rows(std::span<const std::size_t> indices) const {
  FeatureMatrix out;
  out.values = values.select_rows(indices);
  out.names = names;
  const std::size_t c = cols();
  out.missing.resize(indices.size() * c);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(missing.begin() + static_cast<std::ptrdiff_t>(indices[i] * c), c,
                out.missing.begin() + static_cast<std::ptrdiff_t>(i * c));
  }
  return out;
}

FeatureMatrix extract_features(const WindowSet& windows, std::span<const std::size_t> window_indices,
                               const FeatureOptions& options, int threads) {
  FeatureMatrix fm;
  const std::size_t width = options.width();
  const std::size_t rows = window_indices.size();
  fm.values = Matrix(rows, width);
  fm.missing.assign(rows * width, 0);
  fm.names = feature_names(options);

  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const Window& w = windows.windows[window_indices[static_cast<std::size_t>(i)]];
    auto row = fm.values.row(static_cast<std::size_t>(i));
    std::uint8_t* mask = fm.missing.data() + static_cast<std::size_t>(i) * width;
    statistical_activity_features(w, row.subspan<0, kStatisticalFeatureCount>());
    contextual_activity_features(w, row.subspan<kStatisticalFeatureCount, kContextualFeatureCount>());
    physiology_features(w, row.subspan<kStatisticalFeatureCount + kContextualFeatureCount, kPhysiologyFeatureCount>(),
                        std::span<std::uint8_t, kPhysiologyFeatureCount>(mask + 40, kPhysiologyFeatureCount));
    std::size_t c = kBaseFeatureCount;
    if (options.day_quarter) row[c++] = static_cast<double>(w.day_quarter);
    if (options.agitation_now) row[c++] = w.agitation_now ? 1.0 : 0.0;
  }
  return fm;
}

void write_feature_csv(const FeatureMatrix& features, const WindowSet& windows,
                       std::span<const std::size_t> window_indices, const std::string& path,
                       const std::string& mask_path) {
  std::ofstream f(path), m(mask_path);
  if (!f || !m) fail(ErrorKind::data, "write-failed", "cannot write feature CSV `" + path + "`");
  f << "participant_id,window_start";
  m << "participant_id,window_start";
  for (const auto& n : features.names) {
    f << ',' << n;
    m << ',' << n;
  }
  f << '\n';
  m << '\n';
  for (std::size_t r = 0; r < features.rows(); ++r) {
    const Window& w = windows.windows[window_indices[r]];
    const std::string key = csv::quote(*w.participant) + ',' + format_timestamp(w.start);
    f << key;
    m << key;
    for (std::size_t c = 0; c < features.cols(); ++c) {
      f << ',';
      if (!features.is_missing(r, c)) f << format_double(features.values(r, c));
      m << ',' << int(features.is_missing(r, c));
    }
    f << '\n';
    m << '\n';
  }
}

std::uint64_t hash_values(std::span<const double> values, std::uint64_t h) noexcept {
  for (double v : values) {
    char bytes[sizeof(double)];
    std::memcpy(bytes, &v, sizeof v);
    h = fnv1a(std::string_view(bytes, sizeof bytes), h);
  }
  return h;
}

std::uint64_t PreprocessorState::hash() const {
  std::uint64_t h = hash_values(impute_mean);
  h = hash_values(mean, h);
  h = hash_values(scale, h);
  h = hash_values(min, h);
  return hash_values(max, h);
}

PreprocessorState fit_preprocessor(const FeatureMatrix& train) {
  const std::size_t rows = train.rows();
  const std::size_t cols = train.cols();
  if (rows < 2) fail(ErrorKind::model, "too-few-rows", "preprocessor needs at least 2 training rows");
  PreprocessorState s;
  s.impute_mean.assign(cols, 0.0);
  s.mean.assign(cols, 0.0);
  s.scale.assign(cols, 1.0);
  s.min.assign(cols, 0.0);
  s.max.assign(cols, 0.0);

  Matrix imputed = train.values;
  for (std::size_t c = 0; c < cols; ++c) {
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows; ++r) {
      if (train.is_missing(r, c)) continue;
      sum += train.values(r, c);
      ++n;
    }
    if (n == 0) s.all_missing.push_back(c);
    s.impute_mean[c] = n == 0 ? 0.0 : sum / static_cast<double>(n);
    for (std::size_t r = 0; r < rows; ++r) {
      if (train.is_missing(r, c)) imputed(r, c) = s.impute_mean[c];
    }
    double mean = 0.0;
    for (std::size_t r = 0; r < rows; ++r) mean += imputed(r, c);
    mean /= static_cast<double>(rows);
    double ss = 0.0;
    for (std::size_t r = 0; r < rows; ++r) ss += (imputed(r, c) - mean) * (imputed(r, c) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(rows));
    s.mean[c] = mean;
    s.scale[c] = sd > 0.0 ? sd : 1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t r = 0; r < rows; ++r) {
      const double z = (imputed(r, c) - mean) / s.scale[c];
      lo = std::min(lo, z);
      hi = std::max(hi, z);
    }
    s.min[c] = lo;
    s.max[c] = hi;
  }
  return s;
}

Matrix apply_preprocessor(const PreprocessorState& state, const FeatureMatrix& rows) {
  const std::size_t cols = state.width();
  if (rows.cols() != cols) {
    fail(ErrorKind::model, "arity-mismatch",
         "rows have " + std::to_string(rows.cols()) + " features, preprocessor expects " + std::to_string(cols));
  }
  Matrix out(rows.rows(), cols);
  for (std::size_t r = 0; r < rows.rows(); ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double v = rows.is_missing(r, c) ? state.impute_mean[c] : rows.values(r, c);
      const double z = (v - state.mean[c]) / state.scale[c];
      const double range = state.max[c] > state.min[c] ? state.max[c] - state.min[c] : 1.0;
      out(r, c) = (z - state.min[c]) / range;
    }
  }
  return out;
}

}  // namespace agibench
