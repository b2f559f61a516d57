#include "agibench/rocket.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace agibench {

KernelBank KernelBank::generate(std::uint64_t seed, std::size_t count, std::size_t series_length,
                                std::size_t channels) {
  if (series_length < 1 || channels < 1) {
    fail(ErrorKind::config, "bad-kernel-bank", "series length and channel count must be positive");
  }
  KernelBank bank;
  bank.seed = seed;
  bank.series_length = series_length;
  bank.channels = channels;
  bank.kernels.reserve(count);
  const int n = static_cast<int>(series_length);
  std::vector<std::size_t> pool(channels);
  for (std::size_t k = 0; k < count; ++k) {
    Rng rng(derive_seed(seed, k));
    RocketKernel ker;
    const int nominal = std::array{7, 9, 11}[rng.index(3)];
    ker.length = std::min(nominal, n);
    ker.weights.resize(static_cast<std::size_t>(ker.length));
    for (auto& w : ker.weights) w = rng.normal();
    // Capped kernels keep their level: centring a 1- or 2-tap kernel would
    // reduce it to zero or a pure difference.
    if (ker.length == nominal) {
      const double mean = std::accumulate(ker.weights.begin(), ker.weights.end(), 0.0) / ker.length;
      for (auto& w : ker.weights) w -= mean;
    }
    ker.bias = rng.uniform(-1.0, 1.0);
    const double max_exp =
        ker.length > 1 ? std::log2(static_cast<double>(n - 1) / static_cast<double>(ker.length - 1)) : 0.0;
    ker.dilation = static_cast<int>(std::floor(std::pow(2.0, rng.uniform(0.0, std::max(0.0, max_exp)))));
    ker.dilation = std::max(1, ker.dilation);
    ker.padding = rng.bernoulli(0.5) ? ((ker.length - 1) * ker.dilation) / 2 : 0;
    const double max_channels = std::log2(static_cast<double>(std::min<std::size_t>(channels, nominal)) + 1.0);
    const auto pick = std::max<std::size_t>(
        1, std::min(channels, static_cast<std::size_t>(std::pow(2.0, rng.uniform(0.0, max_channels)))));
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < pick; ++i) std::swap(pool[i], pool[i + rng.index(channels - i)]);
    ker.channels.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(pick));
    std::sort(ker.channels.begin(), ker.channels.end());
    bank.kernels.push_back(std::move(ker));
  }
  return bank;
}

std::string KernelBank::to_json() const {
  nlohmann::ordered_json j;
  j["format"] = "agibench-kernel-bank";
  j["version"] = 1;
  j["seed"] = seed;
  j["series_length"] = series_length;
  j["channels"] = channels;
  auto ks = nlohmann::ordered_json::array();
  for (const auto& k : kernels) {
    ks.push_back({{"length", k.length},
                  {"weights", k.weights},
                  {"bias", k.bias},
                  {"dilation", k.dilation},
                  {"padding", k.padding},
                  {"channels", k.channels}});
  }
  j["kernels"] = std::move(ks);
  return j.dump(2) + "\n";
}

KernelBank KernelBank::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("format") != "agibench-kernel-bank" || j.at("version") != 1) {
      fail(ErrorKind::model, "artifact-mismatch", "not a version-1 kernel bank");
    }
    KernelBank b;
    b.seed = j.at("seed").get<std::uint64_t>();
    b.series_length = j.at("series_length").get<std::size_t>();
    b.channels = j.at("channels").get<std::size_t>();
    for (const auto& k : j.at("kernels")) {
      RocketKernel r;
      r.length = k.at("length").get<int>();
      r.weights = k.at("weights").get<std::vector<double>>();
      r.bias = k.at("bias").get<double>();
      r.dilation = k.at("dilation").get<int>();
      r.padding = k.at("padding").get<int>();
      r.channels = k.at("channels").get<std::vector<std::size_t>>();
      b.kernels.push_back(std::move(r));
    }
    return b;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::model, "artifact-mismatch", std::string("malformed kernel bank: ") + e.what());
  }
}

void rocket_transform(const KernelBank& bank, const Matrix& series, std::span<double> out) {
  if (series.rows() != bank.series_length || series.cols() != bank.channels) {
    fail(ErrorKind::model, "arity-mismatch",
         "series is " + std::to_string(series.rows()) + "x" + std::to_string(series.cols()) + ", bank expects " +
             std::to_string(bank.series_length) + "x" + std::to_string(bank.channels));
  }
  const int n = static_cast<int>(series.rows());
  std::vector<double> summed(static_cast<std::size_t>(n));
  for (std::size_t k = 0; k < bank.kernels.size(); ++k) {
    const RocketKernel& ker = bank.kernels[k];
    for (int t = 0; t < n; ++t) {
      double s = 0.0;
      for (const auto c : ker.channels) s += series(static_cast<std::size_t>(t), c);
      summed[static_cast<std::size_t>(t)] = s;
    }
    const int span = (ker.length - 1) * ker.dilation;
    const int out_len = n + 2 * ker.padding - span;
    double mx = -std::numeric_limits<double>::infinity();
    int positive = 0;
    for (int i = 0; i < out_len; ++i) {
      double v = ker.bias;
      int t = i - ker.padding;
      for (int j = 0; j < ker.length; ++j, t += ker.dilation) {
        if (t >= 0 && t < n) v += ker.weights[static_cast<std::size_t>(j)] * summed[static_cast<std::size_t>(t)];
      }
      positive += v > 0.0;
      mx = std::max(mx, v);
    }
    out[2 * k] = static_cast<double>(positive) / static_cast<double>(out_len);
    out[2 * k + 1] = mx;
  }
}

std::vector<double> rocket_transform(const KernelBank& bank, const Matrix& series) {
  std::vector<double> out(bank.feature_count());
  rocket_transform(bank, series, out);
  return out;
}

Matrix rocket_transform_batch(const KernelBank& bank, std::span<const Matrix> series, int threads) {
  Matrix out(series.size(), bank.feature_count());
  const auto n = static_cast<std::ptrdiff_t>(series.size());
  // Exceptions cannot cross the parallel region; validate shapes first.
  for (const auto& s : series) {
    if (s.rows() != bank.series_length || s.cols() != bank.channels) {
      fail(ErrorKind::model, "arity-mismatch", "series shape does not match the kernel bank");
    }
  }
#pragma omp parallel for schedule(dynamic, 16) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    rocket_transform(bank, series[static_cast<std::size_t>(i)], out.row(static_cast<std::size_t>(i)));
  }
  return out;
}

SequenceModel fit_sequence_model(const KernelBank& bank, const ClassifierSpec& head, std::span<const Matrix> samples,
                                 std::span<const std::uint8_t> labels, std::span<const double> weights, int threads) {
  const Matrix features = rocket_transform_batch(bank, samples, threads);
  return {bank, fit_classifier(head, features, labels, weights)};
}

std::vector<double> predict_sequence(const SequenceModel& model, std::span<const Matrix> samples, int threads) {
  return predict_proba(model.head, rocket_transform_batch(model.bank, samples, threads));
}

}  // namespace agibench
