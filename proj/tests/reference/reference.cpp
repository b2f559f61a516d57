#include "reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace ref {

using namespace agibench;

std::array<double, 40> activity_features(const ParticipantRecord& record, Timestamp start, int hours) {
  std::vector<const ActivityEvent*> in;
  for (const auto& e : record.activity) {
    if (e.time >= start && e.time < start + hours * 3600) in.push_back(&e);
  }
  std::array<double, 40> out{};
  // grid[location][hour]
  std::vector<std::vector<int>> grid(8, std::vector<int>(static_cast<std::size_t>(hours), 0));
  for (const auto* e : in) {
    const int h = static_cast<int>((e->time - start) / 3600);
    grid[static_cast<std::size_t>(e->location)][static_cast<std::size_t>(h)] += 1;
  }
  for (int l = 0; l < 8; ++l) {
    const auto& g = grid[static_cast<std::size_t>(l)];
    const int sum = std::accumulate(g.begin(), g.end(), 0);
    const int mx = *std::max_element(g.begin(), g.end());
    const double mean = static_cast<double>(sum) / hours;
    double var = 0.0;
    for (int c : g) var += (c - mean) * (c - mean) / hours;
    out[static_cast<std::size_t>(4 * l)] = sum;
    out[static_cast<std::size_t>(4 * l + 1)] = mx;
    out[static_cast<std::size_t>(4 * l + 2)] = mean;
    out[static_cast<std::size_t>(4 * l + 3)] = std::sqrt(var);
  }

  std::map<int, int> per_location;
  for (const auto* e : in) per_location[static_cast<int>(e->location)]++;
  const int total = static_cast<int>(in.size());
  int priv = 0;
  for (const auto& [l, c] : per_location) {
    const auto loc = static_cast<Location>(l);
    if (loc == Location::bathroom || loc == Location::bedroom) priv += c;
  }
  double entropy = 0.0;
  int dominant = 0;
  for (const auto& [l, c] : per_location) {
    const double p = static_cast<double>(c) / total;
    entropy += -p * std::log(p);
    dominant = std::max(dominant, c);
  }
  int transitions = 0, returns = 0;
  for (std::size_t i = 1; i < in.size(); ++i) {
    if (in[i]->location != in[i - 1]->location) transitions++;
  }
  for (std::size_t i = 2; i < in.size(); ++i) {
    if (in[i]->location == in[i - 2]->location && in[i]->location != in[i - 1]->location) returns++;
  }
  out[32] = total;
  out[33] = static_cast<double>(per_location.size());
  out[34] = static_cast<double>(per_location.size()) / 8.0;
  out[35] = static_cast<double>(priv + 1) / static_cast<double>(total - priv + 1);
  out[36] = entropy;
  out[37] = total == 0 ? 0.0 : static_cast<double>(dominant) / total;
  out[38] = returns;
  out[39] = transitions;
  return out;
}

std::array<double, 8> physiology_means(const ParticipantRecord& record, Timestamp start, int hours) {
  std::array<double, 8> out;
  for (int m = 0; m < 8; ++m) {
    double s = 0.0;
    int n = 0;
    for (const auto& r : record.physiology) {
      if (static_cast<int>(r.measure) == m && r.time >= start && r.time < start + hours * 3600) {
        s += r.value;
        ++n;
      }
    }
    out[static_cast<std::size_t>(m)] = n ? s / n : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<double> rocket_features(const KernelBank& bank, const Matrix& series) {
  const int n = static_cast<int>(series.rows());
  std::vector<double> out;
  for (const auto& k : bank.kernels) {
    // Explicit zero-padded copy of each selected channel.
    const int pad = k.padding;
    std::vector<std::vector<double>> padded;
    for (auto c : k.channels) {
      std::vector<double> col(static_cast<std::size_t>(n + 2 * pad), 0.0);
      for (int t = 0; t < n; ++t) col[static_cast<std::size_t>(t + pad)] = series(static_cast<std::size_t>(t), c);
      padded.push_back(std::move(col));
    }
    const int outputs = n + 2 * pad - (k.length - 1) * k.dilation;
    int positive = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < outputs; ++i) {
      double v = k.bias;
      for (const auto& col : padded) {
        for (int j = 0; j < k.length; ++j) {
          v += k.weights[static_cast<std::size_t>(j)] * col[static_cast<std::size_t>(i + j * k.dilation)];
        }
      }
      if (v > 0) ++positive;
      best = std::max(best, v);
    }
    out.push_back(static_cast<double>(positive) / outputs);
    out.push_back(best);
  }
  return out;
}

Matrix rocket_batch(const KernelBank& bank, std::span<const Matrix> series) {
  Matrix out(series.size(), 2 * bank.kernels.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto f = rocket_features(bank, series[i]);
    std::copy(f.begin(), f.end(), out.row(i).begin());
  }
  return out;
}

Neighbors knn(const Matrix& reference, const Matrix& queries, std::size_t k, bool exclude_self) {
  Neighbors out;
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t r = 0; r < reference.rows(); ++r) {
      if (exclude_self && r == q) continue;
      double s = 0.0;
      for (std::size_t c = 0; c < reference.cols(); ++c) {
        const double d = queries(q, c) - reference(r, c);
        s += d * d;
      }
      all.emplace_back(std::sqrt(s), r);
    }
    std::sort(all.begin(), all.end());
    for (std::size_t j = 0; j < k; ++j) {
      out.distance.push_back(all[j].first);
      out.index.push_back(all[j].second);
    }
  }
  return out;
}

double auc_pairs(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  double wins = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j]) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) wins += 1.0;
      else if (scores[i] == scores[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

double average_precision(std::span<const double> scores, std::span<const std::uint8_t> labels) {
  // Rank positions: strictly higher scores first, then earlier index among ties.
  double total = 0.0;
  int positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++positives;
    int rank = 0, hits = 0;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      const bool ahead = scores[j] > scores[i] || (scores[j] == scores[i] && j <= i);
      if (!ahead) continue;
      ++rank;
      if (labels[j]) ++hits;
    }
    total += static_cast<double>(hits) / rank;
  }
  return total / positives;
}

std::vector<double> exact_shapley(const std::function<double(std::span<const double>)>& f,
                                  std::span<const double> x, const Matrix& background) {
  const std::size_t d = x.size();
  const std::size_t subsets = std::size_t{1} << d;
  std::vector<double> value(subsets, 0.0);
  std::vector<double> z(d);
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    double s = 0.0;
    for (std::size_t b = 0; b < background.rows(); ++b) {
      for (std::size_t j = 0; j < d; ++j) z[j] = (mask >> j) & 1 ? x[j] : background(b, j);
      s += f(z);
    }
    value[mask] = s / static_cast<double>(background.rows());
  }
  std::vector<double> fact(d + 1, 1.0);
  for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
  std::vector<double> phi(d, 0.0);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if ((mask >> j) & 1) continue;
      const auto s = static_cast<std::size_t>(__builtin_popcountll(mask));
      const double w = fact[s] * fact[d - s - 1] / fact[d];
      phi[j] += w * (value[mask | (std::size_t{1} << j)] - value[mask]);
    }
  }
  return phi;
}

}  // namespace ref
