#include "agibench/explain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "agibench/metrics.hpp"

namespace agibench {

PermutationImportance permutation_importance(const BatchPredictor& predict, const Matrix& rows,
                                             std::span<const std::uint8_t> labels, std::size_t repeats,
                                             std::uint64_t seed, int threads) {
  if (rows.rows() != labels.size()) fail(ErrorKind::model, "length-mismatch", "one label per row required");
  if (repeats < 1) fail(ErrorKind::config, "bad-repeats", "repeats must be at least 1");
  PermutationImportance out;
  out.repeats = repeats;
  out.baseline_auc = auc_roc(predict(rows), labels);  // throws single-class
  const std::size_t d = rows.cols();
  out.mean_drop.assign(d, 0.0);
  out.std_drop.assign(d, 0.0);
  const auto dd = static_cast<std::ptrdiff_t>(d);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t fi = 0; fi < dd; ++fi) {
    const auto f = static_cast<std::size_t>(fi);
    Matrix work = rows;
    std::vector<double> column(rows.rows());
    for (std::size_t r = 0; r < rows.rows(); ++r) column[r] = rows(r, f);
    std::vector<double> drops(repeats);
    for (std::size_t rep = 0; rep < repeats; ++rep) {
      Rng rng(derive_seed(derive_seed(seed, f), rep));
      std::vector<double> shuffled = column;
      rng.shuffle(shuffled);
      for (std::size_t r = 0; r < rows.rows(); ++r) work(r, f) = shuffled[r];
      drops[rep] = out.baseline_auc - auc_roc(predict(work), labels);
    }
    const double mean = std::accumulate(drops.begin(), drops.end(), 0.0) / static_cast<double>(repeats);
    double ss = 0.0;
    for (double v : drops) ss += (v - mean) * (v - mean);
    out.mean_drop[f] = mean;
    out.std_drop[f] = std::sqrt(ss / static_cast<double>(repeats));
  }
  return out;
}

namespace {

// Walks `order` from every background row to the instance and accumulates
// the marginal contribution of each feature into phi.
void accumulate_permutation(const BatchPredictor& predict, std::span<const double> x, const Matrix& background,
                            const std::vector<std::size_t>& order, std::vector<double>& phi) {
  const std::size_t d = x.size(), b = background.rows();
  // Steps where the instance already matches the background value change
  // nothing and are not evaluated.
  Matrix chain;
  std::vector<std::size_t> step_feature;  // feature toggled to reach this row; d for a chain start
  std::vector<double> cur(d);
  for (std::size_t i = 0; i < b; ++i) {
    auto z = background.row(i);
    std::copy(z.begin(), z.end(), cur.begin());
    chain.append_row(cur);
    step_feature.push_back(d);
    for (std::size_t s = 0; s < d; ++s) {
      const std::size_t f = order[s];
      if (cur[f] == x[f]) continue;
      cur[f] = x[f];
      chain.append_row(cur);
      step_feature.push_back(f);
    }
  }
  const auto v = predict(chain);
  for (std::size_t r = 0; r < v.size(); ++r) {
    if (step_feature[r] != d) phi[step_feature[r]] += v[r] - v[r - 1];
  }
}

}  // namespace

std::vector<double> shapley_sampling(const BatchPredictor& predict, std::span<const double> instance,
                                     const Matrix& background, const ShapleyOptions& options) {
  if (background.rows() == 0) fail(ErrorKind::model, "empty-background", "Shapley sampling needs background rows");
  if (background.cols() != instance.size()) {
    fail(ErrorKind::model, "arity-mismatch", "instance and background widths differ");
  }
  if (options.permutations < 1) fail(ErrorKind::config, "bad-permutations", "need at least one permutation");
  const std::size_t d = instance.size();
  std::vector<double> phi(d, 0.0);
  std::vector<std::size_t> order(d);
  std::size_t done = 0;
  for (std::size_t pair = 0; done < options.permutations; ++pair) {
    Rng rng(derive_seed(options.seed, pair));
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    accumulate_permutation(predict, instance, background, order, phi);
    if (++done == options.permutations) break;
    std::reverse(order.begin(), order.end());
    accumulate_permutation(predict, instance, background, order, phi);
    ++done;
  }
  const double norm = static_cast<double>(done) * static_cast<double>(background.rows());
  for (auto& p : phi) p /= norm;
  return phi;
}

Attributions explain_instances(const BatchPredictor& predict, const Matrix& instances, const Matrix& background,
                               const ShapleyOptions& options, int threads) {
  if (background.rows() == 0) fail(ErrorKind::model, "empty-background", "Shapley sampling needs background rows");
  if (instances.rows() > 0 && instances.cols() != background.cols()) {
    fail(ErrorKind::model, "arity-mismatch", "instance and background widths differ");
  }
  Attributions out;
  out.values = Matrix(instances.rows(), background.cols());
  out.output = predict(instances);
  const auto bg = predict(background);
  out.background_mean = std::accumulate(bg.begin(), bg.end(), 0.0) / static_cast<double>(bg.size());
  const auto n = static_cast<std::ptrdiff_t>(instances.rows());
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    ShapleyOptions o = options;
    o.seed = derive_seed(options.seed, static_cast<std::uint64_t>(i));
    const auto phi = shapley_sampling(predict, instances.row(static_cast<std::size_t>(i)), background, o);
    std::copy(phi.begin(), phi.end(), out.values.row(static_cast<std::size_t>(i)).begin());
  }
  return out;
}

double pearson(std::span<const double> a, std::span<const double> b) noexcept {
  const std::size_t n = std::min(a.size(), b.size());
  if (n < 2) return 0.0;
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

std::vector<FeatureSummary> summary_rank(const Matrix& attributions, const Matrix& feature_values,
                                         std::span<const std::string> names) {
  const std::size_t n = attributions.rows(), d = attributions.cols();
  if (n < 30) {
    fail(ErrorKind::model, "too-few-instances", "summary ranking needs at least 30 explained instances, got " +
                                                    std::to_string(n));
  }
  if (feature_values.rows() != n || feature_values.cols() != d || names.size() != d) {
    fail(ErrorKind::model, "arity-mismatch", "attributions, feature values and names disagree in shape");
  }
  std::vector<FeatureSummary> out(d);
  std::vector<double> va(n), vb(n);
  for (std::size_t f = 0; f < d; ++f) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      s += std::abs(attributions(i, f));
      va[i] = feature_values(i, f);
      vb[i] = attributions(i, f);
    }
    out[f].feature = f;
    out[f].name = names[f];
    out[f].mean_abs = s / static_cast<double>(n);
    out[f].direction = pearson(va, vb);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const FeatureSummary& a, const FeatureSummary& b) { return a.mean_abs > b.mean_abs; });
  for (std::size_t r = 0; r < d; ++r) out[r].rank = r + 1;
  return out;
}

}  // namespace agibench
