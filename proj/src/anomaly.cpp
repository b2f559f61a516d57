#include "agibench/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "agibench/neighbors.hpp"

namespace agibench {

std::string_view anomaly_name(AnomalyKind kind) noexcept {
  switch (kind) {
    case AnomalyKind::isolation_forest: return "isolation-forest";
    case AnomalyKind::local_outlier_factor: return "local-outlier-factor";
    case AnomalyKind::one_class_kernel: return "one-class-kernel";
  }
  return "unknown";
}

std::optional<AnomalyKind> parse_anomaly_kind(std::string_view name) {
  for (auto k : {AnomalyKind::isolation_forest, AnomalyKind::local_outlier_factor, AnomalyKind::one_class_kernel}) {
    if (anomaly_name(k) == name) return k;
  }
  return std::nullopt;
}

double average_path_length(std::size_t m) noexcept {
  if (m <= 1) return 0.0;
  const std::size_t k = m - 1;
  double harmonic = 0.0;
  if (k <= 100000) {
    for (std::size_t i = k; i >= 1; --i) harmonic += 1.0 / static_cast<double>(i);
  } else {
    harmonic = std::log(static_cast<double>(k)) + 0.5772156649015329 + 1.0 / (2.0 * static_cast<double>(k));
  }
  return 2.0 * harmonic - 2.0 * static_cast<double>(k) / static_cast<double>(m);
}

double percentile(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

// ---- isolation forest -------------------------------------------------------

double IsolationForest::path_length(std::span<const double> row) const noexcept {
  double total = 0.0;
  for (const auto& tree : trees) {
    int i = 0;
    int depth = 0;
    while (tree[static_cast<std::size_t>(i)].feature >= 0) {
      const auto& n = tree[static_cast<std::size_t>(i)];
      i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
      ++depth;
    }
    total += depth + average_path_length(tree[static_cast<std::size_t>(i)].size);
  }
  return total / static_cast<double>(trees.size());
}

double IsolationForest::score(std::span<const double> row) const noexcept {
  return std::pow(2.0, -path_length(row) / average_path_length(subsample));
}

namespace {

void check_rows(const Matrix& rows, std::size_t minimum) {
  if (rows.rows() == 0) fail(ErrorKind::model, "empty-training", "anomaly model needs training rows");
  if (rows.rows() < minimum) {
    fail(ErrorKind::model, "too-few-rows", "need at least " + std::to_string(minimum) + " training rows");
  }
  for (double v : rows.data()) {
    if (!std::isfinite(v)) fail(ErrorKind::model, "non-finite-feature", "training rows contain NaN or infinity");
  }
}

int build_isolation_node(const Matrix& rows, std::vector<std::size_t>& idx, std::size_t lo, std::size_t hi, int depth,
                         int max_depth, Rng& rng, std::vector<IsolationNode>& nodes) {
  const int id = static_cast<int>(nodes.size());
  nodes.emplace_back();
  const std::size_t size = hi - lo;
  nodes[static_cast<std::size_t>(id)].size = size;
  if (size <= 1 || depth >= max_depth) return id;

  const std::size_t d = rows.cols();
  std::vector<std::size_t> candidates;
  std::vector<double> mins(d, std::numeric_limits<double>::infinity()), maxs(d, -std::numeric_limits<double>::infinity());
  for (std::size_t k = lo; k < hi; ++k) {
    const auto r = rows.row(idx[k]);
    for (std::size_t f = 0; f < d; ++f) {
      mins[f] = std::min(mins[f], r[f]);
      maxs[f] = std::max(maxs[f], r[f]);
    }
  }
  for (std::size_t f = 0; f < d; ++f) {
    if (maxs[f] > mins[f]) candidates.push_back(f);
  }
  if (candidates.empty()) return id;
  const std::size_t f = candidates[rng.index(candidates.size())];
  double thr = rng.uniform(mins[f], maxs[f]);
  if (thr <= mins[f]) thr = std::nextafter(mins[f], maxs[f]);
  const auto mid_it = std::partition(idx.begin() + static_cast<std::ptrdiff_t>(lo),
                                     idx.begin() + static_cast<std::ptrdiff_t>(hi),
                                     [&](std::size_t r) { return rows(r, f) < thr; });
  const auto mid = static_cast<std::size_t>(mid_it - idx.begin());
  const int left = build_isolation_node(rows, idx, lo, mid, depth + 1, max_depth, rng, nodes);
  const int right = build_isolation_node(rows, idx, mid, hi, depth + 1, max_depth, rng, nodes);
  auto& node = nodes[static_cast<std::size_t>(id)];
  node.feature = static_cast<int>(f);
  node.threshold = thr;
  node.left = left;
  node.right = right;
  return id;
}

void set_training_threshold(AnomalyModel& model, const Matrix& rows, int threads) {
  model.threshold = percentile(anomaly_raw_scores(model, rows, threads), 95.0);
}

}  // namespace

AnomalyModel fit_iforest(const Matrix& rows, const IsolationForestParams& params, std::uint64_t seed, int threads) {
  check_rows(rows, 2);
  IsolationForest forest;
  const std::size_t m = rows.rows();
  forest.subsample = std::min(params.subsample, m);
  const int max_depth = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(forest.subsample, 2)))));
  forest.trees.resize(params.trees);
  for (std::size_t t = 0; t < params.trees; ++t) {
    Rng rng(derive_seed(seed, t));
    std::vector<std::size_t> pool(m);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    for (std::size_t i = 0; i < forest.subsample; ++i) std::swap(pool[i], pool[i + rng.index(m - i)]);
    pool.resize(forest.subsample);
    build_isolation_node(rows, pool, 0, pool.size(), 0, max_depth, rng, forest.trees[t]);
  }
  AnomalyModel model;
  model.kind = AnomalyKind::isolation_forest;
  model.feature_count = rows.cols();
  model.state = std::move(forest);
  set_training_threshold(model, rows, threads);
  return model;
}

// ---- local outlier factor ---------------------------------------------------

namespace {

// Guard against zero reachability mass from duplicate points.
constexpr double kReachEpsilon = 1e-10;

}  // namespace

AnomalyModel fit_lof(const Matrix& rows, std::size_t k, int threads) {
  check_rows(rows, 1);
  if (k < 1 || rows.rows() <= k) {
    fail(ErrorKind::model, "k-too-large",
         "LOF needs more than k=" + std::to_string(k) + " rows, got " + std::to_string(rows.rows()));
  }
  LofModel lof;
  lof.train = rows;
  lof.k = k;
  const NeighborLists nn = knn_self(rows, k, threads);
  const std::size_t m = rows.rows();
  lof.k_distance.resize(m);
  for (std::size_t i = 0; i < m; ++i) lof.k_distance[i] = nn.distances_of(i)[k - 1];
  lof.lrd.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    double reach = 0.0;
    const auto idx = nn.indices_of(i);
    const auto dist = nn.distances_of(i);
    for (std::size_t j = 0; j < k; ++j) reach += std::max(lof.k_distance[idx[j]], dist[j]);
    lof.lrd[i] = 1.0 / (reach / static_cast<double>(k) + kReachEpsilon);
  }
  AnomalyModel model;
  model.kind = AnomalyKind::local_outlier_factor;
  model.feature_count = rows.cols();
  model.state = std::move(lof);
  set_training_threshold(model, rows, threads);
  return model;
}

// ---- one-class kernel machine -----------------------------------------------

namespace {

double rbf(std::span<const double> a, std::span<const double> b, double gamma) noexcept {
  return std::exp(-gamma * squared_distance(a, b));
}

// Least-recently-used cache of kernel matrix rows.
class KernelRowCache {
 public:
  KernelRowCache(const Matrix& x, double gamma, std::size_t capacity_rows, int threads)
      : x_(x), gamma_(gamma), capacity_(std::max<std::size_t>(capacity_rows, 2)), threads_(threads) {}

  const std::vector<double>& row(std::size_t i) {
    if (auto it = index_.find(i); it != index_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second);
      return it->second->second;
    }
    std::vector<double> r;
    if (lru_.size() >= capacity_) {
      r = std::move(lru_.back().second);
      index_.erase(lru_.back().first);
      lru_.pop_back();
    }
    r.resize(x_.rows());
    const auto xi = x_.row(i);
    const auto m = static_cast<std::ptrdiff_t>(x_.rows());
#pragma omp parallel for schedule(static) num_threads(threads_ > 0 ? threads_ : 1) if (threads_ > 1)
    for (std::ptrdiff_t t = 0; t < m; ++t) r[static_cast<std::size_t>(t)] = rbf(xi, x_.row(static_cast<std::size_t>(t)), gamma_);
    lru_.emplace_front(i, std::move(r));
    index_[i] = lru_.begin();
    return lru_.front().second;
  }

 private:
  const Matrix& x_;
  double gamma_;
  std::size_t capacity_;
  int threads_;
  std::list<std::pair<std::size_t, std::vector<double>>> lru_;
  std::unordered_map<std::size_t, std::list<std::pair<std::size_t, std::vector<double>>>::iterator> index_;
};

}  // namespace

double OneClassKernelModel::decision(std::span<const double> row) const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) s += alpha[i] * rbf(support.row(i), row, gamma);
  return s - rho;
}

// Dual: minimize 0.5 a'Ka subject to 0 <= a_i <= 1/(nu m), sum a = 1.
// Pairwise (SMO) updates with second-order working-set selection. The KKT
// gap is measured on the unit-box scale (a_i in [0, 1]), i.e. the gradient
// gap multiplied by nu m.
AnomalyModel fit_one_class_kernel(const Matrix& rows, const OneClassParams& params, int threads) {
  check_rows(rows, 2);
  if (!(params.nu > 0.0) || params.nu > 1.0) fail(ErrorKind::config, "bad-nu", "nu must be in (0, 1]");
  const std::size_t m = rows.rows();
  const double gamma = params.gamma > 0.0 ? params.gamma : 1.0 / static_cast<double>(rows.cols());
  const double upper = 1.0 / (params.nu * static_cast<double>(m));
  const double scale = params.nu * static_cast<double>(m);
  const long max_iter = params.max_iterations > 0 ? params.max_iterations
                                                  : std::max<long>(10000000L, 100L * static_cast<long>(m));

  std::vector<double> alpha(m, 0.0);
  {
    const auto full = static_cast<std::size_t>(std::floor(scale));
    for (std::size_t i = 0; i < std::min(full, m); ++i) alpha[i] = upper;
    if (full < m) alpha[full] = std::max(0.0, 1.0 - static_cast<double>(full) * upper);
  }
  const std::size_t cache_rows = params.cache_mb * 1024 * 1024 / (m * sizeof(double));
  KernelRowCache cache(rows, gamma, cache_rows, threads);

  std::vector<double> grad(m, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    if (alpha[i] == 0.0) continue;
    const auto& ki = cache.row(i);
    for (std::size_t t = 0; t < m; ++t) grad[t] += alpha[i] * ki[t];
  }
  const double eps_box = 1e-12 * upper;
  auto below_upper = [&](std::size_t t) { return alpha[t] < upper - eps_box; };
  auto above_lower = [&](std::size_t t) { return alpha[t] > eps_box; };

  long iter = 0;
  double gap = 0.0;
  for (;; ++iter) {
    // i: maximal -G among coefficients that can grow.
    std::size_t i = m;
    double gmax = -std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < m; ++t) {
      if (below_upper(t) && -grad[t] > gmax) {
        gmax = -grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t j = m;
    double best = std::numeric_limits<double>::infinity();
    const std::vector<double>* ki = i < m ? &cache.row(i) : nullptr;
    for (std::size_t t = 0; t < m; ++t) {
      if (!above_lower(t)) continue;
      gmin = std::min(gmin, -grad[t]);
      if (!ki) continue;
      const double b = gmax + grad[t];
      if (b <= 0.0) continue;
      double a = 2.0 - 2.0 * (*ki)[t];  // K_ii = K_tt = 1 for RBF
      if (a <= 0.0) a = 1e-12;
      const double obj = -(b * b) / a;
      if (obj < best) {
        best = obj;
        j = t;
      }
    }
    gap = (gmax - gmin) * scale;
    if (i == m || j == m || gap < params.tolerance) break;
    if (iter >= max_iter) {
      fail(ErrorKind::model, "solver-nonconvergence",
           "one-class solver stopped at the iteration cap with KKT gap " + format_double(gap));
    }
    const std::vector<double>& row_i = *ki;
    double quad = 2.0 - 2.0 * row_i[j];
    if (quad <= 0.0) quad = 1e-12;
    const double old_i = alpha[i], old_j = alpha[j];
    const double delta = (grad[i] - grad[j]) / quad;
    const double sum = old_i + old_j;
    double ai = old_i - delta, aj = old_j + delta;
    if (sum > upper) {
      if (ai > upper) { ai = upper; aj = sum - upper; }
    } else if (aj < 0.0) {
      aj = 0.0;
      ai = sum;
    }
    if (sum > upper) {
      if (aj > upper) { aj = upper; ai = sum - upper; }
    } else if (ai < 0.0) {
      ai = 0.0;
      aj = sum;
    }
    alpha[i] = ai;
    alpha[j] = aj;
    const double di = ai - old_i, dj = aj - old_j;
    std::vector<double> ri = row_i;  // the cache may evict row i when fetching row j
    const std::vector<double>& rj = cache.row(j);
    for (std::size_t t = 0; t < m; ++t) grad[t] += di * ri[t] + dj * rj[t];
  }

  // rho: mean gradient over free coefficients, else midpoint of the bounds.
  double ub = std::numeric_limits<double>::infinity(), lb = -ub, sum_free = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < m; ++t) {
    if (!below_upper(t)) lb = std::max(lb, grad[t]);
    else if (!above_lower(t)) ub = std::min(ub, grad[t]);
    else {
      sum_free += grad[t];
      ++free_count;
    }
  }
  OneClassKernelModel oc;
  oc.rho = free_count > 0 ? sum_free / static_cast<double>(free_count) : 0.5 * (ub + lb);
  oc.gamma = gamma;
  oc.nu = params.nu;
  oc.training_rows = m;
  oc.iterations = iter;
  oc.kkt_gap = gap;
  oc.full_alpha = alpha;
  std::vector<std::size_t> sv;
  for (std::size_t t = 0; t < m; ++t) {
    if (alpha[t] > 0.0) sv.push_back(t);
  }
  oc.support = rows.select_rows(sv);
  for (auto t : sv) oc.alpha.push_back(alpha[t]);

  AnomalyModel model;
  model.kind = AnomalyKind::one_class_kernel;
  model.feature_count = rows.cols();
  model.state = std::move(oc);
  set_training_threshold(model, rows, threads);
  return model;
}

// ---- scoring ----------------------------------------------------------------

std::vector<double> anomaly_raw_scores(const AnomalyModel& model, const Matrix& rows, int threads) {
  if (!rows.empty() && rows.cols() != model.feature_count) {
    fail(ErrorKind::model, "arity-mismatch",
         "rows have " + std::to_string(rows.cols()) + " features, model expects " +
             std::to_string(model.feature_count));
  }
  std::vector<double> out(rows.rows());
  const auto n = static_cast<std::ptrdiff_t>(rows.rows());
  if (const auto* lof = std::get_if<LofModel>(&model.state)) {
    if (rows.empty()) return out;
    const NeighborLists nn = knn_query(lof->train, rows, lof->k, threads);
    for (std::size_t q = 0; q < rows.rows(); ++q) {
      const auto idx = nn.indices_of(q);
      const auto dist = nn.distances_of(q);
      double reach = 0.0, neighbor_lrd = 0.0;
      for (std::size_t j = 0; j < lof->k; ++j) {
        reach += std::max(lof->k_distance[idx[j]], dist[j]);
        neighbor_lrd += lof->lrd[idx[j]];
      }
      const double k = static_cast<double>(lof->k);
      const double lrd = 1.0 / (reach / k + kReachEpsilon);
      out[q] = (neighbor_lrd / k) / lrd;
    }
    return out;
  }
  if (const auto* forest = std::get_if<IsolationForest>(&model.state)) {
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1) if (threads > 1)
    for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = forest->score(rows.row(static_cast<std::size_t>(i)));
    return out;
  }
  const auto& oc = std::get<OneClassKernelModel>(model.state);
#pragma omp parallel for schedule(static) num_threads(threads > 0 ? threads : 1) if (threads > 1)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = -oc.decision(rows.row(static_cast<std::size_t>(i)));
  return out;
}

AnomalyScores anomaly_score(const AnomalyModel& model, const Matrix& rows, int threads) {
  AnomalyScores s;
  s.scores = anomaly_raw_scores(model, rows, threads);
  s.threshold = model.threshold;
  s.flagged.resize(s.scores.size());
  for (std::size_t i = 0; i < s.scores.size(); ++i) s.flagged[i] = s.scores[i] > s.threshold;
  return s;
}

}  // namespace agibench
