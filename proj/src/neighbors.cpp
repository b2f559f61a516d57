#include "agibench/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace agibench {

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

NeighborLists knn_impl(const Matrix& reference, const Matrix& queries, std::size_t k, bool exclude_self,
                       int threads) {
  const std::size_t m = reference.rows();
  const std::size_t available = exclude_self ? (m > 0 ? m - 1 : 0) : m;
  if (k == 0 || k > available) {
    fail(ErrorKind::model, "k-too-large",
         "k=" + std::to_string(k) + " neighbours requested from " + std::to_string(available) + " candidates");
  }
  if (queries.cols() != reference.cols()) {
    fail(ErrorKind::model, "arity-mismatch", "query and reference widths differ");
  }
  NeighborLists out;
  out.k = k;
  out.index.resize(queries.rows() * k);
  out.distance.resize(queries.rows() * k);
  const auto nq = static_cast<std::ptrdiff_t>(queries.rows());
#pragma omp parallel num_threads(threads > 0 ? threads : 1) if (threads > 1)
  {
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(m);
#pragma omp for schedule(static)
    for (std::ptrdiff_t qi = 0; qi < nq; ++qi) {
      const auto q = static_cast<std::size_t>(qi);
      cand.clear();
      const auto qrow = queries.row(q);
      for (std::size_t r = 0; r < m; ++r) {
        if (exclude_self && r == q) continue;
        cand.emplace_back(squared_distance(qrow, reference.row(r)), r);
      }
      std::nth_element(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k - 1), cand.end());
      std::sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k));
      for (std::size_t j = 0; j < k; ++j) {
        out.index[q * k + j] = cand[j].second;
        out.distance[q * k + j] = std::sqrt(cand[j].first);
      }
    }
  }
  return out;
}

}  // namespace

NeighborLists knn_self(const Matrix& points, std::size_t k, int threads) {
  return knn_impl(points, points, k, true, threads);
}

NeighborLists knn_query(const Matrix& reference, const Matrix& queries, std::size_t k, int threads) {
  return knn_impl(reference, queries, k, false, threads);
}

}  // namespace agibench
