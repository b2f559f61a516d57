#pragma once

#include <span>
#include <vector>

#include "agibench/common.hpp"

namespace agibench {

/// k nearest neighbours per query, ordered by (distance, index).
struct NeighborLists {
  std::size_t k = 0;
  std::vector<std::size_t> index;  // queries x k
  std::vector<double> distance;    // Euclidean, queries x k

  std::span<const std::size_t> indices_of(std::size_t q) const { return {index.data() + q * k, k}; }
  std::span<const double> distances_of(std::size_t q) const { return {distance.data() + q * k, k}; }
};

// Neighbours of every reference row among the other reference rows.
NeighborLists knn_self(const Matrix& points, std::size_t k, int threads = 1);
// Neighbours of each query among the reference rows.
NeighborLists knn_query(const Matrix& reference, const Matrix& queries, std::size_t k, int threads = 1);

double squared_distance(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace agibench
