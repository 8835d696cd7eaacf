// SPDX-License-Identifier: Apache-2.0

#include "bqe/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bqe/threading.hpp"

namespace bqe {

namespace {

inline double sq_dist(const Voxel& a, const Voxel& b) {
  double dx = static_cast<double>(a[0]) - b[0];
  double dy = static_cast<double>(a[1]) - b[1];
  double dz = static_cast<double>(a[2]) - b[2];
  return dx * dx + dy * dy + dz * dz;
}

}  // namespace

NeighborIndex knn(const std::vector<Voxel>& query, const std::vector<Voxel>& support, int k) {
  if (support.empty()) throw std::invalid_argument("knn: empty-support");
  if (k < 1 || k > static_cast<int>(support.size()))
    throw std::invalid_argument("knn: k-too-large: k=" + std::to_string(k) + ", support=" +
                                std::to_string(support.size()));

  int m = static_cast<int>(query.size());
  int n = static_cast<int>(support.size());
  NeighborIndex out;
  out.k = k;
  out.indices.resize(static_cast<size_t>(m) * k);
  out.distances.resize(static_cast<size_t>(m) * k);

  parallel_for(m, [&](int64_t q0, int64_t q1) {
    std::vector<std::pair<double, int32_t>> heap;  // max-heap on (dist, index)
    for (int64_t q = q0; q < q1; ++q) {
      heap.clear();
      for (int32_t j = 0; j < n; ++j) {
        double d2 = sq_dist(query[q], support[j]);
        if (static_cast<int>(heap.size()) < k) {
          heap.emplace_back(d2, j);
          std::push_heap(heap.begin(), heap.end());
        } else if (std::make_pair(d2, j) < heap.front()) {
          std::pop_heap(heap.begin(), heap.end());
          heap.back() = {d2, j};
          std::push_heap(heap.begin(), heap.end());
        }
      }
      std::sort_heap(heap.begin(), heap.end());
      int32_t* idx = out.indices.data() + static_cast<size_t>(q) * k;
      double* dst = out.distances.data() + static_cast<size_t>(q) * k;
      for (int c = 0; c < k; ++c) {
        idx[c] = heap[c].second;
        dst[c] = std::sqrt(heap[c].first);
      }
    }
  });
  return out;
}

}
