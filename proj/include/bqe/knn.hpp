// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_KNN_HPP
#define BQE_KNN_HPP

#include <cstdint>
#include <vector>

#include "bqe/frame.hpp"

namespace bqe {

// Exact k-nearest-neighbor result. Per query row, indices into the support
// set sorted by (distance, index); distances are Euclidean in voxel units.
// A query that is itself a support point appears at column 0 with distance 0.
struct NeighborIndex {
  int k = 0;
  std::vector<int32_t> indices;  // m*k, row-major
  std::vector<double> distances; // m*k, non-decreasing per row

  int query_count() const { return k == 0 ? 0 : static_cast<int>(indices.size()) / k; }
  const int32_t* row_indices(int q) const { return indices.data() + static_cast<size_t>(q) * k; }
  const double* row_distances(int q) const { return distances.data() + static_cast<size_t>(q) * k; }
};

// Brute-force exact search; ties broken by lower support index so results are
// reproducible across platforms and thread counts.
NeighborIndex knn(const std::vector<Voxel>& query, const std::vector<Voxel>& support, int k);

}

#endif
