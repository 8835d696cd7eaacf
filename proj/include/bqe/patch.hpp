// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_PATCH_HPP
#define BQE_PATCH_HPP

#include <vector>

#include "bqe/frame.hpp"
#include "bqe/mat.hpp"

namespace bqe {

// Overlapping point-index subsets that jointly cover a frame.
struct PatchSet {
  std::vector<std::vector<int>> patches;
  int origin_n = 0;
};

// Deterministic farthest-point ordering over the geometry, starting at index
// 0, ties broken by lower index.
std::vector<int> farthest_point_order(const std::vector<Voxel>& geometry, int count);

// Seeds patches at farthest-point-sampled centers; each patch holds the
// patch_size points nearest its seed. Seeds are added (targeting roughly
// n / (patch_size * stride_fraction) of them) until every point is covered.
// patch_size >= n degenerates to a single whole-frame patch.
PatchSet generate_patches(const PointCloudFrame& frame, int patch_size, double stride_fraction);

// Per point, the arithmetic mean over all patch outputs containing it.
// patch_outputs pairs each index list with an values matrix (|patch| x c).
Mat fuse_patches(const std::vector<std::pair<std::vector<int>, Mat>>& patch_outputs, int origin_n);

}

#endif
