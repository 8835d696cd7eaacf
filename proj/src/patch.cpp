// SPDX-License-Identifier: Apache-2.0

#include "bqe/patch.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "bqe/knn.hpp"

namespace bqe {

namespace {

inline double sq_dist(const Voxel& a, const Voxel& b) {
  double dx = static_cast<double>(a[0]) - b[0];
  double dy = static_cast<double>(a[1]) - b[1];
  double dz = static_cast<double>(a[2]) - b[2];
  return dx * dx + dy * dy + dz * dz;
}

std::vector<int> points_nearest_seed(const std::vector<Voxel>& geometry, int seed, int patch_size) {
  NeighborIndex nn = knn({geometry[seed]}, geometry, patch_size);
  return std::vector<int>(nn.indices.begin(), nn.indices.end());
}

}  // namespace

std::vector<int> farthest_point_order(const std::vector<Voxel>& geometry, int count) {
  int n = static_cast<int>(geometry.size());
  count = std::min(count, n);
  std::vector<int> order;
  if (count <= 0) return order;
  order.reserve(count);
  std::vector<double> mindist(n, std::numeric_limits<double>::infinity());
  int current = 0;
  for (int s = 0; s < count; ++s) {
    order.push_back(current);
    for (int i = 0; i < n; ++i) mindist[i] = std::min(mindist[i], sq_dist(geometry[i], geometry[current]));
    double best = -1.0;
    int best_idx = 0;
    for (int i = 0; i < n; ++i) {
      if (mindist[i] > best) {
        best = mindist[i];
        best_idx = i;
      }
    }
    current = best_idx;
  }
  return order;
}

PatchSet generate_patches(const PointCloudFrame& frame, int patch_size, double stride_fraction) {
  if (patch_size < 1) throw std::invalid_argument("generate_patches: patch_size must be >= 1");
  if (!(stride_fraction > 0.0 && stride_fraction <= 1.0))
    throw std::invalid_argument("generate_patches: stride_fraction must be in (0, 1]");

  int n = frame.point_count();
  PatchSet set;
  set.origin_n = n;
  if (n == 0) return set;

  if (patch_size >= n) {
    std::vector<int> all(n);
    for (int i = 0; i < n; ++i) all[i] = i;
    set.patches.push_back(std::move(all));
    return set;
  }

  int target_seeds = std::max(1, static_cast<int>(std::ceil(n / (patch_size * stride_fraction))));

  std::vector<char> covered(n, 0);
  std::vector<double> mindist(n, std::numeric_limits<double>::infinity());
  int covered_count = 0;
  int seed = 0;  // farthest-point sampling starts at index 0

  auto emit_patch = [&](int s) {
    std::vector<int> patch = points_nearest_seed(frame.geometry, s, patch_size);
    for (int idx : patch) {
      if (!covered[idx]) {
        covered[idx] = 1;
        ++covered_count;
      }
    }
    for (int i = 0; i < n; ++i) mindist[i] = std::min(mindist[i], sq_dist(frame.geometry[i], frame.geometry[s]));
    set.patches.push_back(std::move(patch));
  };

  for (int s = 0; s < target_seeds; ++s) {
    emit_patch(seed);
    double best = -1.0;
    int best_idx = 0;
    for (int i = 0; i < n; ++i) {
      if (mindist[i] > best) {
        best = mindist[i];
        best_idx = i;
      }
    }
    seed = best_idx;
  }

  // Extend with farthest uncovered seeds until the frame is fully covered.
  while (covered_count < n) {
    double best = -1.0;
    int best_idx = -1;
    for (int i = 0; i < n; ++i) {
      if (!covered[i] && mindist[i] > best) {
        best = mindist[i];
        best_idx = i;
      }
    }
    emit_patch(best_idx);
  }
  return set;
}

Mat fuse_patches(const std::vector<std::pair<std::vector<int>, Mat>>& patch_outputs, int origin_n) {
  if (origin_n < 0) throw std::invalid_argument("fuse_patches: negative origin_n");
  int cols = -1;
  for (const auto& [indices, values] : patch_outputs) {
    if (static_cast<int>(indices.size()) != values.rows)
      throw std::invalid_argument("fuse_patches: index/value row mismatch");
    if (cols < 0) cols = values.cols;
    if (values.cols != cols) throw std::invalid_argument("fuse_patches: mixed value widths");
  }
  if (cols < 0) cols = 1;

  Mat sum(origin_n, cols);
  std::vector<int> count(origin_n, 0);
  for (const auto& [indices, values] : patch_outputs) {
    for (int r = 0; r < values.rows; ++r) {
      int idx = indices[r];
      if (idx < 0 || idx >= origin_n) throw std::out_of_range("fuse_patches: index out of range");
      ++count[idx];
      for (int c = 0; c < cols; ++c) sum(idx, c) += values(r, c);
    }
  }
  for (int i = 0; i < origin_n; ++i) {
    if (count[i] == 0) throw std::runtime_error("fuse_patches: uncovered-point: " + std::to_string(i));
    for (int c = 0; c < cols; ++c) sum(i, c) /= count[i];
  }
  return sum;
}

}
