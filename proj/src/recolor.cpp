// SPDX-License-Identifier: Apache-2.0

#include "bqe/recolor.hpp"

#include <stdexcept>

#include "bqe/knn.hpp"
#include "bqe/threading.hpp"

namespace bqe {

VirtualFrame recolor(const PointCloudFrame& reference, const std::vector<Voxel>& target_geometry,
                     int k_r) {
  if (reference.point_count() == 0) throw std::invalid_argument("recolor: empty-reference");
  if (k_r < 1) throw std::invalid_argument("recolor: k_r must be >= 1");

  VirtualFrame out;
  out.source_index = reference.frame_index;
  out.frame.frame_index = reference.frame_index;
  out.frame.qp = reference.qp;
  out.frame.geometry = target_geometry;

  int n = static_cast<int>(target_geometry.size());
  int channels = reference.channel_count();
  out.frame.attributes = Mat(n, channels);

  if (target_geometry == reference.geometry) {
    out.frame.attributes = reference.attributes;
    return out;
  }

  int k = std::min(k_r, reference.point_count());
  NeighborIndex nn = knn(target_geometry, reference.geometry, k);

  parallel_for(n, [&](int64_t i0, int64_t i1) {
    for (int64_t i = i0; i < i1; ++i) {
      const int32_t* idx = nn.row_indices(static_cast<int>(i));
      const double* dist = nn.row_distances(static_cast<int>(i));
      if (dist[0] == 0.0 || k == 1) {
        for (int c = 0; c < channels; ++c)
          out.frame.attributes(static_cast<int>(i), c) = reference.attributes(idx[0], c);
        continue;
      }
      double wsum = 0.0;
      for (int j = 0; j < k; ++j) wsum += 1.0 / dist[j];
      for (int c = 0; c < channels; ++c) {
        double acc = 0.0;
        for (int j = 0; j < k; ++j) acc += reference.attributes(idx[j], c) / dist[j];
        out.frame.attributes(static_cast<int>(i), c) = acc / wsum;
      }
    }
  });
  return out;
}

TemporalWindow compensate_window(const TemporalWindow& window, int k_r) {
  TemporalWindow out;
  out.radius = window.radius;
  out.frames.reserve(window.frames.size());
  const PointCloudFrame& target = window.target();
  for (int i = 0; i < window.length(); ++i) {
    if (i == window.target_position()) {
      out.frames.push_back(target);
    } else {
      out.frames.push_back(recolor(window.frames[i], target.geometry, k_r).frame);
    }
  }
  return out;
}

}
