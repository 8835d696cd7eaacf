// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_FRAME_HPP
#define BQE_FRAME_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bqe/mat.hpp"

namespace bqe {

using Voxel = std::array<int32_t, 3>;

// One voxelized point cloud frame: integer geometry plus per-point attribute
// channels held as doubles (8-bit on disk, promoted for computation).
struct PointCloudFrame {
  std::vector<Voxel> geometry;  // n x 3, rows expected unique for voxelized input
  Mat attributes;               // n x c_a
  int frame_index = 0;
  std::optional<int> qp;        // known for training data only

  int point_count() const { return static_cast<int>(geometry.size()); }
  int channel_count() const { return attributes.cols; }

  bool operator==(const PointCloudFrame& o) const {
    return geometry == o.geometry && attributes == o.attributes && frame_index == o.frame_index &&
           qp == o.qp;
  }
};

// Ordered window of 2R+1 frames centered on the target frame.
struct TemporalWindow {
  std::vector<PointCloudFrame> frames;
  int radius = 0;

  int target_position() const { return radius; }
  const PointCloudFrame& target() const { return frames[radius]; }
  PointCloudFrame& target() { return frames[radius]; }
  int length() const { return static_cast<int>(frames.size()); }
};

// Checks the row-count / channel-count invariants; throws on violation.
void validate_frame(const PointCloudFrame& frame);

// Window of radius R around sequence[t]; out-of-range indices clamp to the
// first/last frame.
TemporalWindow make_window(const std::vector<PointCloudFrame>& sequence, int t, int radius);

// Geometry as an n x 3 double matrix, optionally divided by `scale`.
Mat geometry_as_mat(const PointCloudFrame& frame, double scale = 1.0);

// Single attribute channel as an n x 1 matrix.
Mat attribute_channel(const PointCloudFrame& frame, int channel);

// Replaces one attribute channel, leaving the others untouched.
void set_attribute_channel(PointCloudFrame& frame, int channel, const Mat& values);

}

#endif
