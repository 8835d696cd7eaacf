// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_RECOLOR_HPP
#define BQE_RECOLOR_HPP

#include "bqe/frame.hpp"

namespace bqe {

// A reference frame's attributes remapped onto the target geometry.
struct VirtualFrame {
  PointCloudFrame frame;  // geometry == target geometry, bit for bit
  int source_index = 0;   // frame index of the reference it was built from
};

// Motion compensation by recoloring: for each target point, take the k_r
// nearest reference points; an exact geometry match copies its attribute,
// otherwise the inverse-distance-weighted mean is used.
VirtualFrame recolor(const PointCloudFrame& reference, const std::vector<Voxel>& target_geometry,
                     int k_r = 3);

// Recolors every reference frame onto the target geometry; the target frame
// passes through unchanged.
TemporalWindow compensate_window(const TemporalWindow& window, int k_r = 3);

}

#endif
