// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_ENHANCE_HPP
#define BQE_ENHANCE_HPP

#include <vector>

#include "bqe/model.hpp"

namespace bqe {

struct EnhanceOptions {
  int patch_size = 2048;
  double stride_fraction = 0.5;
};

// Enhances frame t of a single-channel sequence: builds the clamped temporal
// window, runs the model per patch (references recolored onto each patch's
// geometry) and averages overlapping patch outputs back together.
PointCloudFrame enhance_frame(const std::vector<PointCloudFrame>& component_sequence, int t,
                              BqeParams& params, const EnhanceOptions& options);

}

#endif
