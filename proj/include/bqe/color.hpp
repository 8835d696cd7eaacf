// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_COLOR_HPP
#define BQE_COLOR_HPP

#include "bqe/frame.hpp"

namespace bqe {

// Full-range BT.709 conversion on 3-channel frames, computed in doubles with
// a 128 chroma offset. Channel order R,G,B <-> Y,Cb,Cr. No rounding or
// clamping happens here; quantization is the PLY writer's job.
PointCloudFrame rgb_to_ycbcr(const PointCloudFrame& frame);
PointCloudFrame ycbcr_to_rgb(const PointCloudFrame& frame);

}

#endif
