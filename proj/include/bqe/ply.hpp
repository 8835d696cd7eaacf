// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_PLY_HPP
#define BQE_PLY_HPP

#include <string>

#include "bqe/frame.hpp"

namespace bqe {

// Reads an ASCII or binary-little-endian PLY. Requires x,y,z vertex
// properties (numeric, coerced to integer voxels) plus either red/green/blue
// or one scalar attribute property; any extra vertex properties are skipped.
// Throws with "missing-geometry-property", "missing-attribute-property" or
// "malformed-header" messages naming the offending property.
PointCloudFrame load_ply(const std::string& path);

// Writes binary-little-endian PLY: int32 x,y,z plus uchar attributes
// (red/green/blue for 3 channels, intensity for 1). Attribute values are
// rounded half away from zero, then clamped to [0, 255].
void save_ply(const PointCloudFrame& frame, const std::string& path);

// The rounding rule used on export, exposed for reuse.
int round_to_u8(double v);

}

#endif
