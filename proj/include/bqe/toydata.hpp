// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_TOYDATA_HPP
#define BQE_TOYDATA_HPP

#include <cstdint>
#include <vector>

#include "bqe/frame.hpp"

namespace bqe {

// Synthetic dynamic sequence: a textured blob drifting through a voxel grid.
// Deterministic for a given config; geometry rows are unique per frame and
// attributes are integer RGB fields built from a smooth base plus two detail
// layers. The detail layers sit at amplitudes that coarse quantization wipes
// out, which is what makes distortion levels recognizable from content.
struct ToyConfig {
  int frames = 5;
  int points = 512;
  uint64_t seed = 1;
  int grid = 64;          // voxel grid extent per axis
  double motion = 1.5;    // per-frame drift in voxels
  double base_freq_scale = 1.0;  // scales the smooth base-field frequencies
  double detail_mid = 6.0;   // mid-scale detail amplitude
  double detail_fine = 2.0;  // fine detail amplitude
};

std::vector<PointCloudFrame> make_toy_sequence(const ToyConfig& config);

}

#endif
