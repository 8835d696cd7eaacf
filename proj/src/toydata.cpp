// SPDX-License-Identifier: Apache-2.0

#include "bqe/toydata.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "bqe/ply.hpp"

namespace bqe {

namespace {

// Golden-spiral directions give even sphere coverage without rejection
// sampling, so the voxelized blob rarely collides with itself.
Voxel spiral_voxel(int i, int total, double radius, double bump_phase, double cx, double cy,
                   double cz) {
  constexpr double kGolden = 2.399963229728653;  // radians
  double z = 1.0 - 2.0 * (i + 0.5) / total;
  double r_xy = std::sqrt(std::max(0.0, 1.0 - z * z));
  double theta = kGolden * i;
  double lat = std::asin(z);
  double rho = radius * (1.0 + 0.25 * std::sin(3.0 * theta + bump_phase) * std::cos(2.0 * lat));
  double x = cx + rho * r_xy * std::cos(theta);
  double y = cy + rho * r_xy * std::sin(theta);
  double zz = cz + rho * z;
  return {static_cast<int32_t>(std::llround(x)), static_cast<int32_t>(std::llround(y)),
          static_cast<int32_t>(std::llround(zz))};
}

}  // namespace

std::vector<PointCloudFrame> make_toy_sequence(const ToyConfig& config) {
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> jitter(-0.35, 0.35);
  double half = config.grid / 2.0;
  double radius = config.grid / 3.2;
  double dir_angle = std::uniform_real_distribution<double>(0.0, 6.28)(rng);
  double dx = config.motion * std::cos(dir_angle);
  double dy = config.motion * std::sin(dir_angle);

  std::vector<PointCloudFrame> sequence;
  sequence.reserve(config.frames);
  for (int t = 0; t < config.frames; ++t) {
    double cx = half + t * dx;
    double cy = half + t * dy;
    double cz = half + 0.4 * config.motion * t;

    PointCloudFrame frame;
    frame.frame_index = t;
    std::set<Voxel> seen;
    int emitted = 0;
    int budget = config.points * 8;
    for (int i = 0; emitted < config.points && i < budget; ++i) {
      Voxel v = spiral_voxel(i, config.points, radius + jitter(rng), 0.3 * t, cx, cy, cz);
      v[0] = std::clamp(v[0], 0, config.grid - 1);
      v[1] = std::clamp(v[1], 0, config.grid - 1);
      v[2] = std::clamp(v[2], 0, config.grid - 1);
      if (!seen.insert(v).second) continue;
      frame.geometry.push_back(v);
      ++emitted;
    }

    int n = frame.point_count();
    frame.attributes = Mat(n, 3);
    for (int i = 0; i < n; ++i) {
      double x = frame.geometry[i][0], y = frame.geometry[i][1], z = frame.geometry[i][2];
      double u1 = 0.20 * (x + y + z);
      double u2 = 0.35 * (x - y) + 0.3 * z;
      double mid = config.detail_mid * std::sin(u1 + 0.5 * t);
      double fine = config.detail_fine * std::sin(u2 + 1.1 * t);
      double fs = config.base_freq_scale;
      double r = 127.5 + 100.0 * std::sin(fs * 0.07 * x + 0.9 * t) * std::cos(fs * 0.04 * y);
      double g = 127.5 + 100.0 * std::sin(fs * (0.06 * y + 0.025 * z) + 0.3 * t);
      double b = 127.5 + 100.0 * std::cos(fs * (0.05 * z + 0.02 * x) + 0.7 * t);
      frame.attributes(i, 0) = round_to_u8(r + mid + fine);
      frame.attributes(i, 1) = round_to_u8(g + mid + fine);
      frame.attributes(i, 2) = round_to_u8(b - mid + fine);
    }
    sequence.push_back(std::move(frame));
  }
  return sequence;
}

}
