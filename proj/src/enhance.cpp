// SPDX-License-Identifier: Apache-2.0

#include "bqe/enhance.hpp"

#include <stdexcept>

#include "bqe/patch.hpp"

namespace bqe {

PointCloudFrame enhance_frame(const std::vector<PointCloudFrame>& component_sequence, int t,
                              BqeParams& params, const EnhanceOptions& options) {
  TemporalWindow window = make_window(component_sequence, t, params.config.radius);
  const PointCloudFrame& target = window.target();
  if (target.channel_count() != 1)
    throw std::invalid_argument("enhance_frame: expected a single attribute channel");

  PatchSet patches = generate_patches(target, options.patch_size, options.stride_fraction);
  std::vector<std::pair<std::vector<int>, Mat>> outputs;
  outputs.reserve(patches.patches.size());

  for (const auto& patch : patches.patches) {
    std::vector<Voxel> geom(patch.size());
    Mat attrs(static_cast<int>(patch.size()), 1);
    for (size_t r = 0; r < patch.size(); ++r) {
      geom[r] = target.geometry[patch[r]];
      attrs(static_cast<int>(r), 0) = target.attributes(patch[r], 0);
    }

    TemporalWindow patch_window;
    patch_window.radius = window.radius;
    for (int i = 0; i < window.length(); ++i) {
      if (i == window.target_position()) {
        PointCloudFrame f;
        f.geometry = geom;
        f.attributes = attrs;
        f.frame_index = target.frame_index;
        f.qp = target.qp;
        patch_window.frames.push_back(std::move(f));
      } else {
        patch_window.frames.push_back(
            recolor(window.frames[i], geom, params.config.k_recolor).frame);
      }
    }

    PointCloudFrame enhanced = bqe_forward(patch_window, params);
    outputs.emplace_back(patch, std::move(enhanced.attributes));
  }

  PointCloudFrame out;
  out.geometry = target.geometry;
  out.attributes = fuse_patches(outputs, target.point_count());
  out.frame_index = target.frame_index;
  out.qp = target.qp;
  return out;
}

}
