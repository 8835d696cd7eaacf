// SPDX-License-Identifier: Apache-2.0

#include "bqe/frame.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace bqe {

void validate_frame(const PointCloudFrame& frame) {
  if (static_cast<int>(frame.geometry.size()) != frame.attributes.rows)
    throw std::invalid_argument("frame: attribute row count " + std::to_string(frame.attributes.rows) +
                                " does not match geometry row count " +
                                std::to_string(frame.geometry.size()));
  if (!frame.attributes.all_finite())
    throw std::invalid_argument("frame: non-finite attribute value");
}

TemporalWindow make_window(const std::vector<PointCloudFrame>& sequence, int t, int radius) {
  if (sequence.empty()) throw std::invalid_argument("make_window: empty-sequence");
  int n = static_cast<int>(sequence.size());
  if (t < 0 || t >= n)
    throw std::out_of_range("make_window: t-out-of-range: " + std::to_string(t) + " for " +
                            std::to_string(n) + " frames");
  if (radius < 0) throw std::invalid_argument("make_window: negative radius");

  TemporalWindow window;
  window.radius = radius;
  window.frames.reserve(2 * radius + 1);
  int channels = sequence[t].channel_count();
  for (int i = t - radius; i <= t + radius; ++i) {
    const PointCloudFrame& f = sequence[std::clamp(i, 0, n - 1)];
    if (f.channel_count() != channels)
      throw std::invalid_argument("make_window: mixed attribute channel counts in window");
    window.frames.push_back(f);
  }
  return window;
}

Mat geometry_as_mat(const PointCloudFrame& frame, double scale) {
  Mat g(frame.point_count(), 3);
  double inv = 1.0 / scale;
  for (int i = 0; i < frame.point_count(); ++i)
    for (int d = 0; d < 3; ++d) g(i, d) = frame.geometry[i][d] * inv;
  return g;
}

Mat attribute_channel(const PointCloudFrame& frame, int channel) {
  if (channel < 0 || channel >= frame.channel_count())
    throw std::out_of_range("attribute_channel: channel out of range");
  Mat v(frame.point_count(), 1);
  for (int i = 0; i < frame.point_count(); ++i) v(i, 0) = frame.attributes(i, channel);
  return v;
}

void set_attribute_channel(PointCloudFrame& frame, int channel, const Mat& values) {
  if (values.rows != frame.point_count() || values.cols != 1)
    throw std::invalid_argument("set_attribute_channel: shape mismatch");
  if (channel < 0 || channel >= frame.channel_count())
    throw std::out_of_range("set_attribute_channel: channel out of range");
  for (int i = 0; i < frame.point_count(); ++i) frame.attributes(i, channel) = values(i, 0);
}

}
