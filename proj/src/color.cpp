// SPDX-License-Identifier: Apache-2.0

#include "bqe/color.hpp"

#include <stdexcept>

namespace bqe {

namespace {

constexpr double kKr = 0.2126;
constexpr double kKg = 0.7152;
constexpr double kKb = 0.0722;
constexpr double kCbScale = 2.0 * (1.0 - kKb);  // 1.8556
constexpr double kCrScale = 2.0 * (1.0 - kKr);  // 1.5748

void require_three_channels(const PointCloudFrame& frame, const char* op) {
  if (frame.channel_count() != 3)
    throw std::invalid_argument(std::string(op) + ": wrong-channel-count: expected 3, got " +
                                std::to_string(frame.channel_count()));
}

}  // namespace

PointCloudFrame rgb_to_ycbcr(const PointCloudFrame& frame) {
  require_three_channels(frame, "rgb_to_ycbcr");
  PointCloudFrame out = frame;
  for (int i = 0; i < frame.point_count(); ++i) {
    double r = frame.attributes(i, 0);
    double g = frame.attributes(i, 1);
    double b = frame.attributes(i, 2);
    double y = kKr * r + kKg * g + kKb * b;
    out.attributes(i, 0) = y;
    out.attributes(i, 1) = (b - y) / kCbScale + 128.0;
    out.attributes(i, 2) = (r - y) / kCrScale + 128.0;
  }
  return out;
}

PointCloudFrame ycbcr_to_rgb(const PointCloudFrame& frame) {
  require_three_channels(frame, "ycbcr_to_rgb");
  PointCloudFrame out = frame;
  for (int i = 0; i < frame.point_count(); ++i) {
    double y = frame.attributes(i, 0);
    double cb = frame.attributes(i, 1) - 128.0;
    double cr = frame.attributes(i, 2) - 128.0;
    double r = y + kCrScale * cr;
    double b = y + kCbScale * cb;
    double g = (y - kKr * r - kKb * b) / kKg;
    out.attributes(i, 0) = r;
    out.attributes(i, 1) = g;
    out.attributes(i, 2) = b;
  }
  return out;
}

}
