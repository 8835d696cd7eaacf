// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "bqe/color.hpp"
#include "bqe/frame.hpp"
#include "bqe/ply.hpp"

#include "testutil.hpp"

using namespace bqe;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

PointCloudFrame indexed_frame(int index) {
  PointCloudFrame f;
  f.geometry = {{index, 0, 0}};
  f.attributes = Mat(1, 1);
  f.attributes(0, 0) = index;
  f.frame_index = index;
  return f;
}

}  // namespace

TEST_CASE("make_window interior") {
  std::vector<PointCloudFrame> seq = {indexed_frame(0), indexed_frame(1), indexed_frame(2)};
  TemporalWindow w = make_window(seq, 1, 1);
  REQUIRE(w.length() == 3);
  CHECK(w.frames[0] == seq[0]);
  CHECK(w.frames[1] == seq[1]);
  CHECK(w.frames[2] == seq[2]);
  CHECK(w.target() == seq[1]);
}

TEST_CASE("make_window clamps at sequence boundaries") {
  std::vector<PointCloudFrame> seq = {indexed_frame(0), indexed_frame(1), indexed_frame(2)};
  TemporalWindow w = make_window(seq, 0, 2);
  REQUIRE(w.length() == 5);
  CHECK(w.frames[0] == seq[0]);
  CHECK(w.frames[1] == seq[0]);
  CHECK(w.frames[2] == seq[0]);
  CHECK(w.frames[3] == seq[1]);
  CHECK(w.frames[4] == seq[2]);
}

TEST_CASE("make_window with radius zero is just the target frame") {
  std::vector<PointCloudFrame> seq = {indexed_frame(0), indexed_frame(1)};
  TemporalWindow w = make_window(seq, 1, 0);
  REQUIRE(w.length() == 1);
  CHECK(w.frames[0] == seq[1]);
}

TEST_CASE("make_window errors") {
  CHECK_THROWS(make_window({}, 0, 1));
  std::vector<PointCloudFrame> seq = {indexed_frame(0)};
  CHECK_THROWS(make_window(seq, 1, 1));
  CHECK_THROWS(make_window(seq, -1, 1));
}

TEST_CASE("window length and center for random settings") {
  std::mt19937_64 rng(7);
  std::vector<PointCloudFrame> seq;
  for (int i = 0; i < 9; ++i) seq.push_back(indexed_frame(i));
  for (int trial = 0; trial < 30; ++trial) {
    int t = static_cast<int>(rng() % seq.size());
    int r = static_cast<int>(rng() % 4);
    TemporalWindow w = make_window(seq, t, r);
    CHECK(w.length() == 2 * r + 1);
    CHECK(w.target() == seq[t]);
  }
}

TEST_CASE("ascii ply with rgb loads with preserved order") {
  std::string path = temp_path("bqe_test_rgb.ply");
  std::ofstream out(path, std::ios::trunc);
  out << "ply\nformat ascii 1.0\nelement vertex 4\n"
         "property int x\nproperty int y\nproperty int z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nend_header\n"
         "0 0 0 10 20 30\n1 0 0 40 50 60\n0 1 0 70 80 90\n0 0 1 100 110 120\n";
  out.close();

  PointCloudFrame f = load_ply(path);
  REQUIRE(f.point_count() == 4);
  REQUIRE(f.channel_count() == 3);
  CHECK(f.geometry[1] == Voxel{1, 0, 0});
  CHECK(f.attributes(0, 0) == 10.0);
  CHECK(f.attributes(3, 2) == 120.0);
}

TEST_CASE("ply round-trip is bit-identical") {
  std::mt19937_64 rng(11);
  PointCloudFrame f = testutil::random_frame(50, 3, rng);
  std::string p1 = temp_path("bqe_test_rt1.ply");
  std::string p2 = temp_path("bqe_test_rt2.ply");
  save_ply(f, p1);
  PointCloudFrame loaded = load_ply(p1);
  save_ply(loaded, p2);
  PointCloudFrame again = load_ply(p2);
  CHECK(loaded.geometry == f.geometry);
  CHECK(loaded.attributes == f.attributes);
  CHECK(again == loaded);
}

TEST_CASE("save rounds half away from zero then clamps") {
  PointCloudFrame f;
  f.geometry = {{0, 0, 0}, {1, 0, 0}, {2, 0, 0}, {3, 0, 0}};
  f.attributes = Mat(4, 1);
  f.attributes(0, 0) = 255.4;
  f.attributes(1, 0) = -0.6;
  f.attributes(2, 0) = 99.5;
  f.attributes(3, 0) = 300.0;
  std::string path = temp_path("bqe_test_clamp.ply");
  save_ply(f, path);
  PointCloudFrame loaded = load_ply(path);
  CHECK(loaded.attributes(0, 0) == 255.0);
  CHECK(loaded.attributes(1, 0) == 0.0);
  CHECK(loaded.attributes(2, 0) == 100.0);
  CHECK(loaded.attributes(3, 0) == 255.0);
}

TEST_CASE("single scalar attribute ply") {
  PointCloudFrame f;
  f.geometry = {{5, 6, 7}, {8, 9, 10}};
  f.attributes = Mat(2, 1);
  f.attributes(0, 0) = 12;
  f.attributes(1, 0) = 200;
  std::string path = temp_path("bqe_test_scalar.ply");
  save_ply(f, path);
  PointCloudFrame loaded = load_ply(path);
  CHECK(loaded.geometry == f.geometry);
  CHECK(loaded.attributes == f.attributes);
}

TEST_CASE("ply error reporting names the missing property") {
  std::string path = temp_path("bqe_test_nocolor.ply");
  {
    std::ofstream out(path, std::ios::trunc);
    out << "ply\nformat ascii 1.0\nelement vertex 1\n"
           "property int x\nproperty int y\nproperty int z\nend_header\n0 0 0\n";
  }
  CHECK_THROWS_WITH_AS(load_ply(path), doctest::Contains("missing-attribute-property"),
                       std::runtime_error);

  {
    std::ofstream out(path, std::ios::trunc);
    out << "ply\nformat ascii 1.0\nelement vertex 1\n"
           "property int x\nproperty int y\nproperty uchar red\nend_header\n0 0 9\n";
  }
  CHECK_THROWS_WITH_AS(load_ply(path), doctest::Contains("missing-geometry-property: z"),
                       std::runtime_error);

  {
    std::ofstream out(path, std::ios::trunc);
    out << "ply\nformat binary_big_endian 1.0\nelement vertex 1\nend_header\n";
  }
  CHECK_THROWS_WITH_AS(load_ply(path), doctest::Contains("malformed-header"), std::runtime_error);
}

TEST_CASE("rgb to ycbcr fixed points") {
  PointCloudFrame f;
  f.geometry = {{0, 0, 0}, {1, 0, 0}};
  f.attributes = Mat(2, 3);
  for (int c = 0; c < 3; ++c) f.attributes(1, c) = 128.0;
  PointCloudFrame y = rgb_to_ycbcr(f);
  CHECK(y.attributes(0, 0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(y.attributes(0, 1) == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(y.attributes(0, 2) == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(y.attributes(1, 0) == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(y.attributes(1, 1) == doctest::Approx(128.0).epsilon(1e-12));
  CHECK(y.attributes(1, 2) == doctest::Approx(128.0).epsilon(1e-12));
}

TEST_CASE("color round trip over all 8-bit grays stays within one step") {
  PointCloudFrame f;
  f.geometry.resize(256);
  f.attributes = Mat(256, 3);
  for (int v = 0; v < 256; ++v) {
    f.geometry[v] = {v, 0, 0};
    for (int c = 0; c < 3; ++c) f.attributes(v, c) = v;
  }
  PointCloudFrame ycbcr = rgb_to_ycbcr(f);
  // simulate 8-bit storage between the two conversions
  for (double& v : ycbcr.attributes.a) v = round_to_u8(v);
  PointCloudFrame back = ycbcr_to_rgb(ycbcr);
  double max_err = 0.0;
  for (int v = 0; v < 256; ++v)
    for (int c = 0; c < 3; ++c)
      max_err = std::max(max_err, std::abs(round_to_u8(back.attributes(v, c)) - double(v)));
  CHECK(max_err <= 1.0);
}

TEST_CASE("color conversion inverts exactly in real arithmetic") {
  std::mt19937_64 rng(3);
  PointCloudFrame f = testutil::random_frame(64, 3, rng);
  PointCloudFrame back = ycbcr_to_rgb(rgb_to_ycbcr(f));
  for (size_t i = 0; i < f.attributes.a.size(); ++i)
    CHECK(back.attributes.a[i] == doctest::Approx(f.attributes.a[i]).epsilon(1e-10));
}

TEST_CASE("color conversion rejects single-channel frames") {
  PointCloudFrame f;
  f.geometry = {{0, 0, 0}};
  f.attributes = Mat(1, 1);
  CHECK_THROWS_WITH_AS(rgb_to_ycbcr(f), doctest::Contains("wrong-channel-count"),
                       std::invalid_argument);
  CHECK_THROWS_WITH_AS(ycbcr_to_rgb(f), doctest::Contains("wrong-channel-count"),
                       std::invalid_argument);
}
