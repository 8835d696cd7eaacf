// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numeric>
#include <random>

#include "bqe/attention.hpp"
#include "bqe/recolor.hpp"

#include "testutil.hpp"

using namespace bqe;

namespace {

TccaDims small_tcca(int frames) {
  TccaDims d;
  d.in = 1;
  d.hidden = 6;
  d.d_k = 4;
  d.d_v = 5;
  d.out = 3;
  d.frames = frames;
  return d;
}

TemporalWindow shared_geometry_window(int n, int radius, std::mt19937_64& rng,
                                      bool constant_attrs = false) {
  TemporalWindow w;
  w.radius = radius;
  std::vector<Voxel> geom = testutil::random_voxels(n, rng);
  for (int i = 0; i < 2 * radius + 1; ++i) {
    PointCloudFrame f;
    f.geometry = geom;
    f.attributes = constant_attrs ? Mat(n, 1, 7.5) : testutil::random_mat(n, 1, rng, 0.0, 255.0);
    f.frame_index = i;
    w.frames.push_back(std::move(f));
  }
  return w;
}

}  // namespace

TEST_CASE("tcca attention is uniform when all key embeddings are equal") {
  std::mt19937_64 rng(61);
  int n = 6, radius = 1;
  TemporalWindow w = shared_geometry_window(n, radius, rng, /*constant_attrs=*/true);
  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(3), rng);

  Mat attention;
  FeatureMap out = tcca_forward(w, store, "tcca", small_tcca(3), &attention);
  int tokens = 3 * n;
  REQUIRE(attention.rows == n);
  REQUIRE(attention.cols == tokens);
  for (int i = 0; i < attention.rows; ++i)
    for (int j = 0; j < attention.cols; ++j)
      CHECK(attention(i, j) == doctest::Approx(1.0 / tokens).epsilon(1e-12));
  // constant inputs make every attribute row of the output identical
  for (int i = 1; i < out.values.rows; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(out.values(i, c) == doctest::Approx(out.values(0, c)).epsilon(1e-12));
}

TEST_CASE("tcca single-token attention weight is exactly one") {
  std::mt19937_64 rng(67);
  TemporalWindow w = shared_geometry_window(1, 0, rng);
  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(1), rng);
  Mat attention;
  tcca_forward(w, store, "tcca", small_tcca(1), &attention);
  REQUIRE(attention.rows == 1);
  REQUIRE(attention.cols == 1);
  CHECK(attention(0, 0) == 1.0);
}

TEST_CASE("tcca attention rows are simplex rows on random inputs") {
  std::mt19937_64 rng(71);
  TemporalWindow w = shared_geometry_window(9, 2, rng);
  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(5), rng);
  Mat attention;
  tcca_forward(w, store, "tcca", small_tcca(5), &attention);
  for (int i = 0; i < attention.rows; ++i) {
    double sum = 0.0;
    for (int j = 0; j < attention.cols; ++j) {
      CHECK(attention(i, j) >= 0.0);
      sum += attention(i, j);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }
}

TEST_CASE("tcca copies target geometry bit-exactly and honors the skip connection") {
  std::mt19937_64 rng(73);
  TemporalWindow w = shared_geometry_window(8, 1, rng);
  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(3), rng);
  // zero the output projection: the attribute part must equal the target attrs
  store.get("tcca.o.w").value.fill(0.0);
  store.get("tcca.o.b").value.fill(0.0);

  FeatureMap out = tcca_forward(w, store, "tcca", small_tcca(3));
  Mat geom = geometry_as_mat(w.target());
  REQUIRE(out.values.cols == 3 + 3);
  for (int i = 0; i < out.values.rows; ++i) {
    for (int c = 0; c < 3; ++c)
      CHECK(out.values(i, c) == w.target().attributes(i, 0));
    for (int d = 0; d < 3; ++d)
      CHECK(out.values(i, 3 + d) == geom(i, d));
  }
}

TEST_CASE("tcca rejects windows with mismatched geometry") {
  std::mt19937_64 rng(79);
  TemporalWindow w = shared_geometry_window(8, 1, rng);
  w.frames[0].geometry[0][0] += 1;
  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(3), rng);
  CHECK_THROWS_WITH_AS(tcca_forward(w, store, "tcca", small_tcca(3)),
                       doctest::Contains("geometry-mismatch"), std::invalid_argument);
}

TEST_CASE("tcca channel-concat variant runs and differs from token concat") {
  std::mt19937_64 rng(83);
  TemporalWindow w = shared_geometry_window(8, 1, rng);
  TccaDims token = small_tcca(3);
  TccaDims channel = token;
  channel.channel_concat = true;

  std::mt19937_64 rng_a(7), rng_b(7);
  ParamStore store_a, store_b;
  create_tcca_params(store_a, "tcca", token, rng_a);
  create_tcca_params(store_b, "tcca", channel, rng_b);

  Mat att_a, att_b;
  FeatureMap fa = tcca_forward(w, store_a, "tcca", token, &att_a);
  FeatureMap fb = tcca_forward(w, store_b, "tcca", channel, &att_b);
  CHECK(att_a.cols == 24);  // tokens from all frames
  CHECK(att_b.cols == 8);   // per-point tokens, frames stacked on channels
  CHECK(fa.values.rows == fb.values.rows);
  CHECK(fa.values.cols == fb.values.cols);
}

TEST_CASE("na output rows are identical for constant features on symmetric geometry") {
  ParamStore store;
  std::mt19937_64 rng(89);
  NaDims dims{2, 5, 4};
  create_na_params(store, "na", dims, rng);

  FeatureMap f;
  f.geometry = Mat(4, 3);
  PointCloudFrame frame;
  frame.geometry = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}};  // unit square
  f.values = Mat(4, 2, 3.25);
  NeighborIndex nn = knn(frame.geometry, frame.geometry, 3);
  FeatureMap out = na_forward(f, store, "na", nn);
  REQUIRE(out.values.cols == 4);
  for (int i = 1; i < 4; ++i)
    for (int c = 0; c < 4; ++c)
      CHECK(out.values(i, c) == doctest::Approx(out.values(0, c)).epsilon(1e-12));
}

TEST_CASE("na with a self-only neighborhood puts weight one on self") {
  std::mt19937_64 rng(97);
  ParamStore store;
  NaDims dims{3, 6, 5};
  create_na_params(store, "na", dims, rng);

  PointCloudFrame frame = testutil::random_frame(6, 1, rng);
  FeatureMap f{testutil::random_mat(6, 3, rng), geometry_as_mat(frame)};
  NeighborIndex nn = knn(frame.geometry, frame.geometry, 1);
  Mat weights;
  FeatureMap out = na_forward(f, store, "na", nn, true, &weights);
  for (int r = 0; r < weights.rows; ++r)
    for (int c = 0; c < weights.cols; ++c) CHECK(weights(r, c) == 1.0);
  CHECK(out.values.all_finite());
}

TEST_CASE("na is permutation-equivariant given distinct distances") {
  std::mt19937_64 rng(101);
  int n = 10, k = 4;
  std::vector<Voxel> geom = testutil::random_voxels(n, rng, 997);
  Mat values = testutil::random_mat(n, 3, rng);

  ParamStore store;
  create_na_params(store, "na", NaDims{3, 6, 5}, rng);

  PointCloudFrame frame;
  frame.geometry = geom;
  FeatureMap f{values, geometry_as_mat(frame)};
  FeatureMap base = na_forward(f, store, "na", knn(geom, geom, k));

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Voxel> pgeom(n);
  Mat pvalues(n, 3);
  for (int i = 0; i < n; ++i) {
    pgeom[perm[i]] = geom[i];
    for (int c = 0; c < 3; ++c) pvalues(perm[i], c) = values(i, c);
  }
  PointCloudFrame pframe;
  pframe.geometry = pgeom;
  FeatureMap pf{pvalues, geometry_as_mat(pframe)};
  FeatureMap permuted = na_forward(pf, store, "na", knn(pgeom, pgeom, k));

  for (int i = 0; i < n; ++i)
    for (int c = 0; c < 5; ++c)
      CHECK(permuted.values(perm[i], c) == doctest::Approx(base.values(i, c)).epsilon(1e-12));
}

TEST_CASE("na rejects out-of-range neighbor indices") {
  std::mt19937_64 rng(103);
  ParamStore store;
  create_na_params(store, "na", NaDims{1, 4, 3}, rng);
  Tape t;
  int f = t.constant(testutil::random_mat(4, 1, rng));
  NeighborCtx ctx;
  ctx.k = 1;
  ctx.center_flat = {0, 1, 2, 3};
  ctx.neighbor_flat = {0, 1, 2, 9};
  ctx.distances = Mat(4, 1);
  CHECK_THROWS_WITH_AS(na_tape(t, store, "na", f, ctx),
                       doctest::Contains("neighbor-index-out-of-range"), std::out_of_range);
}

TEST_CASE("dcna with one block reduces to na plus the transition") {
  std::mt19937_64 rng(107);
  PointCloudFrame frame = testutil::random_frame(12, 1, rng);
  NeighborIndex nn = knn(frame.geometry, frame.geometry, 4);
  Mat values = testutil::random_mat(12, 3, rng);

  std::mt19937_64 rng_params(5);
  ParamStore store;
  create_dcna_params(store, "d", 3, 1, 6, 5, 4, true, rng_params);

  FeatureMap f{values, geometry_as_mat(frame)};
  FeatureMap dcna_out = dcna_forward(f, store, "d", nn, 1);

  Tape t;
  NeighborCtx ctx = make_neighbor_ctx(nn);
  int x = t.constant(values);
  int na = na_tape(t, store, "d.b0", x, ctx).f3;
  int manual = t.leaky_relu(linear_tape(t, store, "d.trans", t.concat_cols({x, na})), kLeakySlope);
  CHECK(t.val(manual) == dcna_out.values);
}

TEST_CASE("zeroing a later dcna block leaves earlier block outputs unchanged") {
  std::mt19937_64 rng(109);
  PointCloudFrame frame = testutil::random_frame(10, 1, rng);
  NeighborIndex nn = knn(frame.geometry, frame.geometry, 3);
  Mat values = testutil::random_mat(10, 4, rng);

  std::mt19937_64 rng_params(9);
  ParamStore store;
  create_dcna_params(store, "d", 4, 2, 6, 5, 4, true, rng_params);

  FeatureMap f{values, geometry_as_mat(frame)};
  std::vector<Mat> blocks_before;
  dcna_forward(f, store, "d", nn, 2, &blocks_before);

  store.get("d.b1.t2.w").value.fill(0.0);
  store.get("d.b1.t2.b").value.fill(0.0);
  std::vector<Mat> blocks_after;
  dcna_forward(f, store, "d", nn, 2, &blocks_after);

  CHECK(blocks_before[0] == blocks_after[0]);
  CHECK(!(blocks_before[1] == blocks_after[1]));
}

TEST_CASE("dcna output width equals the trunk width for any block count") {
  std::mt19937_64 rng(113);
  PointCloudFrame frame = testutil::random_frame(9, 1, rng);
  NeighborIndex nn = knn(frame.geometry, frame.geometry, 3);
  Mat values = testutil::random_mat(9, 2, rng);
  FeatureMap f{values, geometry_as_mat(frame)};

  for (int blocks = 1; blocks <= 4; ++blocks) {
    std::mt19937_64 rng_params(blocks);
    ParamStore store;
    create_dcna_params(store, "d", 2, blocks, 5, 4, 6, true, rng_params);
    FeatureMap out = dcna_forward(f, store, "d", nn, blocks);
    CHECK(out.values.rows == 9);
    CHECK(out.values.cols == 6);
    CHECK(out.values.all_finite());
  }
}

TEST_CASE("na parameter gradients match finite differences") {
  std::mt19937_64 rng(127);
  int n = 12, k = 4;
  PointCloudFrame frame = testutil::random_frame(n, 1, rng);
  NeighborCtx ctx = make_neighbor_ctx(knn(frame.geometry, frame.geometry, k));
  Mat values = testutil::random_mat(n, 3, rng);
  Mat target = testutil::random_mat(n, 5, rng);

  ParamStore store;
  create_na_params(store, "na", NaDims{3, 6, 5}, rng);

  auto forward = [&](bool backward) {
    Tape t;
    int f = t.constant(values);
    int out = na_tape(t, store, "na", f, ctx).f3;
    int loss = t.mse_against(out, target);
    if (backward) t.backward(loss);
    return t.val(loss)(0, 0);
  };
  store.zero_grads();
  forward(true);
  auto gc = testutil::check_param_gradients(store, [&] { return forward(false); });
  CHECK(gc.max_rel_err < 1e-4);
}

TEST_CASE("tcca parameter gradients match finite differences") {
  std::mt19937_64 rng(131);
  int n = 8, radius = 1;
  TemporalWindow w = shared_geometry_window(n, radius, rng);
  for (auto& f : w.frames)
    for (double& v : f.attributes.a) v /= 255.0;  // keep activations in a tame range
  Mat geom = geometry_as_mat(w.target(), 64.0);
  Mat target = testutil::random_mat(n, 3 + 3, rng);

  ParamStore store;
  create_tcca_params(store, "tcca", small_tcca(3), rng);

  auto forward = [&](bool backward) {
    Tape t;
    std::vector<int> frames;
    for (const auto& f : w.frames) frames.push_back(t.constant(f.attributes));
    int g = t.constant(geom);
    int out = tcca_tape(t, store, "tcca", small_tcca(3), frames, radius, g).f_o;
    int loss = t.mse_against(out, target);
    if (backward) t.backward(loss);
    return t.val(loss)(0, 0);
  };
  store.zero_grads();
  forward(true);
  auto gc = testutil::check_param_gradients(store, [&] { return forward(false); });
  CHECK(gc.max_rel_err < 1e-4);
}
