// SPDX-License-Identifier: Apache-2.0

#include "bqe/attention.hpp"

#include <cmath>
#include <stdexcept>

namespace bqe {

NeighborCtx make_neighbor_ctx(const NeighborIndex& nn, double distance_scale) {
  NeighborCtx ctx;
  ctx.k = nn.k;
  int m = nn.query_count();
  ctx.center_flat.resize(static_cast<size_t>(m) * nn.k);
  ctx.neighbor_flat.resize(static_cast<size_t>(m) * nn.k);
  ctx.distances = Mat(m * nn.k, 1);
  double inv = 1.0 / distance_scale;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < nn.k; ++j) {
      size_t flat = static_cast<size_t>(i) * nn.k + j;
      ctx.center_flat[flat] = i;
      ctx.neighbor_flat[flat] = nn.indices[flat];
      ctx.distances(static_cast<int>(flat), 0) = nn.distances[flat] * inv;
    }
  }
  return ctx;
}

void create_tcca_params(ParamStore& store, const std::string& prefix, const TccaDims& dims,
                        std::mt19937_64& rng) {
  int kv_in = dims.channel_concat ? dims.in * dims.frames : dims.in;
  for (const char* head : {"q", "k", "v"}) {
    int in = head[0] == 'q' ? dims.in : kv_in;
    int out = head[0] == 'v' ? dims.d_v : dims.d_k;
    create_linear(store, prefix + "." + head + "1", in, dims.hidden, rng);
    create_linear(store, prefix + "." + head + "2", dims.hidden, dims.hidden, rng);
    create_linear(store, prefix + "." + head + "3", dims.hidden, out, rng);
  }
  create_linear(store, prefix + ".o", dims.d_v, dims.out, rng);
}

void create_na_params(ParamStore& store, const std::string& prefix, const NaDims& dims,
                      std::mt19937_64& rng) {
  create_linear(store, prefix + ".t1", 2 * dims.in, dims.hidden, rng);
  create_linear(store, prefix + ".t2", dims.hidden, dims.out, rng);
  Param& pe = store.create(prefix + ".pe.w", 1, dims.out);
  init_uniform_fan_in(pe.value, 1, rng);
}

void create_mlp_block_params(ParamStore& store, const std::string& prefix, const NaDims& dims,
                             std::mt19937_64& rng) {
  create_linear(store, prefix + ".t1", dims.in, dims.hidden, rng);
  create_linear(store, prefix + ".t2", dims.hidden, dims.out, rng);
}

void create_dcna_params(ParamStore& store, const std::string& prefix, int in_width, int na_blocks,
                        int na_hidden, int na_out, int trunk_out, bool use_na,
                        std::mt19937_64& rng) {
  for (int b = 0; b < na_blocks; ++b) {
    NaDims dims{in_width + b * na_out, na_hidden, na_out};
    const std::string name = prefix + ".b" + std::to_string(b);
    if (use_na)
      create_na_params(store, name, dims, rng);
    else
      create_mlp_block_params(store, name, dims, rng);
  }
  create_linear(store, prefix + ".trans", in_width + na_blocks * na_out, trunk_out, rng);
}

int linear_tape(Tape& t, ParamStore& store, const std::string& prefix, int x) {
  return t.add_row(t.matmul(x, t.param(store.get(prefix + ".w"))),
                   t.param(store.get(prefix + ".b")));
}

int linear_lrelu_tape(Tape& t, ParamStore& store, const std::string& prefix, int x, double slope) {
  return t.leaky_relu(linear_tape(t, store, prefix, x), slope);
}

int proj3_tape(Tape& t, ParamStore& store, const std::string& base, int x, double slope) {
  int h1 = linear_lrelu_tape(t, store, base + "1", x, slope);
  int h2 = linear_lrelu_tape(t, store, base + "2", h1, slope);
  return linear_tape(t, store, base + "3", h2);
}

TccaTapeOut tcca_tape(Tape& t, ParamStore& store, const std::string& prefix, const TccaDims& dims,
                      const std::vector<int>& frame_attr_nodes, int target_position, int geom_node,
                      double slope) {
  if (frame_attr_nodes.empty()) throw std::invalid_argument("tcca: empty window");
  if (target_position < 0 || target_position >= static_cast<int>(frame_attr_nodes.size()))
    throw std::invalid_argument("tcca: target position out of range");
  int target = frame_attr_nodes[target_position];
  if (t.val(target).cols != dims.in)
    throw std::invalid_argument("tcca: width-mismatch: attribute channels != dims.in");

  int fq = proj3_tape(t, store, prefix + ".q", target, slope);
  int kv_input;
  if (dims.channel_concat) {
    kv_input = t.concat_cols(frame_attr_nodes);
  } else {
    kv_input = t.concat_rows(frame_attr_nodes);
  }
  int fk = proj3_tape(t, store, prefix + ".k", kv_input, slope);
  int fv = proj3_tape(t, store, prefix + ".v", kv_input, slope);

  int logits = t.scale(t.matmul_nt(fq, fk), 1.0 / std::sqrt(static_cast<double>(dims.d_k)));
  int attention = t.softmax_rows(logits);
  int weighted = t.matmul(attention, fv);
  int ft = linear_tape(t, store, prefix + ".o", weighted);

  int skip;
  if (dims.in == dims.out)
    skip = target;
  else if (dims.in == 1)
    skip = t.broadcast_col(target, dims.out);
  else
    throw std::invalid_argument("tcca: width-mismatch: cannot skip-connect in -> out");

  TccaTapeOut out;
  out.attention = attention;
  out.f_attr = t.add(ft, skip);
  out.f_o = t.concat_cols({out.f_attr, geom_node});
  return out;
}

NaTapeOut na_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                  const NeighborCtx& nbr, bool use_pe, double slope) {
  int centers = t.gather_rows(features, nbr.center_flat);
  int neighbors = t.gather_rows(features, nbr.neighbor_flat);
  int composite = t.concat_cols({centers, neighbors});
  int h1 = linear_lrelu_tape(t, store, prefix + ".t1", composite, slope);
  int h2 = linear_lrelu_tape(t, store, prefix + ".t2", h1, slope);

  int logits = h2;
  if (use_pe) {
    int dist = t.constant(nbr.distances);
    int encoded = t.matmul(dist, t.param(store.get(prefix + ".pe.w")));
    logits = t.add(h2, encoded);
  }
  NaTapeOut out;
  out.weights = t.softmax_groups(logits, nbr.k);
  out.f3 = t.sum_groups(t.hadamard(out.weights, h2), nbr.k);
  return out;
}

int mlp_block_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                   double slope) {
  int h1 = linear_lrelu_tape(t, store, prefix + ".t1", features, slope);
  return linear_lrelu_tape(t, store, prefix + ".t2", h1, slope);
}

DcnaTapeOut dcna_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                      const NeighborCtx& nbr, int na_blocks, bool use_na, bool use_pe,
                      double slope) {
  DcnaTapeOut out;
  std::vector<int> cat = {features};
  for (int b = 0; b < na_blocks; ++b) {
    int input = cat.size() == 1 ? cat[0] : t.concat_cols(cat);
    const std::string name = prefix + ".b" + std::to_string(b);
    int block_out = use_na ? na_tape(t, store, name, input, nbr, use_pe, slope).f3
                           : mlp_block_tape(t, store, name, input, slope);
    out.block_outputs.push_back(block_out);
    cat.push_back(block_out);
  }
  int dense = cat.size() == 1 ? cat[0] : t.concat_cols(cat);
  out.out = t.leaky_relu(linear_tape(t, store, prefix + ".trans", dense), slope);
  return out;
}

namespace {

void require_shared_geometry(const TemporalWindow& window) {
  for (const auto& f : window.frames)
    if (f.geometry != window.target().geometry)
      throw std::invalid_argument("tcca: geometry-mismatch-across-frames");
}

}  // namespace

FeatureMap tcca_forward(const TemporalWindow& compensated, ParamStore& store,
                        const std::string& prefix, const TccaDims& dims, Mat* attention_out) {
  require_shared_geometry(compensated);
  Tape t;
  std::vector<int> frame_nodes;
  frame_nodes.reserve(compensated.frames.size());
  for (const auto& f : compensated.frames) frame_nodes.push_back(t.constant(f.attributes));
  Mat geom = geometry_as_mat(compensated.target());
  int geom_node = t.constant(geom);
  TccaTapeOut out = tcca_tape(t, store, prefix, dims, frame_nodes,
                              compensated.target_position(), geom_node);
  if (attention_out) *attention_out = t.val(out.attention);
  return {t.val(out.f_o), std::move(geom)};
}

FeatureMap na_forward(const FeatureMap& features, ParamStore& store, const std::string& prefix,
                      const NeighborIndex& neighbors, bool use_pe, Mat* weights_out) {
  if (neighbors.query_count() != features.values.rows)
    throw std::invalid_argument("na_forward: neighbor rows != feature rows");
  Tape t;
  int f = t.constant(features.values);
  NeighborCtx ctx = make_neighbor_ctx(neighbors);
  NaTapeOut out = na_tape(t, store, prefix, f, ctx, use_pe);
  if (weights_out) *weights_out = t.val(out.weights);
  return {t.val(out.f3), features.geometry};
}

FeatureMap dcna_forward(const FeatureMap& features, ParamStore& store, const std::string& prefix,
                        const NeighborIndex& neighbors, int na_blocks,
                        std::vector<Mat>* block_outputs) {
  Tape t;
  int f = t.constant(features.values);
  NeighborCtx ctx = make_neighbor_ctx(neighbors);
  DcnaTapeOut out = dcna_tape(t, store, prefix, f, ctx, na_blocks);
  if (block_outputs) {
    block_outputs->clear();
    for (int id : out.block_outputs) block_outputs->push_back(t.val(id));
  }
  return {t.val(out.out), features.geometry};
}

}
