// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_ATTENTION_HPP
#define BQE_ATTENTION_HPP

#include <random>
#include <string>
#include <vector>

#include "bqe/frame.hpp"
#include "bqe/knn.hpp"
#include "bqe/params.hpp"
#include "bqe/tape.hpp"

namespace bqe {

// Per-point features bound to the geometry they describe.
struct FeatureMap {
  Mat values;    // n x c
  Mat geometry;  // n x 3
};

// Widths of the cross-attention block. Projection layers for q/k/v are three
// cascaded linears with LeakyReLU between; proj_o is a single linear.
struct TccaDims {
  int in = 1;
  int hidden = 16;
  int d_k = 16;
  int d_v = 16;
  int out = 16;
  // Key/value tokens: frames stacked along the token axis by default; the
  // channel-axis alternative is kept selectable for comparison.
  bool channel_concat = false;
  int frames = 1;  // 2R+1, fixes proj_k/v input width in channel mode
};

// Widths of one neighborhood-attention block (neighbor count is a propery of
// the query, not of the parameters).
struct NaDims {
  int in = 16;
  int hidden = 16;
  int out = 16;
};

// Flattened neighbor bookkeeping shared by every NA block of a forward pass.
struct NeighborCtx {
  int k = 0;
  std::vector<int> center_flat;    // n*k, query row repeated k times
  std::vector<int> neighbor_flat;  // n*k
  Mat distances;                   // (n*k) x 1
};

NeighborCtx make_neighbor_ctx(const NeighborIndex& nn, double distance_scale = 1.0);

constexpr double kLeakySlope = 0.01;

// ---- parameter creation ------------------------------------------------

void create_tcca_params(ParamStore& store, const std::string& prefix, const TccaDims& dims,
                        std::mt19937_64& rng);
void create_na_params(ParamStore& store, const std::string& prefix, const NaDims& dims,
                      std::mt19937_64& rng);
// Pointwise MLP stand-in for an NA block (same t1/t2 names, no neighbor use).
void create_mlp_block_params(ParamStore& store, const std::string& prefix, const NaDims& dims,
                             std::mt19937_64& rng);
void create_dcna_params(ParamStore& store, const std::string& prefix, int in_width, int na_blocks,
                        int na_hidden, int na_out, int trunk_out, bool use_na,
                        std::mt19937_64& rng);

// ---- tape builders -------------------------------------------------------

int linear_tape(Tape& t, ParamStore& store, const std::string& prefix, int x);
int linear_lrelu_tape(Tape& t, ParamStore& store, const std::string& prefix, int x,
                      double slope = kLeakySlope);
// Linear(LReLU(Linear(LReLU(Linear(x))))) over prefixes <base>1, <base>2, <base>3.
int proj3_tape(Tape& t, ParamStore& store, const std::string& base, int x,
               double slope = kLeakySlope);

struct TccaTapeOut {
  int f_o = -1;        // n x (out + 3)
  int f_attr = -1;     // n x out, attention output plus skip
  int attention = -1;  // n x tokens softmax matrix
};
TccaTapeOut tcca_tape(Tape& t, ParamStore& store, const std::string& prefix, const TccaDims& dims,
                      const std::vector<int>& frame_attr_nodes, int target_position, int geom_node,
                      double slope = kLeakySlope);

struct NaTapeOut {
  int f3 = -1;       // n x out
  int weights = -1;  // (n*k) x out, per-channel softmax over each k-group
};
NaTapeOut na_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                  const NeighborCtx& nbr, bool use_pe = true, double slope = kLeakySlope);

int mlp_block_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                   double slope = kLeakySlope);

struct DcnaTapeOut {
  int out = -1;
  std::vector<int> block_outputs;
};
// Densely connected NA blocks: block b consumes concat(input, out_1..out_{b-1});
// a final pointwise transition restores trunk width.
DcnaTapeOut dcna_tape(Tape& t, ParamStore& store, const std::string& prefix, int features,
                      const NeighborCtx& nbr, int na_blocks, bool use_na = true, bool use_pe = true,
                      double slope = kLeakySlope);

// ---- contract-level wrappers ---------------------------------------------

// Runs cross-attention over a compensated window (all frames must share the
// target geometry). Output width is dims.out + 3; the trailing three channels
// copy the target geometry untouched.
FeatureMap tcca_forward(const TemporalWindow& compensated, ParamStore& store,
                        const std::string& prefix, const TccaDims& dims,
                        Mat* attention_out = nullptr);

FeatureMap na_forward(const FeatureMap& features, ParamStore& store, const std::string& prefix,
                      const NeighborIndex& neighbors, bool use_pe = true,
                      Mat* weights_out = nullptr);

FeatureMap dcna_forward(const FeatureMap& features, ParamStore& store, const std::string& prefix,
                        const NeighborIndex& neighbors, int na_blocks,
                        std::vector<Mat>* block_outputs = nullptr);

}

#endif
