// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_MODEL_HPP
#define BQE_MODEL_HPP

#include <optional>
#include <string>
#include <vector>

#include "bqe/attention.hpp"
#include "bqe/objectives.hpp"
#include "bqe/recolor.hpp"

namespace bqe {

// Architecture switches mirroring the ablation variants: TCCA swapped for a
// pointwise MLP, positional encoding dropped, NA blocks swapped for MLPs, or
// the QE module removed (fusion weight pinned to the deep branch).
enum class Ablation { None, NoTcca, NoPe, NoNa, NoQe };

std::string ablation_name(Ablation a);
Ablation ablation_from_name(const std::string& name);

struct BqeConfig {
  int radius = 2;       // R
  int k = 20;           // NA neighborhood size
  int k_recolor = 3;    // recoloring neighborhood

  // cross-attention widths
  int tcca_hidden = 64;
  int d_k = 64;
  int d_v = 64;
  int tcca_out = 64;
  bool tcca_channel_concat = false;

  // progressive trunk: three stages (shallow/medium/deep taps), each stage a
  // chain of dcna_per_stage densely connected NA groups
  int dcna_per_stage = 1;
  int na_per_dcna = 2;
  int na_hidden = 64;
  int na_width = 64;
  int trunk_width = 64;
  int c_f = 64;  // branch feature width

  // quality estimation head
  int qe_width = 32;
  int qe_hidden = 32;
  int qe_na_per_dcna = 2;
  int qe_dcna_blocks = 1;

  // model-internal input scaling and the gain applied to the head's residual
  double attr_scale = 255.0;
  double geometry_scale = 256.0;
  double residual_scale = 32.0;
  // 0 keeps the head at zero so the model starts as the identity; a small
  // positive value trades that for immediate feature gradients
  double head_init_scale = 0.0;

  Ablation ablation = Ablation::None;
  uint64_t seed = 1;
  std::string component = "y";

  int window_length() const { return 2 * radius + 1; }
  TccaDims tcca_dims() const;
};

struct QeParams {
  BqeConfig config;
  ParamStore store;  // "qe.*" only
};

struct BqeParams {
  BqeConfig config;
  ParamStore store;  // "tcca.*" / "trunk.*" / "tap.*" / "qe.*" / "head.*"
};

QeParams init_qe_params(const BqeConfig& config);
BqeParams init_bqe_params(const BqeConfig& config);

// The three branch taps off the shared trunk. Equal shapes by construction.
struct BranchFeatures {
  FeatureMap low, mid, high;
};

// ---- forward passes --------------------------------------------------------

// Everything a forward pass needs that does not depend on parameters:
// normalized window attributes, scaled geometry and the neighbor context.
struct SampleCtx {
  int n = 0;
  std::vector<Mat> frame_attrs_norm;  // 2R+1 entries, n x 1
  Mat target_attrs_raw;               // n x 1
  Mat geom_scaled;                    // n x 3
  NeighborCtx neighbors;
  std::optional<Mat> cached_p;        // 1 x 3, set when QE is frozen
};

// Builds the context from a compensated window (all frames on the target
// geometry, single attribute channel).
SampleCtx make_sample_ctx(const TemporalWindow& compensated, const BqeConfig& config);

struct BqeTapeOut {
  int enhanced = -1;  // n x 1, raw attribute scale
  int p = -1;         // 1 x 3
  int f_o = -1;
  int f_low = -1, f_mid = -1, f_high = -1;
  int fused = -1;
};

// Full network graph on an existing tape. freeze_qe detaches the quality
// vector so no gradient reaches "qe.*" (training stage 2); a cached_p in the
// context skips the QE subgraph entirely.
BqeTapeOut bqe_tape(Tape& t, ParamStore& store, const BqeConfig& config, const SampleCtx& ctx,
                    bool freeze_qe = false);

// QE subgraph alone; attrs_norm is n x 1, geom_scaled n x 3.
int qe_tape(Tape& t, ParamStore& store, const BqeConfig& config, int attrs_norm, int geom_scaled,
            const NeighborCtx& neighbors);

// Distortion-level probabilities for one frame (runs its own tape).
QualityVector qe_forward(const PointCloudFrame& target, ParamStore& store,
                         const BqeConfig& config);

// Hierarchical features off the shared trunk; neighbors must be built on the
// feature map's bound geometry with config.k columns.
BranchFeatures progressive_forward(const FeatureMap& f_o, const NeighborIndex& neighbors,
                                   ParamStore& store, const BqeConfig& config);

// F_fusion = p_low * F_low + p_mid * F_mid + p_high * F_high.
FeatureMap adaptive_fuse(const BranchFeatures& branches, const QualityVector& p);

// End-to-end enhancement of the window's target frame: motion compensation,
// cross-attention fusion, progressive trunk, quality-weighted fusion and the
// residual head. Geometry passes through bit-exactly.
PointCloudFrame bqe_forward(const TemporalWindow& window, BqeParams& params);

// ---- checkpoints -----------------------------------------------------------

void save_checkpoint(const std::string& path, const std::string& kind, const BqeConfig& config,
                     const ParamStore& store);

struct Checkpoint {
  std::string kind;  // "qe" or "bqe"
  BqeConfig config;
  ParamStore store;
};

Checkpoint load_checkpoint(const std::string& path);

std::string config_to_json(const BqeConfig& config);
BqeConfig config_from_json(const std::string& json_text);

}

#endif
