// SPDX-License-Identifier: Apache-2.0

#include "bqe/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "bqe/version.hpp"

namespace bqe {

using json = nlohmann::json;

std::string ablation_name(Ablation a) {
  switch (a) {
    case Ablation::None: return "none";
    case Ablation::NoTcca: return "no-tcca";
    case Ablation::NoPe: return "no-pe";
    case Ablation::NoNa: return "no-na";
    case Ablation::NoQe: return "no-qe";
  }
  return "none";
}

Ablation ablation_from_name(const std::string& name) {
  if (name == "none" || name.empty()) return Ablation::None;
  if (name == "no-tcca") return Ablation::NoTcca;
  if (name == "no-pe") return Ablation::NoPe;
  if (name == "no-na") return Ablation::NoNa;
  if (name == "no-qe") return Ablation::NoQe;
  throw std::invalid_argument("unknown ablation '" + name + "'");
}

TccaDims BqeConfig::tcca_dims() const {
  TccaDims dims;
  dims.in = 1;
  dims.hidden = tcca_hidden;
  dims.d_k = d_k;
  dims.d_v = d_v;
  dims.out = tcca_out;
  dims.channel_concat = tcca_channel_concat;
  dims.frames = window_length();
  return dims;
}

namespace {

void create_qe_group(ParamStore& store, const BqeConfig& cfg, std::mt19937_64& rng) {
  bool use_na = cfg.ablation != Ablation::NoNa;
  create_linear(store, "qe.lift", 4, cfg.qe_width, rng);
  for (int d = 0; d < cfg.qe_dcna_blocks; ++d)
    create_dcna_params(store, "qe.d" + std::to_string(d), cfg.qe_width, cfg.qe_na_per_dcna,
                       cfg.qe_hidden, cfg.qe_width, cfg.qe_width, use_na, rng);
  create_linear(store, "qe.post", cfg.qe_width, cfg.qe_width, rng);
  create_linear(store, "qe.fc", cfg.qe_width, 3, rng);
}

void create_trunk_group(ParamStore& store, const BqeConfig& cfg, std::mt19937_64& rng) {
  bool use_na = cfg.ablation != Ablation::NoNa;
  int in_width = cfg.tcca_out + 3;
  for (int s = 0; s < 3; ++s) {
    for (int d = 0; d < cfg.dcna_per_stage; ++d) {
      create_dcna_params(store, "trunk.s" + std::to_string(s) + ".d" + std::to_string(d), in_width,
                         cfg.na_per_dcna, cfg.na_hidden, cfg.na_width, cfg.trunk_width, use_na,
                         rng);
      in_width = cfg.trunk_width;
    }
  }
  for (const char* tap : {"low", "mid", "high"})
    create_linear(store, std::string("tap.") + tap, cfg.trunk_width, cfg.c_f, rng);
}

}  // namespace

QeParams init_qe_params(const BqeConfig& config) {
  QeParams p;
  p.config = config;
  std::mt19937_64 rng(config.seed);
  create_qe_group(p.store, config, rng);
  return p;
}

BqeParams init_bqe_params(const BqeConfig& config) {
  BqeParams p;
  p.config = config;
  std::mt19937_64 rng(config.seed);
  if (config.ablation == Ablation::NoTcca) {
    create_linear(p.store, "tccamlp.l1", 1, config.tcca_hidden, rng);
    create_linear(p.store, "tccamlp.l2", config.tcca_hidden, config.tcca_hidden, rng);
    create_linear(p.store, "tccamlp.l3", config.tcca_hidden, config.tcca_out, rng);
  } else {
    create_tcca_params(p.store, "tcca", config.tcca_dims(), rng);
  }
  create_trunk_group(p.store, config, rng);
  if (config.ablation != Ablation::NoQe) create_qe_group(p.store, config, rng);
  create_linear(p.store, "head", config.c_f, 1, rng, /*zero_init=*/true);
  if (config.head_init_scale > 0.0) {
    Mat& hw = p.store.get("head.w").value;
    std::uniform_real_distribution<double> dist(-config.head_init_scale, config.head_init_scale);
    for (double& v : hw.a) v = dist(rng);
  }
  return p;
}

SampleCtx make_sample_ctx(const TemporalWindow& compensated, const BqeConfig& config) {
  const PointCloudFrame& target = compensated.target();
  if (target.channel_count() != 1)
    throw std::invalid_argument("make_sample_ctx: expected a single attribute channel");
  for (const auto& f : compensated.frames)
    if (f.geometry != target.geometry)
      throw std::invalid_argument("make_sample_ctx: geometry-mismatch-across-frames");

  SampleCtx ctx;
  ctx.n = target.point_count();
  if (ctx.n == 0) throw std::invalid_argument("make_sample_ctx: empty-frame");
  double inv_attr = 1.0 / config.attr_scale;
  for (const auto& f : compensated.frames) {
    Mat m = f.attributes;
    for (double& v : m.a) v *= inv_attr;
    ctx.frame_attrs_norm.push_back(std::move(m));
  }
  ctx.target_attrs_raw = target.attributes;
  ctx.geom_scaled = geometry_as_mat(target, config.geometry_scale);
  int k = std::min(config.k, ctx.n);
  ctx.neighbors = make_neighbor_ctx(knn(target.geometry, target.geometry, k),
                                    config.geometry_scale);
  return ctx;
}

int qe_tape(Tape& t, ParamStore& store, const BqeConfig& config, int attrs_norm, int geom_scaled,
            const NeighborCtx& neighbors) {
  bool use_na = config.ablation != Ablation::NoNa;
  bool use_pe = config.ablation != Ablation::NoPe;
  int x = t.concat_cols({attrs_norm, geom_scaled});
  x = linear_lrelu_tape(t, store, "qe.lift", x);
  for (int d = 0; d < config.qe_dcna_blocks; ++d)
    x = dcna_tape(t, store, "qe.d" + std::to_string(d), x, neighbors, config.qe_na_per_dcna,
                  use_na, use_pe)
            .out;
  x = linear_lrelu_tape(t, store, "qe.post", x);
  int pooled = t.mean_rows(x);
  int logits = linear_tape(t, store, "qe.fc", pooled);
  return t.softmax_rows(logits);
}

namespace {

struct TrunkTaps {
  int low, mid, high;
};

TrunkTaps trunk_tape(Tape& t, ParamStore& store, const BqeConfig& config, int f_o,
                     const NeighborCtx& neighbors) {
  bool use_na = config.ablation != Ablation::NoNa;
  bool use_pe = config.ablation != Ablation::NoPe;
  TrunkTaps taps{};
  int x = f_o;
  const char* names[3] = {"low", "mid", "high"};
  int* slots[3] = {&taps.low, &taps.mid, &taps.high};
  for (int s = 0; s < 3; ++s) {
    for (int d = 0; d < config.dcna_per_stage; ++d)
      x = dcna_tape(t, store, "trunk.s" + std::to_string(s) + ".d" + std::to_string(d), x,
                    neighbors, config.na_per_dcna, use_na, use_pe)
              .out;
    *slots[s] = linear_tape(t, store, std::string("tap.") + names[s], x);
  }
  return taps;
}

}  // namespace

BqeTapeOut bqe_tape(Tape& t, ParamStore& store, const BqeConfig& config, const SampleCtx& ctx,
                    bool freeze_qe) {
  if (static_cast<int>(ctx.frame_attrs_norm.size()) != config.window_length())
    throw std::invalid_argument("bqe_tape: window length does not match config radius");

  std::vector<int> frame_nodes;
  frame_nodes.reserve(ctx.frame_attrs_norm.size());
  for (const Mat& m : ctx.frame_attrs_norm) frame_nodes.push_back(t.constant(m));
  int target_node = frame_nodes[config.radius];
  int geom_node = t.constant(ctx.geom_scaled);

  BqeTapeOut out;
  if (config.ablation == Ablation::NoTcca) {
    int h1 = linear_lrelu_tape(t, store, "tccamlp.l1", target_node);
    int h2 = linear_lrelu_tape(t, store, "tccamlp.l2", h1);
    int h3 = linear_tape(t, store, "tccamlp.l3", h2);
    int skip = t.broadcast_col(target_node, config.tcca_out);
    out.f_o = t.concat_cols({t.add(h3, skip), geom_node});
  } else {
    out.f_o = tcca_tape(t, store, "tcca", config.tcca_dims(), frame_nodes, config.radius,
                        geom_node)
                  .f_o;
  }

  TrunkTaps taps = trunk_tape(t, store, config, out.f_o, ctx.neighbors);
  out.f_low = taps.low;
  out.f_mid = taps.mid;
  out.f_high = taps.high;

  if (config.ablation == Ablation::NoQe) {
    Mat fixed(1, 3);
    fixed(0, 2) = 1.0;  // deep branch only
    out.p = t.constant(fixed);
  } else if (ctx.cached_p) {
    out.p = t.constant(*ctx.cached_p);
  } else {
    out.p = qe_tape(t, store, config, target_node, geom_node, ctx.neighbors);
    if (freeze_qe) out.p = t.detach(out.p);
  }

  int fused = t.add(t.add(t.scale_by_entry(taps.low, out.p, 0, 0),
                          t.scale_by_entry(taps.mid, out.p, 0, 1)),
                    t.scale_by_entry(taps.high, out.p, 0, 2));
  out.fused = fused;

  int residual = linear_tape(t, store, "head", fused);
  out.enhanced = t.add(t.constant(ctx.target_attrs_raw), t.scale(residual, config.residual_scale));
  return out;
}

QualityVector qe_forward(const PointCloudFrame& target, ParamStore& store,
                         const BqeConfig& config) {
  if (target.point_count() == 0) throw std::invalid_argument("qe_forward: empty-frame");
  if (target.channel_count() != 1)
    throw std::invalid_argument("qe_forward: expected a single attribute channel");
  Tape t;
  Mat attrs = target.attributes;
  for (double& v : attrs.a) v /= config.attr_scale;
  int attrs_node = t.constant(std::move(attrs));
  int geom_node = t.constant(geometry_as_mat(target, config.geometry_scale));
  int k = std::min(config.k, target.point_count());
  NeighborCtx nbr = make_neighbor_ctx(knn(target.geometry, target.geometry, k),
                                      config.geometry_scale);
  int p = qe_tape(t, store, config, attrs_node, geom_node, nbr);
  const Mat& pv = t.val(p);
  return {pv(0, 0), pv(0, 1), pv(0, 2)};
}

BranchFeatures progressive_forward(const FeatureMap& f_o, const NeighborIndex& neighbors,
                                   ParamStore& store, const BqeConfig& config) {
  if (f_o.values.cols != config.tcca_out + 3)
    throw std::invalid_argument("progressive_forward: width-mismatch on trunk input");
  Tape t;
  int x = t.constant(f_o.values);
  NeighborCtx ctx = make_neighbor_ctx(neighbors, config.geometry_scale);
  TrunkTaps taps = trunk_tape(t, store, config, x, ctx);
  BranchFeatures out;
  out.low = {t.val(taps.low), f_o.geometry};
  out.mid = {t.val(taps.mid), f_o.geometry};
  out.high = {t.val(taps.high), f_o.geometry};
  return out;
}

FeatureMap adaptive_fuse(const BranchFeatures& branches, const QualityVector& p) {
  const Mat& fl = branches.low.values;
  const Mat& fm = branches.mid.values;
  const Mat& fh = branches.high.values;
  if (!fl.same_shape(fm) || !fm.same_shape(fh))
    throw std::invalid_argument("adaptive_fuse: shape-mismatch across branches");
  double sum = p.low + p.medium + p.high;
  if (p.low < 0.0 || p.medium < 0.0 || p.high < 0.0 || std::abs(sum - 1.0) > 1e-6)
    throw std::invalid_argument("adaptive_fuse: non-simplex-weights");
  FeatureMap out;
  out.geometry = branches.low.geometry;
  out.values = Mat(fl.rows, fl.cols);
  for (size_t i = 0; i < out.values.a.size(); ++i)
    out.values.a[i] = p.low * fl.a[i] + p.medium * fm.a[i] + p.high * fh.a[i];
  return out;
}

PointCloudFrame bqe_forward(const TemporalWindow& window, BqeParams& params) {
  TemporalWindow compensated = compensate_window(window, params.config.k_recolor);
  SampleCtx ctx = make_sample_ctx(compensated, params.config);
  Tape t;
  BqeTapeOut out = bqe_tape(t, params.store, params.config, ctx);
  PointCloudFrame enhanced;
  enhanced.geometry = window.target().geometry;
  enhanced.attributes = t.val(out.enhanced);
  enhanced.frame_index = window.target().frame_index;
  enhanced.qp = window.target().qp;
  return enhanced;
}

// ---- checkpoint io ----------------------------------------------------------

std::string config_to_json(const BqeConfig& c) {
  json j;
  j["radius"] = c.radius;
  j["k"] = c.k;
  j["k_recolor"] = c.k_recolor;
  j["tcca_hidden"] = c.tcca_hidden;
  j["d_k"] = c.d_k;
  j["d_v"] = c.d_v;
  j["tcca_out"] = c.tcca_out;
  j["tcca_channel_concat"] = c.tcca_channel_concat;
  j["dcna_per_stage"] = c.dcna_per_stage;
  j["na_per_dcna"] = c.na_per_dcna;
  j["na_hidden"] = c.na_hidden;
  j["na_width"] = c.na_width;
  j["trunk_width"] = c.trunk_width;
  j["c_f"] = c.c_f;
  j["qe_width"] = c.qe_width;
  j["qe_hidden"] = c.qe_hidden;
  j["qe_na_per_dcna"] = c.qe_na_per_dcna;
  j["qe_dcna_blocks"] = c.qe_dcna_blocks;
  j["attr_scale"] = c.attr_scale;
  j["residual_scale"] = c.residual_scale;
  j["head_init_scale"] = c.head_init_scale;
  j["geometry_scale"] = c.geometry_scale;
  j["ablation"] = ablation_name(c.ablation);
  j["seed"] = c.seed;
  j["component"] = c.component;
  return j.dump();
}

BqeConfig config_from_json(const std::string& text) {
  json j = json::parse(text);
  BqeConfig c;
  c.radius = j.at("radius").get<int>();
  c.k = j.at("k").get<int>();
  c.k_recolor = j.at("k_recolor").get<int>();
  c.tcca_hidden = j.at("tcca_hidden").get<int>();
  c.d_k = j.at("d_k").get<int>();
  c.d_v = j.at("d_v").get<int>();
  c.tcca_out = j.at("tcca_out").get<int>();
  c.tcca_channel_concat = j.at("tcca_channel_concat").get<bool>();
  c.dcna_per_stage = j.at("dcna_per_stage").get<int>();
  c.na_per_dcna = j.at("na_per_dcna").get<int>();
  c.na_hidden = j.at("na_hidden").get<int>();
  c.na_width = j.at("na_width").get<int>();
  c.trunk_width = j.at("trunk_width").get<int>();
  c.c_f = j.at("c_f").get<int>();
  c.qe_width = j.at("qe_width").get<int>();
  c.qe_hidden = j.at("qe_hidden").get<int>();
  c.qe_na_per_dcna = j.at("qe_na_per_dcna").get<int>();
  c.qe_dcna_blocks = j.at("qe_dcna_blocks").get<int>();
  c.attr_scale = j.at("attr_scale").get<double>();
  c.residual_scale = j.at("residual_scale").get<double>();
  c.head_init_scale = j.value("head_init_scale", 0.0);
  c.geometry_scale = j.at("geometry_scale").get<double>();
  c.ablation = ablation_from_name(j.at("ablation").get<std::string>());
  c.seed = j.at("seed").get<uint64_t>();
  c.component = j.at("component").get<std::string>();
  return c;
}

namespace {

constexpr char kMagic[8] = {'B', 'Q', 'E', 'C', 'K', 'P', 'T', '1'};

void write_u32(std::ostream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

uint32_t read_u32(std::istream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const std::string& kind, const BqeConfig& config,
                     const ParamStore& store) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out.write(kMagic, sizeof(kMagic));
  json header;
  header["kind"] = kind;
  header["version"] = kVersion;
  header["config"] = json::parse(config_to_json(config));
  std::string htext = header.dump();
  write_u32(out, static_cast<uint32_t>(htext.size()));
  out.write(htext.data(), static_cast<std::streamsize>(htext.size()));

  auto params = store.all();
  write_u32(out, static_cast<uint32_t>(params.size()));
  for (const Param* p : params) {
    write_u32(out, static_cast<uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    write_u32(out, static_cast<uint32_t>(p->value.rows));
    write_u32(out, static_cast<uint32_t>(p->value.cols));
    out.write(reinterpret_cast<const char*>(p->value.a.data()),
              static_cast<std::streamsize>(p->value.a.size() * sizeof(double)));
  }
  if (!out) throw std::runtime_error("unwritable-path: short write to '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("checkpoint: bad magic in '" + path + "'");
  uint32_t hlen = read_u32(in);
  std::string htext(hlen, '\0');
  in.read(htext.data(), hlen);
  if (!in) throw std::runtime_error("checkpoint: truncated header");
  json header = json::parse(htext);

  Checkpoint ckpt;
  ckpt.kind = header.at("kind").get<std::string>();
  ckpt.config = config_from_json(header.at("config").dump());

  uint32_t count = read_u32(in);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t nlen = read_u32(in);
    std::string name(nlen, '\0');
    in.read(name.data(), nlen);
    uint32_t rows = read_u32(in);
    uint32_t cols = read_u32(in);
    Param& p = ckpt.store.create(name, static_cast<int>(rows), static_cast<int>(cols));
    in.read(reinterpret_cast<char*>(p.value.a.data()),
            static_cast<std::streamsize>(p.value.a.size() * sizeof(double)));
    if (!in) throw std::runtime_error("checkpoint: truncated tensor data");
  }
  return ckpt;
}

}
