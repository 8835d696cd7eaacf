// SPDX-License-Identifier: Apache-2.0

#include "bqe/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>

#include "bqe/adam.hpp"
#include "bqe/color.hpp"
#include "bqe/patch.hpp"
#include "bqe/ply.hpp"

namespace bqe {

namespace {

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

int component_channel(const std::string& component) {
  if (component == "y") return 0;
  if (component == "cb") return 1;
  if (component == "cr") return 2;
  throw std::invalid_argument("unknown component '" + component + "' (expected y, cb or cr)");
}

PointCloudFrame select_component(const PointCloudFrame& frame, const std::string& component) {
  if (frame.channel_count() == 1) return frame;
  if (frame.channel_count() != 3)
    throw std::invalid_argument("select_component: expected 1 or 3 channels");
  PointCloudFrame ycbcr = rgb_to_ycbcr(frame);
  PointCloudFrame out;
  out.geometry = ycbcr.geometry;
  out.frame_index = ycbcr.frame_index;
  out.qp = ycbcr.qp;
  out.attributes = attribute_channel(ycbcr, component_channel(component));
  return out;
}

void TrainingConfig::finalize() {
  model.radius = radius;
  model.k = k;
  model.seed = seed;
  model.component = component;
  grouping.sigma = sigma;
}

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::istringstream ls(s);
  std::string cell;
  while (std::getline(ls, cell, ',')) {
    cell = trim(cell);
    if (!cell.empty()) out.push_back(std::stoi(cell));
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw std::invalid_argument("config: bad boolean '" + s + "'");
}

}  // namespace

TrainingConfig TrainingConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  TrainingConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected 'key = value' at line " + std::to_string(lineno));
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    try {
      if (key == "epochs") cfg.epochs = std::stoi(value);
      else if (key == "qe_epochs") cfg.qe_epochs = std::stoi(value);
      else if (key == "batch_size") cfg.batch_size = std::stoi(value);
      else if (key == "learning_rate") cfg.learning_rate = std::stod(value);
      else if (key == "qe_learning_rate") cfg.qe_learning_rate = std::stod(value);
      else if (key == "radius") cfg.radius = std::stoi(value);
      else if (key == "k") cfg.k = std::stoi(value);
      else if (key == "sigma") cfg.sigma = std::stod(value);
      else if (key == "seed") cfg.seed = std::stoull(value);
      else if (key == "patch_size") cfg.patch_size = std::stoi(value);
      else if (key == "stride_fraction") cfg.stride_fraction = std::stod(value);
      else if (key == "qps") cfg.qps = parse_int_list(value);
      else if (key == "qps_low") cfg.grouping.low = parse_int_list(value);
      else if (key == "qps_medium") cfg.grouping.medium = parse_int_list(value);
      else if (key == "qps_high") cfg.grouping.high = parse_int_list(value);
      else if (key == "component") cfg.component = value;
      else if (key == "validation_fraction") cfg.validation_fraction = std::stod(value);
      else if (key == "max_steps") cfg.max_steps = std::stoi(value);
      else if (key == "qe_max_steps") cfg.qe_max_steps = std::stoi(value);
      else if (key == "ablation") cfg.model.ablation = ablation_from_name(value);
      else if (key == "k_recolor") cfg.model.k_recolor = std::stoi(value);
      else if (key == "tcca_hidden") cfg.model.tcca_hidden = std::stoi(value);
      else if (key == "d_k") cfg.model.d_k = std::stoi(value);
      else if (key == "d_v") cfg.model.d_v = std::stoi(value);
      else if (key == "tcca_out") cfg.model.tcca_out = std::stoi(value);
      else if (key == "tcca_channel_concat") cfg.model.tcca_channel_concat = parse_bool(value);
      else if (key == "dcna_per_stage") cfg.model.dcna_per_stage = std::stoi(value);
      else if (key == "na_per_dcna") cfg.model.na_per_dcna = std::stoi(value);
      else if (key == "na_hidden") cfg.model.na_hidden = std::stoi(value);
      else if (key == "na_width") cfg.model.na_width = std::stoi(value);
      else if (key == "trunk_width") cfg.model.trunk_width = std::stoi(value);
      else if (key == "c_f") cfg.model.c_f = std::stoi(value);
      else if (key == "qe_width") cfg.model.qe_width = std::stoi(value);
      else if (key == "qe_hidden") cfg.model.qe_hidden = std::stoi(value);
      else if (key == "qe_na_per_dcna") cfg.model.qe_na_per_dcna = std::stoi(value);
      else if (key == "qe_dcna_blocks") cfg.model.qe_dcna_blocks = std::stoi(value);
      else if (key == "attr_scale") cfg.model.attr_scale = std::stod(value);
      else if (key == "residual_scale") cfg.model.residual_scale = std::stod(value);
      else if (key == "head_init_scale") cfg.model.head_init_scale = std::stod(value);
      else if (key == "clip_norm") cfg.clip_norm = std::stod(value);
      else if (key == "geometry_scale") cfg.model.geometry_scale = std::stod(value);
      else throw std::runtime_error("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error("config: bad value for '" + key + "' at line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  cfg.finalize();
  return cfg;
}

double qp_step(int qp) { return std::pow(2.0, (qp - 22) / 6.0); }

PointCloudFrame degrade(const PointCloudFrame& frame, int qp, const std::vector<int>& qp_set) {
  if (std::find(qp_set.begin(), qp_set.end(), qp) == qp_set.end())
    throw std::invalid_argument("degrade: unknown-qp: " + std::to_string(qp));
  PointCloudFrame out = frame;
  double step = qp_step(qp);
  for (double& v : out.attributes.a) {
    double q = std::round(v / step) * step;
    v = std::clamp(q, 0.0, 255.0);
  }
  out.qp = qp;
  return out;
}

namespace {

Dataset build_from_component_sequences(
    const std::vector<PointCloudFrame>& clean,
    const std::map<int, std::vector<PointCloudFrame>>& degraded_by_qp,
    const TrainingConfig& config) {
  int frames = static_cast<int>(clean.size());
  int val_count = static_cast<int>(std::floor(frames * config.validation_fraction));
  int val_start = frames - val_count;

  Dataset ds;
  for (int t = 0; t < frames; ++t) {
    PatchSet patches = generate_patches(clean[t], config.patch_size, config.stride_fraction);
    for (const auto& [qp, degraded] : degraded_by_qp) {
      for (const auto& patch : patches.patches) {
        std::vector<Voxel> geom(patch.size());
        Mat target_attrs(static_cast<int>(patch.size()), 1);
        Mat clean_attrs(static_cast<int>(patch.size()), 1);
        for (size_t r = 0; r < patch.size(); ++r) {
          geom[r] = clean[t].geometry[patch[r]];
          target_attrs(static_cast<int>(r), 0) = degraded[t].attributes(patch[r], 0);
          clean_attrs(static_cast<int>(r), 0) = clean[t].attributes(patch[r], 0);
        }

        TrainingSample sample;
        sample.qp = qp;
        sample.original = std::move(clean_attrs);
        sample.window.radius = config.radius;
        for (int i = t - config.radius; i <= t + config.radius; ++i) {
          int src = std::clamp(i, 0, frames - 1);
          if (i == t) {
            PointCloudFrame target;
            target.geometry = geom;
            target.attributes = target_attrs;
            target.frame_index = t;
            target.qp = qp;
            sample.window.frames.push_back(std::move(target));
          } else {
            sample.window.frames.push_back(
                recolor(degraded[src], geom, config.model.k_recolor).frame);
          }
        }
        (t < val_start ? ds.train : ds.val).push_back(std::move(sample));
      }
    }
  }

  std::mt19937_64 rng(config.seed);
  std::shuffle(ds.train.begin(), ds.train.end(), rng);
  return ds;
}

}  // namespace

Dataset build_dataset(const std::vector<PointCloudFrame>& clean_sequence,
                      const std::vector<int>& qps, const TrainingConfig& config) {
  if (clean_sequence.empty()) throw std::invalid_argument("build_dataset: empty sequence");
  if (qps.empty()) throw std::invalid_argument("build_dataset: no QPs");

  std::vector<PointCloudFrame> clean;
  clean.reserve(clean_sequence.size());
  for (const auto& f : clean_sequence) clean.push_back(select_component(f, config.component));

  std::map<int, std::vector<PointCloudFrame>> degraded_by_qp;
  for (int qp : qps) {
    std::vector<PointCloudFrame> seq;
    seq.reserve(clean.size());
    for (const auto& f : clean) seq.push_back(degrade(f, qp, qps));
    degraded_by_qp.emplace(qp, std::move(seq));
  }
  return build_from_component_sequences(clean, degraded_by_qp, config);
}

std::vector<ManifestRow> read_dataset_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("manifest: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("manifest: empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "clean_path,degraded_path,qp,frame_index")
    throw std::runtime_error("manifest: bad header '" + line + "'");
  std::vector<ManifestRow> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ls(line);
    ManifestRow row;
    std::string qp, idx;
    if (!std::getline(ls, row.clean_path, ',') || !std::getline(ls, row.degraded_path, ',') ||
        !std::getline(ls, qp, ',') || !std::getline(ls, idx, ','))
      throw std::runtime_error("manifest: bad row '" + line + "'");
    row.qp = std::stoi(qp);
    row.frame_index = std::stoi(idx);
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_dataset_manifest(const std::vector<ManifestRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out << "clean_path,degraded_path,qp,frame_index\n";
  for (const auto& r : rows)
    out << r.clean_path << ',' << r.degraded_path << ',' << r.qp << ',' << r.frame_index << '\n';
}

Dataset build_dataset_from_manifest(const std::string& path, const TrainingConfig& config) {
  std::vector<ManifestRow> rows = read_dataset_manifest(path);
  if (rows.empty()) throw std::runtime_error("manifest: no rows in '" + path + "'");

  std::map<int, std::string> clean_paths;
  std::map<int, std::map<int, std::string>> degraded_paths;  // qp -> frame -> path
  for (const auto& r : rows) {
    clean_paths[r.frame_index] = r.clean_path;
    degraded_paths[r.qp][r.frame_index] = r.degraded_path;
  }

  std::vector<PointCloudFrame> clean;
  std::map<int, int> frame_slot;
  for (const auto& [idx, p] : clean_paths) {
    PointCloudFrame f = select_component(load_ply(p), config.component);
    f.frame_index = idx;
    frame_slot[idx] = static_cast<int>(clean.size());
    clean.push_back(std::move(f));
  }

  std::map<int, std::vector<PointCloudFrame>> degraded_by_qp;
  for (const auto& [qp, by_frame] : degraded_paths) {
    if (by_frame.size() != clean.size())
      throw std::runtime_error("manifest: qp " + std::to_string(qp) +
                               " does not cover every frame");
    std::vector<PointCloudFrame> seq(clean.size());
    for (const auto& [idx, p] : by_frame) {
      PointCloudFrame f = select_component(load_ply(p), config.component);
      f.frame_index = idx;
      f.qp = qp;
      seq[frame_slot.at(idx)] = std::move(f);
    }
    degraded_by_qp.emplace(qp, std::move(seq));
  }
  return build_from_component_sequences(clean, degraded_by_qp, config);
}

void write_training_log(const std::vector<TrainLogRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out << "epoch,stage,loss,seconds\n";
  out.precision(10);
  for (const auto& r : rows)
    out << r.epoch << ',' << r.stage << ',' << r.loss << ',' << r.seconds << '\n';
}

namespace {

struct QeSampleCtx {
  Mat attrs_norm;
  Mat geom_scaled;
  NeighborCtx neighbors;
  Mat soft_targets;  // 1 x 3
};

QeSampleCtx make_qe_ctx(const TrainingSample& sample, const TrainingConfig& config) {
  const PointCloudFrame& target = sample.window.target();
  QeSampleCtx ctx;
  ctx.attrs_norm = target.attributes;
  for (double& v : ctx.attrs_norm.a) v /= config.model.attr_scale;
  ctx.geom_scaled = geometry_as_mat(target, config.model.geometry_scale);
  int k = std::min(config.model.k, target.point_count());
  ctx.neighbors = make_neighbor_ctx(knn(target.geometry, target.geometry, k),
                                    config.model.geometry_scale);
  SoftLabel g = soft_label(sample.qp, config.grouping);
  ctx.soft_targets = Mat(1, 3);
  ctx.soft_targets(0, 0) = g.low;
  ctx.soft_targets(0, 1) = g.medium;
  ctx.soft_targets(0, 2) = g.high;
  return ctx;
}

void clip_gradients(ParamStore& store, double clip_norm) {
  if (clip_norm <= 0.0) return;
  double total = 0.0;
  for (Param* p : store.all()) {
    if (!p->trainable) continue;
    for (double g : p->grad.a) total += g * g;
  }
  total = std::sqrt(total);
  if (total <= clip_norm) return;
  double scale = clip_norm / total;
  for (Param* p : store.all()) {
    if (!p->trainable) continue;
    for (double& g : p->grad.a) g *= scale;
  }
}

void check_finite_loss(double loss, const char* stage, int epoch, int step) {
  if (!std::isfinite(loss))
    throw std::runtime_error(std::string("nan-loss: ") + stage + " diverged at epoch " +
                             std::to_string(epoch) + ", step " + std::to_string(step) +
                             "; reduce the learning rate or enable smaller batches");
}

}  // namespace

QeParams train_qe(const Dataset& dataset, const TrainingConfig& config,
                  std::vector<TrainLogRow>* log) {
  if (dataset.train.empty()) throw std::invalid_argument("train_qe: empty training set");

  std::vector<int> levels;
  for (const auto& s : dataset.train) {
    int level = config.grouping.level_of(s.qp);
    if (std::find(levels.begin(), levels.end(), level) == levels.end()) levels.push_back(level);
  }
  if (levels.size() < 2)
    std::cerr << "train_qe: warning: single-level-dataset, labels are nearly constant\n";

  QeParams params = init_qe_params(config.model);
  Adam adam(config.qe_learning_rate);
  std::mt19937_64 rng(config.seed);

  std::vector<QeSampleCtx> ctxs;
  ctxs.reserve(dataset.train.size());
  for (const auto& s : dataset.train) ctxs.push_back(make_qe_ctx(s, config));

  std::vector<size_t> order(dataset.train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  int steps = 0;
  for (int epoch = 0; epoch < config.qe_epochs; ++epoch) {
    double t0 = now_seconds();
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      size_t end = std::min(begin + config.batch_size, order.size());
      int batch_n = static_cast<int>(end - begin);
      params.store.zero_grads();
      double batch_loss = 0.0;
      for (size_t bi = begin; bi < end; ++bi) {
        const QeSampleCtx& ctx = ctxs[order[bi]];
        Tape t;
        int attrs = t.constant(ctx.attrs_norm);
        int geom = t.constant(ctx.geom_scaled);
        int p = qe_tape(t, params.store, config.model, attrs, geom, ctx.neighbors);
        int loss = t.scale(t.soft_cross_entropy(p, ctx.soft_targets), 1.0 / batch_n);
        t.backward(loss);
        batch_loss += t.val(loss)(0, 0);
      }
      check_finite_loss(batch_loss, "qe", epoch, steps);
      clip_gradients(params.store, config.clip_norm);
      adam.step(params.store);
      epoch_loss += batch_loss;
      ++batches;
      ++steps;
      if (config.qe_max_steps > 0 && steps >= config.qe_max_steps) break;
    }
    if (log)
      log->push_back({epoch, "qe", epoch_loss / std::max(1, batches), now_seconds() - t0});
    if (config.qe_max_steps > 0 && steps >= config.qe_max_steps) break;
  }
  return params;
}

BqeParams train_bqe(const Dataset& dataset, const QeParams& qe, const TrainingConfig& config,
                    std::vector<TrainLogRow>* log) {
  if (dataset.train.empty()) throw std::invalid_argument("train_bqe: empty training set");

  BqeParams params = init_bqe_params(config.model);
  bool has_qe = config.model.ablation != Ablation::NoQe;
  if (has_qe) {
    params.store.load_values_from(qe.store);
    params.store.set_trainable_prefix("qe.", false);
  }
  uint64_t qe_checksum_before = params.store.checksum("qe.");

  std::vector<SampleCtx> ctxs;
  ctxs.reserve(dataset.train.size());
  for (const auto& s : dataset.train) ctxs.push_back(make_sample_ctx(s.window, config.model));

  // The QE output per sample is constant while its parameters are frozen;
  // compute it once instead of rebuilding the subgraph every step.
  if (has_qe) {
    for (size_t i = 0; i < ctxs.size(); ++i) {
      Tape t;
      int attrs = t.constant(ctxs[i].frame_attrs_norm[config.model.radius]);
      int geom = t.constant(ctxs[i].geom_scaled);
      int p = qe_tape(t, params.store, config.model, attrs, geom, ctxs[i].neighbors);
      ctxs[i].cached_p = t.val(p);
    }
  }

  Adam adam(config.learning_rate);
  std::mt19937_64 rng(config.seed + 1);
  std::vector<size_t> order(dataset.train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  int steps = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double t0 = now_seconds();
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    int batches = 0;
    for (size_t begin = 0; begin < order.size(); begin += config.batch_size) {
      size_t end = std::min(begin + config.batch_size, order.size());
      int batch_n = static_cast<int>(end - begin);
      params.store.zero_grads();
      double batch_loss = 0.0;
      for (size_t bi = begin; bi < end; ++bi) {
        size_t si = order[bi];
        Tape t;
        BqeTapeOut out = bqe_tape(t, params.store, config.model, ctxs[si], /*freeze_qe=*/true);
        int loss = t.scale(t.mse_against(out.enhanced, dataset.train[si].original), 1.0 / batch_n);
        t.backward(loss);
        batch_loss += t.val(loss)(0, 0);
      }
      check_finite_loss(batch_loss, "bqe", epoch, steps);
      clip_gradients(params.store, config.clip_norm);
      adam.step(params.store);
      epoch_loss += batch_loss;
      ++batches;
      ++steps;
      if (config.max_steps > 0 && steps >= config.max_steps) break;
    }
    if (log)
      log->push_back({epoch, "bqe", epoch_loss / std::max(1, batches), now_seconds() - t0});
    if (config.max_steps > 0 && steps >= config.max_steps) break;
  }

  if (params.store.checksum("qe.") != qe_checksum_before)
    throw std::logic_error("train_bqe: frozen QE parameters changed");
  return params;
}

}
