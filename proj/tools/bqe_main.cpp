// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: toy data synthesis, recoloring, patching, the
// two-stage training pipeline, enhancement and RD evaluation.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bqe/color.hpp"
#include "bqe/enhance.hpp"
#include "bqe/manifest.hpp"
#include "bqe/metrics.hpp"
#include "bqe/model.hpp"
#include "bqe/patch.hpp"
#include "bqe/ply.hpp"
#include "bqe/threading.hpp"
#include "bqe/toydata.hpp"
#include "bqe/training.hpp"
#include "bqe/version.hpp"

namespace fs = std::filesystem;
using namespace bqe;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string component = "y";
  bool deterministic = false;
};

TrainingConfig resolve_config(const GlobalOptions& g) {
  TrainingConfig cfg;
  if (!g.config_path.empty()) cfg = TrainingConfig::from_file(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.component.empty()) cfg.component = g.component;
  cfg.finalize();
  return cfg;
}

double wall_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string frame_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.ply", t);
  return buf;
}

std::vector<std::string> list_ply_sorted(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".ply")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  return files;
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::vector<RDCurve::Point>& anchor,
                    const std::vector<RDCurve::Point>& test) {
  const int w = 640, h = 480, margin = 60;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto* curve : {&anchor, &test}) {
    for (const auto& p : *curve) {
      xmin = std::min(xmin, p.bpip);
      xmax = std::max(xmax, p.bpip);
      ymin = std::min(ymin, p.psnr);
      ymax = std::max(ymax, p.psnr);
    }
  }
  double xpad = (xmax - xmin) * 0.05 + 1e-9, ypad = (ymax - ymin) * 0.05 + 1e-9;
  xmin -= xpad, xmax += xpad, ymin -= ypad, ymax += ypad;
  auto sx = [&](double x) { return margin + (x - xmin) / (xmax - xmin) * (w - 2 * margin); };
  auto sy = [&](double y) { return h - margin - (y - ymin) / (ymax - ymin) * (h - 2 * margin); };

  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + path + "'");
  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>" << title
      << "</text>\n";
  out << "<line x1='" << margin << "' y1='" << h - margin << "' x2='" << w - margin << "' y2='"
      << h - margin << "' stroke='black'/>\n";
  out << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
      << h - margin << "' stroke='black'/>\n";
  out << "<text x='" << w / 2 << "' y='" << h - 16
      << "' text-anchor='middle' font-size='12'>bits per input point</text>\n";
  out << "<text x='18' y='" << h / 2 << "' font-size='12' transform='rotate(-90 18 " << h / 2
      << ")' text-anchor='middle'>PSNR (dB)</text>\n";
  const char* colors[2] = {"#1f77b4", "#d62728"};
  const char* labels[2] = {"anchor", "enhanced"};
  const std::vector<RDCurve::Point>* curves[2] = {&anchor, &test};
  for (int c = 0; c < 2; ++c) {
    out << "<polyline fill='none' stroke='" << colors[c] << "' stroke-width='2' points='";
    for (const auto& p : *curves[c]) out << sx(p.bpip) << ',' << sy(p.psnr) << ' ';
    out << "'/>\n";
    for (const auto& p : *curves[c])
      out << "<circle cx='" << sx(p.bpip) << "' cy='" << sy(p.psnr) << "' r='3' fill='"
          << colors[c] << "'/>\n";
    out << "<text x='" << w - margin - 100 << "' y='" << margin + 18 * (c + 1) << "' fill='"
        << colors[c] << "' font-size='12'>" << labels[c] << "</text>\n";
  }
  out << "</svg>\n";
}

// ---- subcommand bodies -------------------------------------------------

int cmd_make_toy_data(const GlobalOptions& g, const std::string& out_dir, int frames, int points,
                      const std::vector<int>& qps, int grid, double motion, double detail_mid,
                      double detail_fine) {
  auto t0 = std::chrono::steady_clock::now();
  TrainingConfig cfg = resolve_config(g);

  ToyConfig toy;
  toy.frames = frames;
  toy.points = points;
  toy.seed = cfg.seed;
  toy.grid = grid;
  toy.motion = motion;
  toy.detail_mid = detail_mid;
  toy.detail_fine = detail_fine;

  fs::create_directories(fs::path(out_dir) / "clean");
  std::vector<PointCloudFrame> clean = make_toy_sequence(toy);

  RunManifest manifest;
  manifest.command = "make-toy-data";
  manifest.config_path = g.config_path;
  manifest.seed = cfg.seed;
  manifest.version = kVersion;

  std::vector<ManifestRow> rows;
  for (int t = 0; t < frames; ++t) {
    std::string clean_path = (fs::path(out_dir) / "clean" / frame_name(t)).string();
    save_ply(clean[t], clean_path);
    manifest.outputs.push_back(clean_path);
    for (int qp : qps) {
      fs::create_directories(fs::path(out_dir) / ("qp" + std::to_string(qp)));
      std::string degraded_path =
          (fs::path(out_dir) / ("qp" + std::to_string(qp)) / frame_name(t)).string();
      save_ply(degrade(clean[t], qp, qps), degraded_path);
      manifest.outputs.push_back(degraded_path);
      rows.push_back({clean_path, degraded_path, qp, t});
    }
  }
  std::string manifest_csv = (fs::path(out_dir) / "dataset_manifest.csv").string();
  write_dataset_manifest(rows, manifest_csv);
  manifest.outputs.push_back(manifest_csv);
  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, (fs::path(out_dir) / "run_manifest.json").string());
  std::cout << "wrote " << frames << " clean + " << frames * qps.size() << " degraded frames to "
            << out_dir << "\n";
  return 0;
}

int cmd_recolor(const GlobalOptions& g, const std::string& reference_path,
                const std::string& target_path, const std::string& out_path, int k_r) {
  auto t0 = std::chrono::steady_clock::now();
  PointCloudFrame reference = load_ply(reference_path);
  PointCloudFrame target = load_ply(target_path);
  VirtualFrame virt = recolor(reference, target.geometry, k_r);
  save_ply(virt.frame, out_path);

  RunManifest manifest;
  manifest.command = "recolor";
  manifest.config_path = g.config_path;
  manifest.seed = g.seed.value_or(0);
  manifest.inputs = {reference_path, target_path};
  manifest.outputs = {out_path};
  manifest.version = kVersion;
  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, out_path + ".manifest.json");
  std::cout << "recolored " << reference_path << " onto " << target.point_count() << " points\n";
  return 0;
}

int cmd_patch(const GlobalOptions& g, const std::string& input_path, int patch_size,
              double stride, const std::string& out_path) {
  auto t0 = std::chrono::steady_clock::now();
  PointCloudFrame frame = load_ply(input_path);
  PatchSet set = generate_patches(frame, patch_size, stride);

  nlohmann::json j;
  j["origin_n"] = set.origin_n;
  j["patch_size"] = patch_size;
  j["stride_fraction"] = stride;
  j["patches"] = set.patches;
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw std::runtime_error("unwritable-path: '" + out_path + "'");
  out << j.dump(2) << '\n';

  RunManifest manifest;
  manifest.command = "patch";
  manifest.config_path = g.config_path;
  manifest.seed = g.seed.value_or(0);
  manifest.inputs = {input_path};
  manifest.outputs = {out_path};
  manifest.version = kVersion;
  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, out_path + ".manifest.json");
  std::cout << set.patches.size() << " patches covering " << set.origin_n << " points\n";
  return 0;
}

int cmd_train_qe(const GlobalOptions& g, const std::string& manifest_path,
                 const std::string& out_path, const std::string& log_path) {
  auto t0 = std::chrono::steady_clock::now();
  TrainingConfig cfg = resolve_config(g);
  Dataset dataset = build_dataset_from_manifest(manifest_path, cfg);
  std::vector<TrainLogRow> log;
  QeParams qe = train_qe(dataset, cfg, &log);
  save_checkpoint(out_path, "qe", qe.config, qe.store);
  if (!log_path.empty()) write_training_log(log, log_path);

  RunManifest manifest;
  manifest.command = "train-qe";
  manifest.config_path = g.config_path;
  manifest.seed = cfg.seed;
  manifest.inputs = {manifest_path};
  manifest.outputs = {out_path};
  if (!log_path.empty()) manifest.outputs.push_back(log_path);
  manifest.version = kVersion;
  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, out_path + ".manifest.json");
  double final_loss = log.empty() ? 0.0 : log.back().loss;
  std::cout << "stage-1 done: " << dataset.train.size() << " samples, final loss " << final_loss
            << ", checkpoint " << out_path << "\n";
  return 0;
}

int cmd_train(const GlobalOptions& g, const std::string& manifest_path,
              const std::string& qe_path, bool no_qe, const std::string& ablation,
              const std::string& out_path, const std::string& log_path) {
  auto t0 = std::chrono::steady_clock::now();
  TrainingConfig cfg = resolve_config(g);
  if (!ablation.empty()) cfg.model.ablation = ablation_from_name(ablation);
  if (no_qe) cfg.model.ablation = Ablation::NoQe;

  QeParams qe;
  if (cfg.model.ablation == Ablation::NoQe) {
    qe.config = cfg.model;
  } else {
    if (qe_path.empty())
      throw std::runtime_error(
          "train: a QE checkpoint is required (train-qe first, or pass --no-qe)");
    Checkpoint ckpt = load_checkpoint(qe_path);
    if (ckpt.kind != "qe")
      throw std::runtime_error("checkpoint-mismatch: '" + qe_path + "' is not a QE checkpoint");
    if (ckpt.config.component != cfg.component)
      throw std::runtime_error("checkpoint-mismatch: QE component '" + ckpt.config.component +
                               "' vs configured '" + cfg.component + "'");
    qe = init_qe_params(cfg.model);
    qe.store.load_values_from(ckpt.store);
  }

  Dataset dataset = build_dataset_from_manifest(manifest_path, cfg);
  std::vector<TrainLogRow> log;
  BqeParams params = train_bqe(dataset, qe, cfg, &log);
  save_checkpoint(out_path, "bqe", params.config, params.store);
  if (!log_path.empty()) write_training_log(log, log_path);

  RunManifest manifest;
  manifest.command = "train";
  manifest.config_path = g.config_path;
  manifest.seed = cfg.seed;
  manifest.inputs = {manifest_path};
  if (!qe_path.empty()) manifest.inputs.push_back(qe_path);
  manifest.outputs = {out_path};
  if (!log_path.empty()) manifest.outputs.push_back(log_path);
  manifest.version = kVersion;
  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, out_path + ".manifest.json");
  double final_loss = log.empty() ? 0.0 : log.back().loss;
  std::cout << "stage-2 done: " << dataset.train.size() << " samples, final loss " << final_loss
            << ", checkpoint " << out_path << "\n";
  return 0;
}

int cmd_enhance(const GlobalOptions& g, const std::string& checkpoint_path,
                const std::string& input_dir, const std::string& out_dir,
                const std::string& originals_dir, const std::string& range, int patch_size,
                double stride) {
  auto t0 = std::chrono::steady_clock::now();
  Checkpoint ckpt = load_checkpoint(checkpoint_path);
  if (ckpt.kind != "bqe")
    throw std::runtime_error("checkpoint-mismatch: '" + checkpoint_path +
                             "' is not a model checkpoint");
  if (!g.component.empty() && g.component != ckpt.config.component)
    throw std::runtime_error("checkpoint-mismatch: checkpoint component '" +
                             ckpt.config.component + "' vs requested '" + g.component + "'");

  BqeParams params = init_bqe_params(ckpt.config);
  params.store.load_values_from(ckpt.store);
  const std::string& component = ckpt.config.component;

  std::vector<std::string> files = list_ply_sorted(input_dir);
  if (files.empty()) throw std::runtime_error("missing-frames: no .ply files in " + input_dir);

  int t_begin = 0, t_end = static_cast<int>(files.size());
  if (!range.empty()) {
    size_t colon = range.find(':');
    if (colon == std::string::npos) throw std::runtime_error("bad --range, expected begin:end");
    t_begin = std::stoi(range.substr(0, colon));
    t_end = std::stoi(range.substr(colon + 1));
    if (t_begin < 0 || t_end > static_cast<int>(files.size()) || t_begin >= t_end)
      throw std::runtime_error("missing-frames: range " + range + " outside 0:" +
                               std::to_string(files.size()));
  }

  std::vector<PointCloudFrame> rgb_frames;
  std::vector<PointCloudFrame> component_seq;
  for (size_t i = 0; i < files.size(); ++i) {
    PointCloudFrame f = load_ply(files[i]);
    f.frame_index = static_cast<int>(i);
    component_seq.push_back(select_component(f, component));
    rgb_frames.push_back(std::move(f));
  }

  fs::create_directories(out_dir);
  EnhanceOptions opts;
  opts.patch_size = patch_size;
  opts.stride_fraction = stride;

  RunManifest manifest;
  manifest.command = "enhance";
  manifest.config_path = g.config_path;
  manifest.seed = ckpt.config.seed;
  manifest.inputs = {checkpoint_path, input_dir};
  manifest.version = kVersion;

  double delta_sum = 0.0;
  int delta_count = 0;
  for (int t = t_begin; t < t_end; ++t) {
    PointCloudFrame enhanced_comp = enhance_frame(component_seq, t, params, opts);

    PointCloudFrame out_frame;
    if (rgb_frames[t].channel_count() == 3) {
      PointCloudFrame ycbcr = rgb_to_ycbcr(rgb_frames[t]);
      set_attribute_channel(ycbcr, component_channel(component), enhanced_comp.attributes);
      out_frame = ycbcr_to_rgb(ycbcr);
    } else {
      out_frame = enhanced_comp;
    }
    std::string out_path = (fs::path(out_dir) / fs::path(files[t]).filename()).string();
    save_ply(out_frame, out_path);
    manifest.outputs.push_back(out_path);

    if (!originals_dir.empty()) {
      std::string orig_path = (fs::path(originals_dir) / fs::path(files[t]).filename()).string();
      PointCloudFrame orig = select_component(load_ply(orig_path), component);
      double d = delta_psnr(std::span<const double>(enhanced_comp.attributes.a),
                            std::span<const double>(component_seq[t].attributes.a),
                            std::span<const double>(orig.attributes.a));
      std::cout << "frame " << t << ": dPSNR(" << component << ") = " << d << " dB\n";
      delta_sum += d;
      ++delta_count;
    }
  }
  if (delta_count > 0)
    std::cout << "mean dPSNR(" << component << ") = " << delta_sum / delta_count << " dB over "
              << delta_count << " frames\n";

  manifest.wall_seconds = wall_since(t0);
  write_manifest(manifest, (fs::path(out_dir) / "run_manifest.json").string());
  return 0;
}

int cmd_evaluate(const GlobalOptions& g, const std::string& anchor_path,
                 const std::string& test_path, const std::string& plot_prefix) {
  auto t0 = std::chrono::steady_clock::now();
  RdTable anchor = read_rd_csv(anchor_path);
  RdTable test = read_rd_csv(test_path);
  if (anchor.size() != test.size())
    throw std::runtime_error("malformed-csv: anchor and test row counts differ");

  std::cout << "rate point    bpip     dPSNR-Y   dPSNR-Cb  dPSNR-Cr  dPSNR-YCbCr\n";
  double mean[4] = {0, 0, 0, 0};
  for (size_t i = 0; i < anchor.size(); ++i) {
    double dy = test.y[i] - anchor.y[i];
    double dcb = test.cb[i] - anchor.cb[i];
    double dcr = test.cr[i] - anchor.cr[i];
    double dycc = ycbcr_psnr(test.y[i], test.cb[i], test.cr[i]) -
                  ycbcr_psnr(anchor.y[i], anchor.cb[i], anchor.cr[i]);
    mean[0] += dy, mean[1] += dcb, mean[2] += dcr, mean[3] += dycc;
    std::printf("R%02zu       %8.4f   %+8.4f  %+8.4f  %+8.4f  %+8.4f\n", i + 1, anchor.bpip[i], dy,
                dcb, dcr, dycc);
  }
  for (double& m : mean) m /= anchor.size();
  std::printf("average              %+8.4f  %+8.4f  %+8.4f  %+8.4f\n", mean[0], mean[1], mean[2],
              mean[3]);

  std::cout << "\nBD-rate (%):\n";
  std::printf("  Y     %+8.4f\n", bd_rate(anchor.curve_y(), test.curve_y()));
  std::printf("  Cb    %+8.4f\n", bd_rate(anchor.curve_cb(), test.curve_cb()));
  std::printf("  Cr    %+8.4f\n", bd_rate(anchor.curve_cr(), test.curve_cr()));
  std::printf("  YCbCr %+8.4f\n", bd_rate(anchor.curve_ycbcr(), test.curve_ycbcr()));

  RunManifest manifest;
  manifest.command = "evaluate";
  manifest.config_path = g.config_path;
  manifest.seed = g.seed.value_or(0);
  manifest.inputs = {anchor_path, test_path};
  manifest.version = kVersion;

  if (!plot_prefix.empty()) {
    struct Component {
      const char* name;
      RDCurve a, t;
    };
    Component comps[3] = {{"y", anchor.curve_y(), test.curve_y()},
                          {"cb", anchor.curve_cb(), test.curve_cb()},
                          {"cr", anchor.curve_cr(), test.curve_cr()}};
    for (const auto& c : comps) {
      std::string path = plot_prefix + "_" + c.name + ".svg";
      write_svg_plot(path, std::string("rate-PSNR (") + c.name + ")", c.a.points, c.t.points);
      manifest.outputs.push_back(path);
      std::cout << "wrote " << path << "\n";
    }
  }
  manifest.wall_seconds = wall_since(t0);
  if (!plot_prefix.empty()) write_manifest(manifest, plot_prefix + ".manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Blind quality enhancement toolkit for compressed dynamic point cloud attributes"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "training/model configuration file (key = value)");
  uint64_t seed_value = 0;
  auto* seed_opt = app.add_option("--seed", seed_value, "override the configured RNG seed");
  app.add_option("--component", g.component, "color component: y, cb or cr")
      ->check(CLI::IsMember({"y", "cb", "cr"}))
      ->capture_default_str();
  app.add_flag("--deterministic", g.deterministic, "single-threaded execution");

  // make-toy-data
  auto* toy = app.add_subcommand("make-toy-data", "synthesize a toy dynamic sequence");
  std::string toy_out;
  int toy_frames = 5, toy_points = 512, toy_grid = 64;
  double toy_motion = 1.5, toy_detail_mid = 6.0, toy_detail_fine = 2.0;
  std::vector<int> toy_qps = {51, 40, 22};
  toy->add_option("--out", toy_out, "output directory")->required();
  toy->add_option("--frames", toy_frames, "frame count")->capture_default_str();
  toy->add_option("--points", toy_points, "points per frame")->capture_default_str();
  toy->add_option("--qps", toy_qps, "QP list for degraded copies")->delimiter(',');
  toy->add_option("--grid", toy_grid, "voxel grid extent")->capture_default_str();
  toy->add_option("--motion", toy_motion, "per-frame drift in voxels")->capture_default_str();
  toy->add_option("--detail-mid", toy_detail_mid, "mid-scale texture amplitude")
      ->capture_default_str();
  toy->add_option("--detail-fine", toy_detail_fine, "fine texture amplitude")
      ->capture_default_str();

  // recolor
  auto* rec = app.add_subcommand("recolor", "remap reference attributes onto a target geometry");
  std::string rec_ref, rec_target, rec_out;
  int rec_k = 3;
  rec->add_option("--reference", rec_ref, "reference PLY")->required();
  rec->add_option("--target", rec_target, "target PLY (geometry donor)")->required();
  rec->add_option("--out", rec_out, "output PLY")->required();
  rec->add_option("--k-r", rec_k, "neighbors for attribute transfer")->capture_default_str();

  // patch
  auto* pat = app.add_subcommand("patch", "split a frame into covering patches");
  std::string pat_in, pat_out;
  int pat_size = 2048;
  double pat_stride = 0.5;
  pat->add_option("--input", pat_in, "input PLY")->required();
  pat->add_option("--out", pat_out, "output JSON of patch index lists")->required();
  pat->add_option("--patch-size", pat_size, "points per patch")->capture_default_str();
  pat->add_option("--stride", pat_stride, "stride fraction in (0, 1]")->capture_default_str();

  // train-qe
  auto* tqe = app.add_subcommand("train-qe", "stage 1: pre-train the quality estimation module");
  std::string tqe_manifest, tqe_out, tqe_log;
  tqe->add_option("--manifest", tqe_manifest, "dataset manifest CSV")->required();
  tqe->add_option("--out", tqe_out, "output QE checkpoint")->required();
  tqe->add_option("--log", tqe_log, "training log CSV");

  // train
  auto* trn = app.add_subcommand("train", "stage 2: train the model with frozen QE");
  std::string trn_manifest, trn_qe, trn_out, trn_log, trn_ablation;
  bool trn_no_qe = false;
  trn->add_option("--manifest", trn_manifest, "dataset manifest CSV")->required();
  trn->add_option("--qe", trn_qe, "stage-1 QE checkpoint");
  trn->add_option("--out", trn_out, "output model checkpoint")->required();
  trn->add_option("--log", trn_log, "training log CSV");
  trn->add_option("--ablation", trn_ablation, "none, no-tcca, no-pe, no-na or no-qe");
  trn->add_flag("--no-qe", trn_no_qe, "drop the QE module (fusion pinned to the deep branch)");

  // enhance
  auto* enh = app.add_subcommand("enhance", "enhance a degraded sequence with a checkpoint");
  std::string enh_ckpt, enh_in, enh_out, enh_orig, enh_range;
  int enh_patch = 2048;
  double enh_stride = 0.5;
  enh->add_option("--checkpoint", enh_ckpt, "model checkpoint")->required();
  enh->add_option("--input", enh_in, "directory of degraded PLY frames")->required();
  enh->add_option("--out", enh_out, "output directory")->required();
  enh->add_option("--originals", enh_orig, "directory of clean PLY frames (prints dPSNR)");
  enh->add_option("--range", enh_range, "frame range begin:end (default all)");
  enh->add_option("--patch-size", enh_patch, "points per patch")->capture_default_str();
  enh->add_option("--stride", enh_stride, "patch stride fraction")->capture_default_str();

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "dPSNR / BD-rate report from RD CSV files");
  std::string eva_anchor, eva_test, eva_plot;
  eva->add_option("--anchor", eva_anchor, "anchor RD CSV")->required();
  eva->add_option("--test", eva_test, "test RD CSV")->required();
  eva->add_option("--plot", eva_plot, "prefix for per-component SVG plots");

  CLI11_PARSE(app, argc, argv);

  if (seed_opt->count() > 0) g.seed = seed_value;
  if (g.deterministic) set_max_threads(1);

  try {
    if (*toy) return cmd_make_toy_data(g, toy_out, toy_frames, toy_points, toy_qps, toy_grid,
                                       toy_motion, toy_detail_mid, toy_detail_fine);
    if (*rec) return cmd_recolor(g, rec_ref, rec_target, rec_out, rec_k);
    if (*pat) return cmd_patch(g, pat_in, pat_size, pat_stride, pat_out);
    if (*tqe) return cmd_train_qe(g, tqe_manifest, tqe_out, tqe_log);
    if (*trn) return cmd_train(g, trn_manifest, trn_qe, trn_no_qe, trn_ablation, trn_out, trn_log);
    if (*enh)
      return cmd_enhance(g, enh_ckpt, enh_in, enh_out, enh_orig, enh_range, enh_patch, enh_stride);
    if (*eva) return cmd_evaluate(g, eva_anchor, eva_test, eva_plot);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
