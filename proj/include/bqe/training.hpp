// SPDX-License-Identifier: Apache-2.0

#ifndef BQE_TRAINING_HPP
#define BQE_TRAINING_HPP

#include <string>
#include <vector>

#include "bqe/model.hpp"
#include "bqe/objectives.hpp"

namespace bqe {

struct TrainingConfig {
  int epochs = 50;
  int qe_epochs = 50;
  int batch_size = 10;
  double learning_rate = 1e-4;
  double qe_learning_rate = 1e-4;
  int radius = 2;
  int k = 20;
  double sigma = 5.0;
  uint64_t seed = 1;
  int patch_size = 2048;
  double stride_fraction = 0.5;
  std::vector<int> qps = {51, 46, 40, 34, 28, 22};
  DistortionGrouping grouping = DistortionGrouping::defaults();
  std::string component = "y";
  double validation_fraction = 0.2;
  int max_steps = 0;     // optimizer-step cap for stage 2; 0 = epochs decide
  int qe_max_steps = 0;  // same for stage 1
  double clip_norm = 0.0;  // global gradient-norm clip; 0 disables
  BqeConfig model;

  // Copies the shared knobs (radius, k, sigma, seed, component) into the
  // model config and the grouping.
  void finalize();
  static TrainingConfig from_file(const std::string& path);
};

// One patch-level sample: a compensated degraded window paired with the
// clean target attributes on the same geometry.
struct TrainingSample {
  TemporalWindow window;
  Mat original;  // n x 1
  int qp = 0;
};

struct Dataset {
  std::vector<TrainingSample> train;
  std::vector<TrainingSample> val;
};

// Channel index of a YCbCr component name ("y", "cb", "cr").
int component_channel(const std::string& component);

// Reduces a frame to one working channel: RGB input goes through the YCbCr
// conversion first, single-channel input passes through.
PointCloudFrame select_component(const PointCloudFrame& frame, const std::string& component);

// Quantization step of the synthetic codec stand-in: 2^((qp - 22) / 6).
double qp_step(int qp);

// Quantizes attributes with the QP's step and clamps to [0, 255]; geometry is
// untouched. The QP must belong to qp_set ("unknown-qp" otherwise).
PointCloudFrame degrade(const PointCloudFrame& frame, int qp, const std::vector<int>& qp_set);

// Builds patch samples for every (frame, qp, patch) combination: window
// frames are degraded, references recolored onto the patch geometry, targets
// paired with clean attributes. Training order is shuffled by config.seed;
// the last validation_fraction of frames are held out.
Dataset build_dataset(const std::vector<PointCloudFrame>& clean_sequence,
                      const std::vector<int>& qps, const TrainingConfig& config);

// Pre-degraded pairs listed in a CSV manifest with header
// "clean_path,degraded_path,qp,frame_index".
struct ManifestRow {
  std::string clean_path;
  std::string degraded_path;
  int qp = 0;
  int frame_index = 0;
};

std::vector<ManifestRow> read_dataset_manifest(const std::string& path);
void write_dataset_manifest(const std::vector<ManifestRow>& rows, const std::string& path);
Dataset build_dataset_from_manifest(const std::string& path, const TrainingConfig& config);

struct TrainLogRow {
  int epoch = 0;
  std::string stage;
  double loss = 0.0;
  double seconds = 0.0;
};

void write_training_log(const std::vector<TrainLogRow>& rows, const std::string& path);

// Stage 1: pre-trains the QE module against Gaussian soft labels.
QeParams train_qe(const Dataset& dataset, const TrainingConfig& config,
                  std::vector<TrainLogRow>* log = nullptr);

// Stage 2: trains everything except the QE parameters, which are copied from
// the stage-1 result and stay bit-identical.
BqeParams train_bqe(const Dataset& dataset, const QeParams& qe, const TrainingConfig& config,
                    std::vector<TrainLogRow>* log = nullptr);

}

#endif
