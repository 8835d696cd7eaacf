// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>

#include "bqe/metrics.hpp"
#include "bqe/toydata.hpp"
#include "bqe/training.hpp"

#include "testutil.hpp"

using namespace bqe;

namespace {

TrainingConfig toy_training_config() {
  TrainingConfig cfg;
  cfg.radius = 1;
  cfg.k = 3;
  cfg.sigma = 5.0;
  cfg.seed = 21;
  cfg.patch_size = 4096;  // whole-frame patches at toy scale
  cfg.validation_fraction = 0.0;
  cfg.model.k_recolor = 2;
  cfg.model.tcca_hidden = 4;
  cfg.model.d_k = 4;
  cfg.model.d_v = 4;
  cfg.model.tcca_out = 4;
  cfg.model.dcna_per_stage = 1;
  cfg.model.na_per_dcna = 1;
  cfg.model.na_hidden = 4;
  cfg.model.na_width = 4;
  cfg.model.trunk_width = 4;
  cfg.model.c_f = 4;
  cfg.model.qe_width = 4;
  cfg.model.qe_hidden = 4;
  cfg.model.qe_na_per_dcna = 1;
  cfg.model.qe_dcna_blocks = 1;
  cfg.finalize();
  return cfg;
}

}  // namespace

TEST_CASE("degrade at the finest qp is the identity on integer attributes") {
  std::mt19937_64 rng(3);
  PointCloudFrame f = testutil::random_frame(40, 3, rng);
  PointCloudFrame d = degrade(f, 22, {22, 51});
  CHECK(d.attributes == f.attributes);
  CHECK(d.geometry == f.geometry);
  CHECK(d.qp == 22);
}

TEST_CASE("degrade quantizes with the power-of-two step law") {
  CHECK(qp_step(22) == 1.0);
  CHECK(qp_step(40) == 8.0);
  CHECK(qp_step(58) == 64.0);
  PointCloudFrame f;
  f.geometry = {{0, 0, 0}};
  f.attributes = Mat(1, 1);
  f.attributes(0, 0) = 100.0;
  PointCloudFrame d = degrade(f, 58, {58});
  CHECK(d.attributes(0, 0) == 128.0);  // round(100 / 64) * 64
  CHECK(d.geometry == f.geometry);
}

TEST_CASE("degrade rejects a qp outside the configured set") {
  PointCloudFrame f;
  f.geometry = {{0, 0, 0}};
  f.attributes = Mat(1, 1);
  CHECK_THROWS_WITH_AS(degrade(f, 33, {22, 51}), doctest::Contains("unknown-qp"),
                       std::invalid_argument);
}

TEST_CASE("psnr after degradation is monotone in qp") {
  std::mt19937_64 rng(7);
  PointCloudFrame f = testutil::random_frame(400, 1, rng);
  std::vector<int> qps = {51, 46, 40, 34, 28, 22};
  double prev = -1.0;
  for (int i = static_cast<int>(qps.size()) - 1; i >= 0; --i) {
    PointCloudFrame d = degrade(f, qps[i], qps);
    double p = psnr(d.attributes, f.attributes);
    if (prev >= 0.0) CHECK(p < prev);
    prev = p;
  }
  CHECK(psnr(degrade(f, 51, qps).attributes, f.attributes) <
        psnr(degrade(f, 22, qps).attributes, f.attributes));
}

TEST_CASE("build_dataset cardinality and construction rules") {
  ToyConfig toy;
  toy.frames = 3;
  toy.points = 64;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);

  TrainingConfig cfg = toy_training_config();
  Dataset ds = build_dataset(seq, {51, 40}, cfg);
  CHECK(ds.train.size() == 6);  // 3 frames x 2 qps x 1 patch
  CHECK(ds.val.empty());

  std::map<int, int> qp_histogram;
  for (const auto& s : ds.train) {
    ++qp_histogram[s.qp];
    REQUIRE(s.window.length() == 3);
    const PointCloudFrame& target = s.window.target();
    CHECK(target.point_count() == s.original.rows);
    for (const auto& frame : s.window.frames) CHECK(frame.geometry == target.geometry);
    CHECK(target.qp == s.qp);
  }
  CHECK(qp_histogram[51] == 3);
  CHECK(qp_histogram[40] == 3);
}

TEST_CASE("build_dataset holds out the last frames for validation") {
  ToyConfig toy;
  toy.frames = 5;
  toy.points = 48;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  cfg.validation_fraction = 0.2;
  Dataset ds = build_dataset(seq, {51, 40}, cfg);
  CHECK(ds.train.size() == 8);  // frames 0..3
  CHECK(ds.val.size() == 2);    // frame 4
  for (const auto& s : ds.val) CHECK(s.window.target().frame_index == 4);
}

TEST_CASE("build_dataset pairs degraded windows with clean targets") {
  ToyConfig toy;
  toy.frames = 2;
  toy.points = 40;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  Dataset ds = build_dataset(seq, {51}, cfg);

  std::vector<PointCloudFrame> clean_y;
  for (const auto& f : seq) clean_y.push_back(select_component(f, "y"));
  for (const auto& s : ds.train) {
    int t = s.window.target().frame_index;
    PointCloudFrame expected = degrade(clean_y[t], 51, {51});
    CHECK(s.window.target().attributes == expected.attributes);
    CHECK(s.original == clean_y[t].attributes);
  }
}

TEST_CASE("dataset construction is deterministic for a fixed seed") {
  ToyConfig toy;
  toy.frames = 3;
  toy.points = 40;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  Dataset a = build_dataset(seq, {51, 40}, cfg);
  Dataset b = build_dataset(seq, {51, 40}, cfg);
  REQUIRE(a.train.size() == b.train.size());
  for (size_t i = 0; i < a.train.size(); ++i) {
    CHECK(a.train[i].qp == b.train[i].qp);
    CHECK(a.train[i].original == b.train[i].original);
    CHECK(a.train[i].window.target() == b.train[i].window.target());
  }
}

TEST_CASE("toy sequences are stable, unique and in range") {
  ToyConfig toy;
  toy.frames = 3;
  toy.points = 200;
  std::vector<PointCloudFrame> a = make_toy_sequence(toy);
  std::vector<PointCloudFrame> b = make_toy_sequence(toy);
  REQUIRE(a.size() == 3);
  for (int t = 0; t < 3; ++t) {
    CHECK(a[t] == b[t]);
    CHECK(a[t].point_count() == 200);
    std::set<Voxel> unique(a[t].geometry.begin(), a[t].geometry.end());
    CHECK(static_cast<int>(unique.size()) == a[t].point_count());
    for (double v : a[t].attributes.a) {
      CHECK(v >= 0.0);
      CHECK(v <= 255.0);
    }
  }
  CHECK(!(a[0].geometry == a[2].geometry));  // the blob actually moves
}

TEST_CASE("train_qe with zero learning rate leaves parameters at init") {
  ToyConfig toy;
  toy.frames = 2;
  toy.points = 40;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  cfg.qps = {51, 28};
  cfg.grouping.low = {28};
  cfg.grouping.medium = {40};
  cfg.grouping.high = {51};
  cfg.qe_learning_rate = 0.0;
  cfg.qe_epochs = 1;
  Dataset ds = build_dataset(seq, cfg.qps, cfg);

  QeParams trained = train_qe(ds, cfg);
  QeParams fresh = init_qe_params(cfg.model);
  CHECK(trained.store.checksum() == fresh.store.checksum());
}

TEST_CASE("train_qe reduces the stage-1 loss") {
  ToyConfig toy;
  toy.frames = 3;
  toy.points = 64;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  cfg.qps = {51, 40, 28};
  cfg.grouping.low = {28};
  cfg.grouping.medium = {40};
  cfg.grouping.high = {51};
  cfg.qe_learning_rate = 0.01;
  cfg.qe_epochs = 10;
  cfg.batch_size = 3;
  Dataset ds = build_dataset(seq, cfg.qps, cfg);

  std::vector<TrainLogRow> log;
  train_qe(ds, cfg, &log);
  REQUIRE(log.size() >= 2);
  CHECK(log.back().loss < log.front().loss);
  for (const auto& row : log) CHECK(row.stage == "qe");
}

TEST_CASE("train_bqe freezes qe parameters and zero lr freezes everything") {
  ToyConfig toy;
  toy.frames = 2;
  toy.points = 40;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  cfg.qps = {51, 28};
  cfg.grouping.low = {28};
  cfg.grouping.medium = {40};
  cfg.grouping.high = {51};
  cfg.qe_epochs = 2;
  cfg.epochs = 2;
  cfg.batch_size = 4;
  Dataset ds = build_dataset(seq, cfg.qps, cfg);

  QeParams qe = train_qe(ds, cfg);
  uint64_t qe_sum = qe.store.checksum();

  SUBCASE("frozen qe stays bit-identical through stage 2") {
    cfg.learning_rate = 0.05;
    BqeParams params = train_bqe(ds, qe, cfg);
    CHECK(params.store.checksum("qe.") == qe_sum);
  }

  SUBCASE("zero learning rate leaves every parameter at init") {
    cfg.learning_rate = 0.0;
    BqeParams params = train_bqe(ds, qe, cfg);
    BqeParams fresh = init_bqe_params(cfg.model);
    fresh.store.load_values_from(qe.store);
    CHECK(params.store.checksum() == fresh.store.checksum());
  }
}

TEST_CASE("training is reproducible for a fixed seed") {
  ToyConfig toy;
  toy.frames = 2;
  toy.points = 36;
  toy.grid = 32;
  std::vector<PointCloudFrame> seq = make_toy_sequence(toy);
  TrainingConfig cfg = toy_training_config();
  cfg.qps = {51, 28};
  cfg.grouping.low = {28};
  cfg.grouping.medium = {40};
  cfg.grouping.high = {51};
  cfg.qe_epochs = 2;
  cfg.epochs = 2;
  cfg.learning_rate = 0.01;
  cfg.qe_learning_rate = 0.01;
  Dataset ds = build_dataset(seq, cfg.qps, cfg);

  QeParams qe1 = train_qe(ds, cfg);
  QeParams qe2 = train_qe(ds, cfg);
  CHECK(qe1.store.checksum() == qe2.store.checksum());

  BqeParams b1 = train_bqe(ds, qe1, cfg);
  BqeParams b2 = train_bqe(ds, qe2, cfg);
  CHECK(b1.store.checksum() == b2.store.checksum());
}

TEST_CASE("config files parse into a training configuration") {
  std::string path = (std::filesystem::temp_directory_path() / "bqe_test_config.txt").string();
  {
    std::ofstream out(path, std::ios::trunc);
    out << "# toy settings\n"
           "epochs = 7\n"
           "batch_size = 4\n"
           "learning_rate = 0.002\n"
           "radius = 1\n"
           "k = 9\n"
           "sigma = 4.5\n"
           "seed = 99\n"
           "qps = 51,40,28\n"
           "qps_low = 28\n"
           "qps_medium = 40\n"
           "qps_high = 51\n"
           "component = cb\n"
           "trunk_width = 12\n"
           "ablation = no-pe\n";
  }
  TrainingConfig cfg = TrainingConfig::from_file(path);
  CHECK(cfg.epochs == 7);
  CHECK(cfg.batch_size == 4);
  CHECK(cfg.learning_rate == 0.002);
  CHECK(cfg.radius == 1);
  CHECK(cfg.model.radius == 1);
  CHECK(cfg.model.k == 9);
  CHECK(cfg.grouping.sigma == 4.5);
  CHECK(cfg.seed == 99);
  CHECK(cfg.qps == std::vector<int>{51, 40, 28});
  CHECK(cfg.grouping.low == std::vector<int>{28});
  CHECK(cfg.component == "cb");
  CHECK(cfg.model.component == "cb");
  CHECK(cfg.model.trunk_width == 12);
  CHECK(cfg.model.ablation == Ablation::NoPe);

  {
    std::ofstream out(path, std::ios::trunc);
    out << "nonsense_key = 3\n";
  }
  CHECK_THROWS_WITH_AS(TrainingConfig::from_file(path), doctest::Contains("unknown key"),
                       std::runtime_error);
}

TEST_CASE("dataset manifest csv round-trips") {
  std::string path = (std::filesystem::temp_directory_path() / "bqe_test_manifest.csv").string();
  std::vector<ManifestRow> rows = {{"a/clean_0.ply", "a/deg_0.ply", 51, 0},
                                   {"a/clean_1.ply", "a/deg_1.ply", 40, 1}};
  write_dataset_manifest(rows, path);
  std::vector<ManifestRow> loaded = read_dataset_manifest(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].clean_path == "a/clean_0.ply");
  CHECK(loaded[1].qp == 40);
  CHECK(loaded[1].frame_index == 1);
}

TEST_CASE("training log csv has the expected header and rows") {
  std::string path = (std::filesystem::temp_directory_path() / "bqe_test_log.csv").string();
  write_training_log({{0, "qe", 1.25, 0.5}, {1, "bqe", 0.75, 0.25}}, path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "epoch,stage,loss,seconds");
  std::getline(in, line);
  CHECK(line.rfind("0,qe,1.25", 0) == 0);
}
