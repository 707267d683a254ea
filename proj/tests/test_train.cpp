// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "lidarda/error.hpp"
#include "lidarda/synth.hpp"
#include "lidarda/train.hpp"
#include "test_util.hpp"

using namespace lidarda;

namespace {

// Tiny two-sensor pair for fast loop tests.
void make_tiny_pair(const std::filesystem::path& dir, std::uint64_t seed,
                    int n_scans = 3, int steps = 48) {
  SceneSpec spec;
  spec.seed = seed;
  spec.extent = 20.0;
  spec.n_buildings = 4;
  spec.n_cars = 3;
  spec.n_poles = 3;
  spec.n_trees = 2;
  spec.n_persons = 2;
  spec.n_bushes = 2;
  SensorConfig src = sensor_preset("hdl64");
  src.horizontal_steps = steps;
  SensorConfig tgt = sensor_preset("vlp16-low");
  tgt.horizontal_steps = steps;
  domain_pair(spec, src, tgt, n_scans, dir);
}

TrainConfig tiny_cfg(int iters = 10) {
  TrainConfig cfg;
  cfg.total_iters = iters;
  cfg.batch_size = 2;
  cfg.points_per_scan = 32;
  cfg.hidden1 = 16;
  cfg.hidden2 = 16;
  cfg.k_neighbors = 8;
  cfg.chain.use_beam_match = false;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("lr_at follows the polynomial decay schedule") {
  TrainConfig cfg;
  cfg.total_iters = 1000;
  cfg.lr0 = 5e-3;
  cfg.poly_power = 0.9;
  CHECK(lr_at(cfg, 0) == 5e-3);
  CHECK(lr_at(cfg, 1000) == 0.0);
  CHECK(lr_at(cfg, 500) == doctest::Approx(5e-3 * std::pow(0.5, 0.9)).epsilon(1e-12));
  CHECK(lr_at(cfg, 500) == doctest::Approx(2.679e-3).epsilon(1e-3));
  CHECK_THROWS_AS(lr_at(cfg, 1001), ValidationError);
  CHECK_THROWS_AS(lr_at(cfg, -1), ValidationError);

  double prev = lr_at(cfg, 0);
  for (int t = 1; t < 1000; t += 37) {
    const double lr = lr_at(cfg, t);
    CHECK(lr < prev);
    prev = lr;
  }
}

TEST_CASE("training is deterministic across runs") {
  testutil::TempDir data("traindet");
  make_tiny_pair(data.path(), 31);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);

  testutil::TempDir out_a("runa");
  testutil::TempDir out_b("runb");
  const TrainConfig cfg = tiny_cfg();
  train(source, target, cfg, out_a.path());
  train(source, target, cfg, out_b.path());

  CHECK(testutil::slurp(out_a.path() / "train_log.csv") ==
        testutil::slurp(out_b.path() / "train_log.csv"));
  CHECK(testutil::slurp(out_a.path() / "ckpt_final.bin") ==
        testutil::slurp(out_b.path() / "ckpt_final.bin"));
  CHECK_FALSE(testutil::slurp(out_a.path() / "ckpt_final.bin").empty());
}

TEST_CASE("thread count does not change the result") {
  testutil::TempDir data("trainthreads");
  make_tiny_pair(data.path(), 32);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);

  testutil::TempDir out_a("thr1");
  testutil::TempDir out_b("thr4");
  TrainConfig cfg = tiny_cfg();
  cfg.threads = 1;
  train(source, target, cfg, out_a.path());
  cfg.threads = 4;
  train(source, target, cfg, out_b.path());
  CHECK(testutil::slurp(out_a.path() / "ckpt_final.bin") ==
        testutil::slurp(out_b.path() / "ckpt_final.bin"));
}

TEST_CASE("zero loss weights make target data irrelevant") {
  testutil::TempDir data_a("zw_a");
  testutil::TempDir data_b("zw_b");
  make_tiny_pair(data_a.path(), 33);
  make_tiny_pair(data_b.path(), 77);  // different scenes entirely
  const DatasetManifest source = load_dataset(data_a.path() / "source", DatasetRole::source);
  const DatasetManifest tgt_a = load_dataset(data_a.path() / "target", DatasetRole::target);
  const DatasetManifest tgt_b = load_dataset(data_b.path() / "target", DatasetRole::target);

  TrainConfig cfg = tiny_cfg();
  cfg.weights.lambda_ent = 0.0;
  cfg.weights.lambda_align = 0.0;

  testutil::TempDir out_a("zw_outa");
  testutil::TempDir out_b("zw_outb");
  train(source, tgt_a, cfg, out_a.path());
  train(source, tgt_b, cfg, out_b.path());
  CHECK(testutil::slurp(out_a.path() / "ckpt_final.bin") ==
        testutil::slurp(out_b.path() / "ckpt_final.bin"));
}

TEST_CASE("logged joint loss equals the weighted sum of its terms") {
  testutil::TempDir data("logid");
  make_tiny_pair(data.path(), 34);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);

  TrainConfig cfg = tiny_cfg(8);
  testutil::TempDir out("logid_out");
  train(source, target, cfg, out.path());

  std::ifstream log(out.path() / "train_log.csv");
  std::string line;
  std::getline(log, line);
  CHECK(line == "iter,lr,loss_seg,loss_align,loss_ent,loss_total");
  int rows = 0;
  while (std::getline(log, line)) {
    std::istringstream ss(line);
    std::string field;
    std::vector<double> vals;
    std::getline(ss, field, ',');  // iter
    while (std::getline(ss, field, ',')) vals.push_back(std::stod(field));
    REQUIRE(vals.size() == 5);
    const double expected = vals[1] + cfg.weights.lambda_align * vals[2] +
                            cfg.weights.lambda_ent * vals[3];
    CHECK(std::abs(vals[4] - expected) <= 1e-12);
    ++rows;
  }
  CHECK(rows == 8);
}

TEST_CASE("training writes checkpoints and eval rows on schedule") {
  testutil::TempDir data("sched");
  make_tiny_pair(data.path(), 35);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);
  const DatasetManifest heldout =
      load_dataset(data.path() / "target", DatasetRole::target, "labels_eval.txt");

  TrainConfig cfg = tiny_cfg(6);
  cfg.checkpoint_every = 2;
  cfg.eval_every = 3;
  testutil::TempDir out("sched_out");
  const TrainResult result = train(source, target, cfg, out.path(), &heldout);
  CHECK(std::filesystem::exists(out.path() / "ckpt_0000002.bin"));
  CHECK(std::filesystem::exists(out.path() / "ckpt_0000004.bin"));
  CHECK(std::filesystem::exists(out.path() / "ckpt_final.bin"));
  CHECK(result.final_eval_miou >= 0.0);

  std::ifstream eval_log(out.path() / "eval_log.csv");
  std::string line;
  std::getline(eval_log, line);
  CHECK(line == "iter,miou");
  int rows = 0;
  while (std::getline(eval_log, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 2);  // iteration 3 and the final row
}

TEST_CASE("train validates inputs") {
  testutil::TempDir data("badtrain");
  make_tiny_pair(data.path(), 36);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);

  TrainConfig bad = tiny_cfg();
  bad.lr0 = 0.0;
  testutil::TempDir out("badtrain_out");
  CHECK_THROWS_AS(train(source, target, bad, out.path()), ValidationError);

  // unlabeled source is rejected
  CHECK_THROWS_AS(train(target, target, tiny_cfg(), out.path()), ValidationError);
}

TEST_CASE("stage_config switches the cumulative pipeline flags") {
  TrainConfig base = tiny_cfg();
  base.weights.lambda_ent = 0.002;
  base.weights.lambda_align = 0.003;

  const TrainConfig s0 = stage_config(base, {"base"});
  CHECK_FALSE(s0.chain.use_xyz_shift);
  CHECK_FALSE(s0.chain.use_beam_match);
  CHECK(s0.chain.feature_mode == FeatureMode::relative_absolute);
  CHECK(s0.weights.lambda_ent == 0.0);
  CHECK(s0.weights.lambda_align == 0.0);

  const TrainConfig s3 = stage_config(base, {"base", "xyz", "perclass", "beams"});
  CHECK(s3.chain.use_xyz_shift);
  CHECK(s3.chain.use_per_class_shift);
  CHECK(s3.chain.use_beam_match);
  CHECK(s3.weights.lambda_ent == 0.0);

  const TrainConfig full = stage_config(
      base, {"base", "xyz", "perclass", "beams", "relative", "minent", "align"});
  CHECK(full.chain.feature_mode == FeatureMode::relative_only);
  CHECK(full.weights.lambda_ent == 0.002);
  CHECK(full.weights.lambda_align == 0.003);

  // skipping stages is fine, reordering and unknown names are not
  CHECK_NOTHROW(stage_config(base, {"base", "beams", "minent"}));
  CHECK_THROWS_AS(stage_config(base, {"base", "minent", "beams"}), ValidationError);
  CHECK_THROWS_AS(stage_config(base, {"xyz"}), ValidationError);
  CHECK_THROWS_AS(stage_config(base, {"base", "warp"}), ValidationError);
}

TEST_CASE("single-stage ablation equals a direct train and eval run") {
  testutil::TempDir data("abl1");
  make_tiny_pair(data.path(), 37);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);
  const DatasetManifest heldout =
      load_dataset(data.path() / "target", DatasetRole::target, "labels_eval.txt");

  TrainConfig cfg = tiny_cfg(6);
  testutil::TempDir out("abl1_out");
  const AblationTable table =
      run_ablation(source, target, heldout, cfg, {"base"}, {9}, out.path());
  REQUIRE(table.rows.size() == 1);
  REQUIRE(table.rows[0].miou_per_seed.size() == 1);

  TrainConfig direct = stage_config(cfg, {"base"});
  direct.seed = 9;
  testutil::TempDir out2("abl1_direct");
  const TrainResult result = train(source, target, direct, out2.path(), &heldout);
  CHECK(table.rows[0].miou_per_seed[0] == result.final_eval_miou);
  CHECK(std::filesystem::exists(out.path() / "ablation.csv"));
}

TEST_CASE("ablation runs are deterministic") {
  testutil::TempDir data("abl2");
  make_tiny_pair(data.path(), 38, 2, 32);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);
  const DatasetManifest heldout =
      load_dataset(data.path() / "target", DatasetRole::target, "labels_eval.txt");

  const TrainConfig cfg = tiny_cfg(4);
  testutil::TempDir out_a("abl2_a");
  testutil::TempDir out_b("abl2_b");
  run_ablation(source, target, heldout, cfg, {"base", "xyz"}, {1, 2}, out_a.path());
  run_ablation(source, target, heldout, cfg, {"base", "xyz"}, {1, 2}, out_b.path());
  CHECK(testutil::slurp(out_a.path() / "ablation.csv") ==
        testutil::slurp(out_b.path() / "ablation.csv"));
}

TEST_CASE("lambda sweep produces one row per lambda") {
  testutil::TempDir data("sweep");
  make_tiny_pair(data.path(), 39, 2, 32);
  const DatasetManifest source = load_dataset(data.path() / "source", DatasetRole::source);
  const DatasetManifest target = load_dataset(data.path() / "target", DatasetRole::target);
  const DatasetManifest heldout =
      load_dataset(data.path() / "target", DatasetRole::target, "labels_eval.txt");

  const TrainConfig cfg = tiny_cfg(4);
  testutil::TempDir out("sweep_out");
  const AblationTable table = run_lambda_sweep(source, target, heldout, cfg,
                                               {1e-5, 1e-3}, {3}, out.path());
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0].stage == "lambda_1e-05");
  CHECK(table.rows[1].stage == "lambda_0.001");
}
