// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidarda/align.hpp"
#include "lidarda/cloud.hpp"
#include "lidarda/losses.hpp"
#include "lidarda/metrics.hpp"
#include "lidarda/model.hpp"

namespace lidarda {

// Source-side transform chain applied per iteration, in order: beam match,
// FOV crop, global shift, per-class shift. The feature mode applies to both
// domains at extraction time.
struct TransformChain {
  bool use_beam_match = false;
  int source_beams = 64;
  int beam_match_target = 16;
  BeamSelection beam_selection = BeamSelection::even;
  bool use_fov_crop = false;
  double crop_max_range = 1e9;
  double crop_azimuth_min_deg = -180.0;
  double crop_azimuth_max_deg = 180.0;
  double crop_elev_min_deg = -90.0;
  double crop_elev_max_deg = 90.0;
  bool use_xyz_shift = false;
  bool use_per_class_shift = false;
  FeatureMode feature_mode = FeatureMode::relative_absolute;
};

struct TrainConfig {
  int total_iters = 5000;  // paper-scale runs use 700000; desk default 5000
  int batch_size = 8;      // scans per domain per iteration
  int points_per_scan = 256;
  double lr0 = 5e-3;
  double poly_power = 0.9;
  double momentum = 0.0;
  LossWeights weights;
  AugmentConfig augment;
  TransformChain chain;
  AlignMode align_mode = AlignMode::batch_mean;
  int k_neighbors = 16;
  int hidden1 = 64;
  int hidden2 = 64;
  std::uint64_t seed = 0;
  int eval_every = 0;       // 0: final evaluation only
  int checkpoint_every = 0; // 0: final checkpoint only
  int threads = 2;

  void validate() const;
};

// Polynomial decay: lr0 * (1 - t/T)^power for 0 <= t <= T.
double lr_at(const TrainConfig& cfg, int iter);

struct TrainResult {
  ModelParams params;
  std::filesystem::path checkpoint_path;
  std::filesystem::path log_path;
  double final_eval_miou = -1.0;  // -1 when no eval manifest was given
  int resampled_scans = 0;
};

// Joint optimization: per iteration, batch_size source scans (transform
// chain applied, labels used) and batch_size target scans (treated as
// unlabeled) drive seg + lambda_align*align + lambda_ent*ent. Writes
// train_log.csv, eval_log.csv and checkpoints under out_dir.
TrainResult train(const DatasetManifest& source, const DatasetManifest& target,
                  const TrainConfig& cfg, const std::filesystem::path& out_dir,
                  const DatasetManifest* eval_manifest = nullptr);

struct EvalResult {
  IouReport report;
  ConfusionMatrix confusion;
};

// Full-cloud evaluation of a labeled manifest (no augmentation; identity
// target chain).
EvalResult evaluate(const ModelParams& params, const DatasetManifest& manifest,
                    FeatureMode feature_mode, int k_neighbors);

// Canonical cumulative stage names mirroring the adaptation pipeline.
const std::vector<std::string>& ablation_stage_names();

// base_cfg with every adaptation step disabled, then the stages up to and
// including `stages[i]` switched on.
TrainConfig stage_config(const TrainConfig& base_cfg,
                         const std::vector<std::string>& stages_prefix);

struct AblationRow {
  std::string stage;
  std::vector<double> miou_per_seed;
  double mean_miou = 0.0;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  std::vector<std::uint64_t> seeds;
};

// Trains one model per cumulative stage (per seed) and evaluates each on the
// labeled eval manifest. Stages must be a subsequence of
// ablation_stage_names() starting at "base".
AblationTable run_ablation(const DatasetManifest& source,
                           const DatasetManifest& target,
                           const DatasetManifest& eval_manifest,
                           const TrainConfig& base_cfg,
                           const std::vector<std::string>& stages,
                           const std::vector<std::uint64_t>& seeds,
                           const std::filesystem::path& out_dir);

// Full-pipeline sensitivity probe: one row per lambda value (applied to both
// weights).
AblationTable run_lambda_sweep(const DatasetManifest& source,
                               const DatasetManifest& target,
                               const DatasetManifest& eval_manifest,
                               const TrainConfig& base_cfg,
                               const std::vector<double>& lambdas,
                               const std::vector<std::uint64_t>& seeds,
                               const std::filesystem::path& out_dir);

void write_ablation_csv(const AblationTable& table, const std::filesystem::path& path);

}  // namespace lidarda
