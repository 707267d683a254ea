// SPDX-License-Identifier: Apache-2.0
#include "lidarda/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "lidarda/error.hpp"
#include "lidarda/rng.hpp"

namespace lidarda {

namespace fs = std::filesystem;

void TrainConfig::validate() const {
  if (total_iters < 1) throw ValidationError("train: total_iters must be >= 1");
  if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
  if (points_per_scan < 1)
    throw ValidationError("train: points_per_scan must be >= 1");
  if (!(lr0 > 0.0)) throw ValidationError("train: lr0 must be > 0");
  if (!(poly_power > 0.0)) throw ValidationError("train: poly_power must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw ValidationError("train: momentum must be in [0, 1)");
  if (k_neighbors < 1) throw ValidationError("train: k_neighbors must be >= 1");
  if (hidden1 < 1 || hidden2 < 1)
    throw ValidationError("train: hidden sizes must be >= 1");
  if (threads < 1) throw ValidationError("train: threads must be >= 1");
  weights.validate();
  augment.validate();
}

double lr_at(const TrainConfig& cfg, int iter) {
  if (iter < 0 || iter > cfg.total_iters)
    throw ValidationError("lr_at: iteration " + std::to_string(iter) +
                          " outside [0, " + std::to_string(cfg.total_iters) + "]");
  const double frac =
      1.0 - static_cast<double>(iter) / static_cast<double>(cfg.total_iters);
  return cfg.lr0 * std::pow(frac, cfg.poly_power);
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

LabeledCloud apply_chain(const LabeledCloud& cloud, const TrainConfig& cfg,
                         int ignore_index, Rng& aug_rng) {
  LabeledCloud out = cloud;
  const TransformChain& chain = cfg.chain;
  if (chain.use_beam_match)
    out = match_beams(out, chain.source_beams, chain.beam_match_target,
                      chain.beam_selection);
  if (chain.use_fov_crop)
    out = fov_crop(out, chain.crop_max_range, chain.crop_azimuth_min_deg,
                   chain.crop_azimuth_max_deg, chain.crop_elev_min_deg,
                   chain.crop_elev_max_deg);
  if (chain.use_xyz_shift) out = xyz_shift(out, cfg.augment, aug_rng);
  if (chain.use_per_class_shift)
    out = per_class_shift(out, cfg.augment, aug_rng, ignore_index);
  return out;
}

struct SlotBatch {
  Eigen::MatrixXd features;
  std::vector<int> labels;  // empty for target slots
  int resamples = 0;
};

// One (iteration, slot) unit of preprocessing. Slots own their RNG streams,
// so the result is independent of scheduling.
SlotBatch prepare_slot(const std::vector<LabeledCloud>& clouds, int scan_idx,
                       bool is_source, const TrainConfig& cfg, int ignore_index,
                       std::uint64_t iter, std::uint64_t slot) {
  Rng aug_rng(mix_seed(cfg.seed, {stream::kAugment, iter, slot}));
  Rng slot_rng(mix_seed(cfg.seed, {stream::kPoints, iter, slot}));

  SlotBatch batch;
  LabeledCloud transformed;
  int idx = scan_idx;
  for (int attempt = 0;; ++attempt) {
    transformed = is_source
                      ? apply_chain(clouds[idx], cfg, ignore_index, aug_rng)
                      : clouds[idx];
    if (transformed.size() > 0) break;
    if (attempt >= 100)
      throw ValidationError("train: scan " + std::to_string(idx) +
                            " keeps producing empty transformed clouds");
    idx = static_cast<int>(slot_rng.uniform_index(clouds.size()));
    ++batch.resamples;
  }

  std::vector<int> picks(static_cast<std::size_t>(cfg.points_per_scan));
  for (auto& p : picks)
    p = static_cast<int>(slot_rng.uniform_index(transformed.size()));

  const NeighborMatrix neighbors = knn_subset(transformed, picks, cfg.k_neighbors);
  batch.features =
      relative_features_subset(transformed, picks, neighbors, cfg.chain.feature_mode)
          .rows;
  if (is_source) {
    batch.labels.reserve(picks.size());
    for (int p : picks) batch.labels.push_back(transformed.labels[p]);
  }
  return batch;
}

void run_slots(int n_slots, int n_threads, const std::function<void(int)>& fn) {
  if (n_threads <= 1 || n_slots <= 1) {
    for (int s = 0; s < n_slots; ++s) fn(s);
    return;
  }
  std::vector<std::thread> workers;
  const int used = std::min(n_threads, n_slots);
  for (int w = 0; w < used; ++w) {
    workers.emplace_back([&, w]() {
      for (int s = w; s < n_slots; s += used) fn(s);
    });
  }
  for (auto& t : workers) t.join();
}

std::vector<LabeledCloud> load_clouds(const DatasetManifest& manifest,
                                      bool with_labels) {
  std::vector<LabeledCloud> clouds;
  clouds.reserve(manifest.scan_paths.size());
  for (std::size_t i = 0; i < manifest.scan_paths.size(); ++i) {
    LabeledCloud cloud = read_scan_bin(manifest.scan_paths[i]);
    if (with_labels) {
      cloud.labels = read_labels(manifest.label_paths[i], manifest.class_def);
      if (cloud.labels.size() != cloud.size())
        throw ValidationError("train: scan/label length mismatch for " +
                              manifest.scan_paths[i].string());
    }
    clouds.push_back(std::move(cloud));
  }
  return clouds;
}

}  // namespace

TrainResult train(const DatasetManifest& source, const DatasetManifest& target,
                  const TrainConfig& cfg, const fs::path& out_dir,
                  const DatasetManifest* eval_manifest) {
  cfg.validate();
  source.validate();
  target.validate();
  if (!source.labeled())
    throw ValidationError("train: source manifest must be labeled");
  if (source.scan_paths.empty() || target.scan_paths.empty())
    throw ValidationError("train: empty manifest");

  fs::create_directories(out_dir);
  const int ignore_index = source.class_def.ignore_index;
  const int class_count = source.class_def.class_count;

  // hist(Y_s) from the raw source labels, once, before any iteration.
  const ClassHistogram hist = class_histogram(source);

  const std::vector<LabeledCloud> src_clouds = load_clouds(source, true);
  // Target is treated as unlabeled even if labels exist on disk.
  const std::vector<LabeledCloud> tgt_clouds = load_clouds(target, false);

  const int dim = feature_dim(cfg.k_neighbors, cfg.chain.feature_mode);
  ModelParams params =
      init_params(dim, class_count, cfg.seed, cfg.hidden1, cfg.hidden2);
  GradientSet velocity = GradientSet::zeros_like(params);

  std::ofstream log(out_dir / "train_log.csv", std::ios::binary | std::ios::trunc);
  if (!log) throw IoError("cannot open train log in " + out_dir.string());
  log << "iter,lr,loss_seg,loss_align,loss_ent,loss_total\n";
  std::ofstream events(out_dir / "events.log", std::ios::binary | std::ios::trunc);
  std::ofstream eval_log;
  if (eval_manifest) {
    eval_log.open(out_dir / "eval_log.csv", std::ios::binary | std::ios::trunc);
    eval_log << "iter,miou\n";
  }

  TrainResult result;
  const int b = cfg.batch_size;
  const int pts = cfg.points_per_scan;

  for (int t = 0; t < cfg.total_iters; ++t) {
    const std::uint64_t t_u = static_cast<std::uint64_t>(t);
    Rng batch_rng(mix_seed(cfg.seed, {stream::kBatch, t_u}));
    std::vector<int> src_pick(b), tgt_pick(b);
    for (int s = 0; s < b; ++s)
      src_pick[s] = static_cast<int>(batch_rng.uniform_index(src_clouds.size()));
    for (int s = 0; s < b; ++s)
      tgt_pick[s] = static_cast<int>(batch_rng.uniform_index(tgt_clouds.size()));

    std::vector<SlotBatch> slots(static_cast<std::size_t>(2 * b));
    run_slots(2 * b, cfg.threads, [&](int s) {
      const bool is_source = s < b;
      const int scan_idx = is_source ? src_pick[s] : tgt_pick[s - b];
      slots[s] = prepare_slot(is_source ? src_clouds : tgt_clouds, scan_idx,
                              is_source, cfg, ignore_index, t_u,
                              static_cast<std::uint64_t>(s));
    });

    Eigen::MatrixXd src_x(b * pts, dim), tgt_x(b * pts, dim);
    std::vector<int> src_labels;
    src_labels.reserve(static_cast<std::size_t>(b) * pts);
    for (int s = 0; s < b; ++s) {
      src_x.middleRows(s * pts, pts) = slots[s].features;
      src_labels.insert(src_labels.end(), slots[s].labels.begin(),
                        slots[s].labels.end());
      result.resampled_scans += slots[s].resamples;
      if (slots[s].resamples > 0)
        events << "iter=" << t << " slot=" << s << " resampled "
               << slots[s].resamples << " time(s)\n";
    }
    for (int s = 0; s < b; ++s) {
      tgt_x.middleRows(s * pts, pts) = slots[b + s].features;
      result.resampled_scans += slots[b + s].resamples;
      if (slots[b + s].resamples > 0)
        events << "iter=" << t << " slot=" << b + s << " resampled "
               << slots[b + s].resamples << " time(s)\n";
    }

    const Prediction src_pred = forward(params, src_x);
    const Prediction tgt_pred = forward(params, tgt_x);
    const JointLoss loss = joint_loss(src_pred, src_labels, tgt_pred, hist,
                                      cfg.weights, ignore_index, cfg.align_mode);
    if (!std::isfinite(loss.total)) {
      std::ostringstream msg;
      msg << "train: non-finite loss at iteration " << t << " (seg=" << loss.seg
          << ", align=" << loss.align << ", ent=" << loss.ent << ")";
      throw NumericError(msg.str());
    }

    GradientSet grad = backward(params, src_x, src_pred, loss.d_src_probs);
    grad += backward(params, tgt_x, tgt_pred, loss.d_tgt_probs);

    const double lr = lr_at(cfg, t);
    if (cfg.momentum > 0.0) {
      velocity *= cfg.momentum;
      velocity += grad;
      grad = velocity;
    }
    params.w1 -= lr * grad.w1;
    params.b1 -= lr * grad.b1;
    params.w2 -= lr * grad.w2;
    params.b2 -= lr * grad.b2;
    params.w3 -= lr * grad.w3;
    params.b3 -= lr * grad.b3;

    log << t << "," << format_double(lr) << "," << format_double(loss.seg) << ","
        << format_double(loss.align) << "," << format_double(loss.ent) << ","
        << format_double(loss.total) << "\n";

    const int done = t + 1;
    if (cfg.checkpoint_every > 0 && done % cfg.checkpoint_every == 0 &&
        done < cfg.total_iters) {
      char name[40];
      std::snprintf(name, sizeof(name), "ckpt_%07d.bin", done);
      save_checkpoint(params, out_dir / name);
    }
    if (eval_manifest && cfg.eval_every > 0 && done % cfg.eval_every == 0 &&
        done < cfg.total_iters) {
      const EvalResult ev = evaluate(params, *eval_manifest,
                                     cfg.chain.feature_mode, cfg.k_neighbors);
      eval_log << done << "," << format_double(ev.report.miou) << "\n";
    }
  }

  result.checkpoint_path = out_dir / "ckpt_final.bin";
  save_checkpoint(params, result.checkpoint_path);
  if (eval_manifest) {
    const EvalResult ev = evaluate(params, *eval_manifest,
                                   cfg.chain.feature_mode, cfg.k_neighbors);
    result.final_eval_miou = ev.report.miou;
    eval_log << cfg.total_iters << "," << format_double(ev.report.miou) << "\n";
  }
  result.params = std::move(params);
  result.log_path = out_dir / "train_log.csv";
  return result;
}

EvalResult evaluate(const ModelParams& params, const DatasetManifest& manifest,
                    FeatureMode feature_mode, int k_neighbors) {
  manifest.validate();
  if (!manifest.labeled())
    throw ValidationError("evaluate: manifest has no labels");

  EvalResult result{IouReport{}, ConfusionMatrix(manifest.class_def.class_count,
                                                 manifest.class_def.ignore_index)};
  for (std::size_t i = 0; i < manifest.scan_paths.size(); ++i) {
    LabeledCloud cloud = read_scan_bin(manifest.scan_paths[i]);
    cloud.labels = read_labels(manifest.label_paths[i], manifest.class_def);
    if (cloud.labels.size() != cloud.size())
      throw ValidationError("evaluate: scan/label length mismatch for " +
                            manifest.scan_paths[i].string());
    if (cloud.size() == 0) continue;
    const NeighborMatrix neighbors = knn(cloud, k_neighbors);
    const FeatureMatrix fm = relative_features(cloud, neighbors, feature_mode);
    const Prediction pred = forward(params, fm.rows);
    accumulate(result.confusion, cloud.labels, pred);
  }
  result.report = iou(result.confusion);
  return result;
}

const std::vector<std::string>& ablation_stage_names() {
  static const std::vector<std::string> names = {
      "base", "xyz", "perclass", "beams", "relative", "minent", "align"};
  return names;
}

TrainConfig stage_config(const TrainConfig& base_cfg,
                         const std::vector<std::string>& stages_prefix) {
  const auto& canon = ablation_stage_names();
  if (stages_prefix.empty() || stages_prefix.front() != "base")
    throw ValidationError("stage_config: stage list must start at \"base\"");

  TrainConfig cfg = base_cfg;
  cfg.chain.use_xyz_shift = false;
  cfg.chain.use_per_class_shift = false;
  cfg.chain.use_beam_match = false;
  cfg.chain.use_fov_crop = false;
  cfg.chain.feature_mode = FeatureMode::relative_absolute;
  cfg.weights.lambda_ent = 0.0;
  cfg.weights.lambda_align = 0.0;

  std::size_t canon_pos = 0;
  for (const auto& stage : stages_prefix) {
    const auto it = std::find(canon.begin() + canon_pos, canon.end(), stage);
    if (it == canon.end())
      throw ValidationError("stage_config: unknown or out-of-order stage \"" +
                            stage + "\"");
    canon_pos = static_cast<std::size_t>(it - canon.begin()) + 1;
    if (stage == "xyz") cfg.chain.use_xyz_shift = true;
    else if (stage == "perclass") cfg.chain.use_per_class_shift = true;
    else if (stage == "beams") cfg.chain.use_beam_match = true;
    else if (stage == "relative") cfg.chain.feature_mode = FeatureMode::relative_only;
    else if (stage == "minent") cfg.weights.lambda_ent = base_cfg.weights.lambda_ent;
    else if (stage == "align") cfg.weights.lambda_align = base_cfg.weights.lambda_align;
  }
  return cfg;
}

namespace {

AblationTable run_variants(
    const DatasetManifest& source, const DatasetManifest& target,
    const DatasetManifest& eval_manifest,
    const std::vector<std::pair<std::string, TrainConfig>>& variants,
    const std::vector<std::uint64_t>& seeds, const fs::path& out_dir) {
  if (seeds.empty()) throw ValidationError("ablation: need at least one seed");
  fs::create_directories(out_dir);

  AblationTable table;
  table.seeds = seeds;
  for (const auto& [name, variant_cfg] : variants) {
    AblationRow row;
    row.stage = name;
    for (std::uint64_t seed : seeds) {
      TrainConfig cfg = variant_cfg;
      cfg.seed = seed;
      const fs::path run_dir = out_dir / (name + "_seed" + std::to_string(seed));
      const TrainResult res = train(source, target, cfg, run_dir, &eval_manifest);
      row.miou_per_seed.push_back(res.final_eval_miou);
    }
    double sum = 0.0;
    for (double m : row.miou_per_seed) sum += m;
    row.mean_miou = sum / static_cast<double>(row.miou_per_seed.size());
    table.rows.push_back(std::move(row));
  }
  write_ablation_csv(table, out_dir / "ablation.csv");
  return table;
}

}  // namespace

AblationTable run_ablation(const DatasetManifest& source,
                           const DatasetManifest& target,
                           const DatasetManifest& eval_manifest,
                           const TrainConfig& base_cfg,
                           const std::vector<std::string>& stages,
                           const std::vector<std::uint64_t>& seeds,
                           const fs::path& out_dir) {
  std::vector<std::pair<std::string, TrainConfig>> variants;
  std::vector<std::string> prefix;
  for (const auto& stage : stages) {
    prefix.push_back(stage);
    variants.emplace_back(stage, stage_config(base_cfg, prefix));
  }
  return run_variants(source, target, eval_manifest, variants, seeds, out_dir);
}

AblationTable run_lambda_sweep(const DatasetManifest& source,
                               const DatasetManifest& target,
                               const DatasetManifest& eval_manifest,
                               const TrainConfig& base_cfg,
                               const std::vector<double>& lambdas,
                               const std::vector<std::uint64_t>& seeds,
                               const fs::path& out_dir) {
  std::vector<std::pair<std::string, TrainConfig>> variants;
  for (double lambda : lambdas) {
    if (lambda < 0.0) throw ValidationError("lambda sweep: negative lambda");
    TrainConfig cfg = base_cfg;
    cfg.weights.lambda_ent = lambda;
    cfg.weights.lambda_align = lambda;
    std::ostringstream name;
    name << "lambda_" << lambda;
    variants.emplace_back(name.str(), cfg);
  }
  return run_variants(source, target, eval_manifest, variants, seeds, out_dir);
}

void write_ablation_csv(const AblationTable& table, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "stage";
  for (std::uint64_t s : table.seeds) out << ",seed" << s;
  out << ",mean\n";
  char buf[32];
  for (const auto& row : table.rows) {
    out << row.stage;
    for (double m : row.miou_per_seed) {
      std::snprintf(buf, sizeof(buf), "%.6f", m);
      out << "," << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.6f", row.mean_miou);
    out << "," << buf << "\n";
  }
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace lidarda
