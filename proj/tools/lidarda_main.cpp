// SPDX-License-Identifier: Apache-2.0
//
// lidarda: synthetic LiDAR domain-adaptation pipeline.
// Subcommands: synth, align, train, eval, ablate, render. Each reads a
// key-value config file, applies per-key CLI overrides, validates against
// its schema, and writes a run manifest next to its outputs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "lidarda/align.hpp"
#include "lidarda/cloud.hpp"
#include "lidarda/config.hpp"
#include "lidarda/error.hpp"
#include "lidarda/metrics.hpp"
#include "lidarda/render.hpp"
#include "lidarda/rng.hpp"
#include "lidarda/synth.hpp"
#include "lidarda/train.hpp"

namespace fs = std::filesystem;
using namespace lidarda;

namespace {

struct CommandContext {
  std::string config_path;
  std::map<std::string, std::string> overrides;
};

// One CLI option per schema key, so every config key has a flag of the same
// name.
void bind_schema(CLI::App* cmd, const Schema& schema, CommandContext& ctx) {
  cmd->add_option("--config", ctx.config_path, "key = value configuration file");
  for (const auto& key : schema.keys()) {
    const std::string name = "--" + key.name;
    const std::string help =
        key.help + (key.default_value.empty() ? "" : " [" + key.default_value + "]");
    cmd->add_option_function<std::string>(
        name,
        [&ctx, key_name = key.name](const std::string& v) {
          ctx.overrides[key_name] = v;
        },
        help);
  }
}

Resolved resolve(const Schema& schema, const CommandContext& ctx) {
  Config config;
  if (!ctx.config_path.empty()) config = Config::parse_file(ctx.config_path);
  for (const auto& [k, v] : ctx.overrides) config.set(k, v);
  return Resolved{schema.resolve(config)};
}

fs::path require_out(const Resolved& r) {
  const std::string out = r.get_text("out");
  if (out.empty()) throw ValidationError("missing required key \"out\"");
  fs::create_directories(out);
  return out;
}

double optional_real(const Resolved& r, const std::string& key, double fallback) {
  const std::string& v = r.get_text(key);
  if (v.empty()) return fallback;
  try {
    std::size_t pos = 0;
    const double parsed = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return parsed;
  } catch (const std::exception&) {
    throw ValidationError("config: key \"" + key + "\" expects a number, got \"" +
                          v + "\"");
  }
}

// ---------------------------------------------------------------- synth ----

Schema synth_schema() {
  Schema s;
  s.add("out", KeyType::text, "", "output directory")
      .add("seed", KeyType::seed, "0", "root seed")
      .add("n_scans", KeyType::integer, "8", "scan pairs to generate")
      .add("scene.extent", KeyType::real, "30", "half-width of the scene, meters")
      .add("scene.road_half_width", KeyType::real, "4")
      .add("scene.sidewalk_width", KeyType::real, "3")
      .add("scene.sidewalk_height", KeyType::real, "0.15")
      .add("scene.buildings", KeyType::integer, "10")
      .add("scene.cars", KeyType::integer, "8")
      .add("scene.poles", KeyType::integer, "10")
      .add("scene.trees", KeyType::integer, "8")
      .add("scene.persons", KeyType::integer, "6")
      .add("scene.bushes", KeyType::integer, "6")
      .add("source.preset", KeyType::text, "hdl64", "source sensor preset")
      .add("target.preset", KeyType::text, "vlp16-low", "target sensor preset");
  for (const char* side : {"source", "target"}) {
    const std::string p(side);
    s.add(p + ".beams", KeyType::text, "", "override: beam count")
        .add(p + ".horizontal_steps", KeyType::text, "", "override: azimuth steps")
        .add(p + ".mount_height", KeyType::text, "", "override: mount height, m")
        .add(p + ".mount_tilt", KeyType::text, "", "override: axis tilt, deg")
        .add(p + ".max_range", KeyType::text, "", "override: max range, m")
        .add(p + ".min_elev", KeyType::text, "", "override: min elevation, deg")
        .add(p + ".max_elev", KeyType::text, "", "override: max elevation, deg")
        .add(p + ".noise_sigma", KeyType::text, "", "override: range noise, m");
  }
  return s;
}

SensorConfig sensor_from(const Resolved& r, const std::string& prefix) {
  SensorConfig cfg = sensor_preset(r.get_text(prefix + ".preset"));
  cfg.beam_count =
      static_cast<int>(optional_real(r, prefix + ".beams", cfg.beam_count));
  cfg.horizontal_steps = static_cast<int>(
      optional_real(r, prefix + ".horizontal_steps", cfg.horizontal_steps));
  cfg.mount_height = optional_real(r, prefix + ".mount_height", cfg.mount_height);
  cfg.mount_tilt_deg = optional_real(r, prefix + ".mount_tilt", cfg.mount_tilt_deg);
  cfg.max_range = optional_real(r, prefix + ".max_range", cfg.max_range);
  cfg.min_elev_deg = optional_real(r, prefix + ".min_elev", cfg.min_elev_deg);
  cfg.max_elev_deg = optional_real(r, prefix + ".max_elev", cfg.max_elev_deg);
  cfg.range_noise_sigma =
      optional_real(r, prefix + ".noise_sigma", cfg.range_noise_sigma);
  cfg.validate();
  return cfg;
}

SceneSpec scene_from(const Resolved& r) {
  SceneSpec spec;
  spec.seed = r.get_seed("seed");
  spec.extent = r.get_double("scene.extent");
  spec.road_half_width = r.get_double("scene.road_half_width");
  spec.sidewalk_width = r.get_double("scene.sidewalk_width");
  spec.sidewalk_height = r.get_double("scene.sidewalk_height");
  spec.n_buildings = static_cast<int>(r.get_int("scene.buildings"));
  spec.n_cars = static_cast<int>(r.get_int("scene.cars"));
  spec.n_poles = static_cast<int>(r.get_int("scene.poles"));
  spec.n_trees = static_cast<int>(r.get_int("scene.trees"));
  spec.n_persons = static_cast<int>(r.get_int("scene.persons"));
  spec.n_bushes = static_cast<int>(r.get_int("scene.bushes"));
  spec.validate();
  return spec;
}

int cmd_synth(const Resolved& r) {
  const fs::path out = require_out(r);
  const SceneSpec spec = scene_from(r);
  const SensorConfig src = sensor_from(r, "source");
  const SensorConfig tgt = sensor_from(r, "target");
  const int n_scans = static_cast<int>(r.get_int("n_scans"));
  const DomainPairResult result = domain_pair(spec, src, tgt, n_scans, out);
  write_run_manifest(r, out / "run_manifest.txt");
  std::cout << "wrote " << result.n_scans << " scan pairs under " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- align ----

void add_chain_keys(Schema& s) {
  s.add("augment.global_shift_xy", KeyType::real, "5")
      .add("augment.global_shift_z", KeyType::real, "2")
      .add("augment.per_class_shift_xy", KeyType::real, "3")
      .add("augment.per_class_shift_z", KeyType::real, "1")
      .add("chain.use_xyz_shift", KeyType::boolean, "false")
      .add("chain.use_per_class_shift", KeyType::boolean, "false")
      .add("chain.use_beam_match", KeyType::boolean, "false")
      .add("chain.source_beams", KeyType::integer, "64")
      .add("chain.beam_match_target", KeyType::integer, "16")
      .add("chain.beam_selection", KeyType::text, "even", "even | stride")
      .add("chain.use_fov_crop", KeyType::boolean, "false")
      .add("chain.crop_max_range", KeyType::real, "1e9")
      .add("chain.crop_azimuth_min", KeyType::real, "-180")
      .add("chain.crop_azimuth_max", KeyType::real, "180")
      .add("chain.crop_elev_min", KeyType::real, "-90")
      .add("chain.crop_elev_max", KeyType::real, "90")
      .add("chain.feature_mode", KeyType::text, "relative_absolute",
           "relative_only | relative_absolute");
}

TransformChain chain_from(const Resolved& r) {
  TransformChain chain;
  chain.use_xyz_shift = r.get_bool("chain.use_xyz_shift");
  chain.use_per_class_shift = r.get_bool("chain.use_per_class_shift");
  chain.use_beam_match = r.get_bool("chain.use_beam_match");
  chain.source_beams = static_cast<int>(r.get_int("chain.source_beams"));
  chain.beam_match_target = static_cast<int>(r.get_int("chain.beam_match_target"));
  const std::string selection = r.get_text("chain.beam_selection");
  if (selection == "even")
    chain.beam_selection = BeamSelection::even;
  else if (selection == "stride")
    chain.beam_selection = BeamSelection::stride;
  else
    throw ValidationError("config: chain.beam_selection must be even or stride");
  chain.use_fov_crop = r.get_bool("chain.use_fov_crop");
  chain.crop_max_range = r.get_double("chain.crop_max_range");
  chain.crop_azimuth_min_deg = r.get_double("chain.crop_azimuth_min");
  chain.crop_azimuth_max_deg = r.get_double("chain.crop_azimuth_max");
  chain.crop_elev_min_deg = r.get_double("chain.crop_elev_min");
  chain.crop_elev_max_deg = r.get_double("chain.crop_elev_max");
  const std::string mode = r.get_text("chain.feature_mode");
  if (mode == "relative_only")
    chain.feature_mode = FeatureMode::relative_only;
  else if (mode == "relative_absolute")
    chain.feature_mode = FeatureMode::relative_absolute;
  else
    throw ValidationError(
        "config: chain.feature_mode must be relative_only or relative_absolute");
  return chain;
}

AugmentConfig augment_from(const Resolved& r) {
  AugmentConfig cfg;
  cfg.global_shift_xy = r.get_double("augment.global_shift_xy");
  cfg.global_shift_z = r.get_double("augment.global_shift_z");
  cfg.per_class_shift_xy = r.get_double("augment.per_class_shift_xy");
  cfg.per_class_shift_z = r.get_double("augment.per_class_shift_z");
  cfg.seed = r.get_seed("seed");
  cfg.validate();
  return cfg;
}

Schema align_schema() {
  Schema s;
  s.add("in", KeyType::text, "", "input dataset directory")
      .add("out", KeyType::text, "", "output dataset directory")
      .add("seed", KeyType::seed, "0")
      .add("labels", KeyType::text, "labels.txt", "labels manifest to carry through")
      .add("infer.preset", KeyType::text, "",
           "infer beam indices with this sensor preset before the chain");
  add_chain_keys(s);
  return s;
}

int cmd_align(const Resolved& r) {
  const std::string in = r.get_text("in");
  if (in.empty()) throw ValidationError("missing required key \"in\"");
  const fs::path out = require_out(r);
  const AugmentConfig augment = augment_from(r);
  const TransformChain chain = chain_from(r);
  const std::string infer_preset = r.get_text("infer.preset");

  const DatasetManifest dataset =
      load_dataset(in, DatasetRole::source, r.get_text("labels"));
  fs::create_directories(out / "scans");
  if (dataset.labeled()) fs::create_directories(out / "labels");

  std::vector<fs::path> scan_rel, label_rel;
  char name[32];
  for (std::size_t i = 0; i < dataset.scan_paths.size(); ++i) {
    LabeledCloud cloud = read_scan_bin(dataset.scan_paths[i]);
    if (dataset.labeled())
      cloud.labels = read_labels(dataset.label_paths[i], dataset.class_def);
    if (!infer_preset.empty()) cloud = infer_beams(cloud, sensor_preset(infer_preset));

    Rng rng(mix_seed(augment.seed, {stream::kAugment, i}));
    if (chain.use_beam_match)
      cloud = match_beams(cloud, chain.source_beams, chain.beam_match_target,
                          chain.beam_selection);
    if (chain.use_fov_crop)
      cloud = fov_crop(cloud, chain.crop_max_range, chain.crop_azimuth_min_deg,
                       chain.crop_azimuth_max_deg, chain.crop_elev_min_deg,
                       chain.crop_elev_max_deg);
    if (chain.use_xyz_shift) cloud = xyz_shift(cloud, augment, rng);
    if (chain.use_per_class_shift)
      cloud = per_class_shift(cloud, augment, rng, dataset.class_def.ignore_index);

    std::snprintf(name, sizeof(name), "%06zu", i);
    const fs::path scan_path = fs::path("scans") / (std::string(name) + ".bin");
    write_scan_bin(cloud, out / scan_path);
    scan_rel.push_back(scan_path);
    if (dataset.labeled()) {
      const fs::path label_path = fs::path("labels") / (std::string(name) + ".label");
      write_labels(cloud, out / label_path);
      label_rel.push_back(label_path);
    }
  }
  write_manifest_lines(scan_rel, out / "scans.txt");
  if (dataset.labeled()) write_manifest_lines(label_rel, out / r.get_text("labels"));
  write_class_def(dataset.class_def, out / "classes.txt");
  write_run_manifest(r, out / "run_manifest.txt");
  std::cout << "transformed " << scan_rel.size() << " scans into " << out.string()
            << "\n";
  return 0;
}

// ---------------------------------------------------------------- train ----

void add_train_keys(Schema& s) {
  s.add("train.total_iters", KeyType::integer, "5000")
      .add("train.batch_size", KeyType::integer, "8")
      .add("train.points_per_scan", KeyType::integer, "256")
      .add("train.lr0", KeyType::real, "5e-3")
      .add("train.poly_power", KeyType::real, "0.9")
      .add("train.momentum", KeyType::real, "0")
      .add("train.lambda_ent", KeyType::real, "0.001")
      .add("train.lambda_align", KeyType::real, "0.001")
      .add("train.align_mode", KeyType::text, "batch_mean", "batch_mean | per_point")
      .add("train.k_neighbors", KeyType::integer, "16")
      .add("train.hidden1", KeyType::integer, "64")
      .add("train.hidden2", KeyType::integer, "64")
      .add("train.eval_every", KeyType::integer, "0")
      .add("train.checkpoint_every", KeyType::integer, "0")
      .add("train.threads", KeyType::integer, "2")
      .add("eval.labels", KeyType::text, "labels_eval.txt",
           "target labels manifest used for held-out evaluation; may be absent");
  add_chain_keys(s);
}

TrainConfig train_config_from(const Resolved& r) {
  TrainConfig cfg;
  cfg.total_iters = static_cast<int>(r.get_int("train.total_iters"));
  cfg.batch_size = static_cast<int>(r.get_int("train.batch_size"));
  cfg.points_per_scan = static_cast<int>(r.get_int("train.points_per_scan"));
  cfg.lr0 = r.get_double("train.lr0");
  cfg.poly_power = r.get_double("train.poly_power");
  cfg.momentum = r.get_double("train.momentum");
  cfg.weights.lambda_ent = r.get_double("train.lambda_ent");
  cfg.weights.lambda_align = r.get_double("train.lambda_align");
  const std::string mode = r.get_text("train.align_mode");
  if (mode == "batch_mean")
    cfg.align_mode = AlignMode::batch_mean;
  else if (mode == "per_point")
    cfg.align_mode = AlignMode::per_point;
  else
    throw ValidationError("config: train.align_mode must be batch_mean or per_point");
  cfg.k_neighbors = static_cast<int>(r.get_int("train.k_neighbors"));
  cfg.hidden1 = static_cast<int>(r.get_int("train.hidden1"));
  cfg.hidden2 = static_cast<int>(r.get_int("train.hidden2"));
  cfg.eval_every = static_cast<int>(r.get_int("train.eval_every"));
  cfg.checkpoint_every = static_cast<int>(r.get_int("train.checkpoint_every"));
  cfg.threads = static_cast<int>(r.get_int("train.threads"));
  cfg.seed = r.get_seed("seed");
  cfg.augment = augment_from(r);
  cfg.chain = chain_from(r);
  cfg.validate();
  return cfg;
}

Schema train_schema() {
  Schema s;
  s.add("source", KeyType::text, "", "labeled source dataset directory")
      .add("target", KeyType::text, "", "unlabeled target dataset directory")
      .add("out", KeyType::text, "", "output directory")
      .add("seed", KeyType::seed, "0");
  add_train_keys(s);
  return s;
}

int cmd_train(const Resolved& r) {
  const std::string source_dir = r.get_text("source");
  const std::string target_dir = r.get_text("target");
  if (source_dir.empty() || target_dir.empty())
    throw ValidationError("missing required key \"source\" or \"target\"");
  const fs::path out = require_out(r);
  const TrainConfig cfg = train_config_from(r);

  const DatasetManifest source = load_dataset(source_dir, DatasetRole::source);
  const DatasetManifest target = load_dataset(target_dir, DatasetRole::target);

  DatasetManifest heldout;
  const DatasetManifest* eval_ptr = nullptr;
  const std::string eval_labels = r.get_text("eval.labels");
  if (!eval_labels.empty() && fs::exists(fs::path(target_dir) / eval_labels)) {
    heldout = load_dataset(target_dir, DatasetRole::target, eval_labels);
    eval_ptr = &heldout;
  }

  write_run_manifest(r, out / "run_manifest.txt");
  const TrainResult result = train(source, target, cfg, out, eval_ptr);
  std::cout << "final checkpoint: " << result.checkpoint_path.string() << "\n";
  if (eval_ptr) std::cout << "final target mIoU: " << result.final_eval_miou << "\n";
  return 0;
}

// ----------------------------------------------------------------- eval ----

Schema eval_schema() {
  Schema s;
  s.add("checkpoint", KeyType::text, "", "model checkpoint file")
      .add("data", KeyType::text, "", "labeled dataset directory")
      .add("labels", KeyType::text, "labels.txt", "labels manifest name")
      .add("out", KeyType::text, "", "output directory")
      .add("seed", KeyType::seed, "0")
      .add("feature.mode", KeyType::text, "relative_absolute",
           "relative_only | relative_absolute")
      .add("feature.k", KeyType::integer, "16");
  return s;
}

int cmd_eval(const Resolved& r) {
  const std::string ckpt = r.get_text("checkpoint");
  const std::string data = r.get_text("data");
  if (ckpt.empty() || data.empty())
    throw ValidationError("missing required key \"checkpoint\" or \"data\"");
  const fs::path out = require_out(r);

  const std::string mode_text = r.get_text("feature.mode");
  FeatureMode mode;
  if (mode_text == "relative_only")
    mode = FeatureMode::relative_only;
  else if (mode_text == "relative_absolute")
    mode = FeatureMode::relative_absolute;
  else
    throw ValidationError(
        "config: feature.mode must be relative_only or relative_absolute");

  const ModelParams params = load_checkpoint(ckpt);
  const DatasetManifest manifest =
      load_dataset(data, DatasetRole::source, r.get_text("labels"));
  const EvalResult result =
      evaluate(params, manifest, mode, static_cast<int>(r.get_int("feature.k")));
  write_iou_csv(result.report, manifest.class_def, out / "metrics.csv");
  write_run_manifest(r, out / "run_manifest.txt");
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", result.report.miou);
  std::cout << "mIoU " << buf << " over " << manifest.scan_paths.size()
            << " scans; report: " << (out / "metrics.csv").string() << "\n";
  return 0;
}

// --------------------------------------------------------------- ablate ----

Schema ablate_schema() {
  Schema s;
  s.add("source", KeyType::text, "", "labeled source dataset directory")
      .add("target", KeyType::text, "", "unlabeled target dataset directory")
      .add("out", KeyType::text, "", "output directory")
      .add("seed", KeyType::seed, "0")
      .add("ablate.mode", KeyType::text, "stages", "stages | lambda")
      .add("ablate.stages", KeyType::text,
           "base,xyz,perclass,beams,relative,minent,align")
      .add("ablate.lambdas", KeyType::text, "1e-5,1e-3,1e-2")
      .add("ablate.seeds", KeyType::text, "1,2,3");
  add_train_keys(s);
  return s;
}

int cmd_ablate(const Resolved& r) {
  const std::string source_dir = r.get_text("source");
  const std::string target_dir = r.get_text("target");
  if (source_dir.empty() || target_dir.empty())
    throw ValidationError("missing required key \"source\" or \"target\"");
  const fs::path out = require_out(r);
  const TrainConfig base_cfg = train_config_from(r);

  const DatasetManifest source = load_dataset(source_dir, DatasetRole::source);
  const DatasetManifest target = load_dataset(target_dir, DatasetRole::target);
  const std::string eval_labels = r.get_text("eval.labels");
  const DatasetManifest heldout =
      load_dataset(target_dir, DatasetRole::target, eval_labels);
  if (!heldout.labeled())
    throw ValidationError("ablate: target is missing the held-out labels manifest \"" +
                          eval_labels + "\"");

  std::vector<std::uint64_t> seeds;
  for (const auto& s : r.get_list("ablate.seeds")) seeds.push_back(std::stoull(s));

  write_run_manifest(r, out / "run_manifest.txt");
  AblationTable table;
  const std::string mode = r.get_text("ablate.mode");
  if (mode == "stages") {
    table = run_ablation(source, target, heldout, base_cfg,
                         r.get_list("ablate.stages"), seeds, out);
  } else if (mode == "lambda") {
    std::vector<double> lambdas;
    for (const auto& l : r.get_list("ablate.lambdas")) lambdas.push_back(std::stod(l));
    table = run_lambda_sweep(source, target, heldout, base_cfg, lambdas, seeds, out);
  } else {
    throw ValidationError("config: ablate.mode must be stages or lambda");
  }

  for (const auto& row : table.rows) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", row.mean_miou);
    std::cout << row.stage << ": mean mIoU " << buf << "\n";
  }
  std::cout << "table: " << (out / "ablation.csv").string() << "\n";
  return 0;
}

// --------------------------------------------------------------- render ----

Schema render_schema() {
  Schema s;
  s.add("in", KeyType::text, "", "dataset directory or single .bin scan")
      .add("out", KeyType::text, "", "output directory")
      .add("seed", KeyType::seed, "0")
      .add("labels", KeyType::text, "labels.txt", "labels manifest name")
      .add("render.width", KeyType::integer, "1024")
      .add("render.rows", KeyType::integer, "0", "0: use stored beam indices")
      .add("render.max_range", KeyType::real, "80")
      .add("render.min_elev", KeyType::real, "-25")
      .add("render.max_elev", KeyType::real, "15");
  return s;
}

int cmd_render(const Resolved& r) {
  const std::string in = r.get_text("in");
  if (in.empty()) throw ValidationError("missing required key \"in\"");
  const fs::path out = require_out(r);

  RenderConfig cfg;
  cfg.width = static_cast<int>(r.get_int("render.width"));
  cfg.rows = static_cast<int>(r.get_int("render.rows"));
  cfg.max_range = r.get_double("render.max_range");
  cfg.min_elev_deg = r.get_double("render.min_elev");
  cfg.max_elev_deg = r.get_double("render.max_elev");

  std::vector<fs::path> scans;
  std::vector<fs::path> labels;
  if (fs::is_directory(in)) {
    const DatasetManifest manifest =
        load_dataset(in, DatasetRole::source, r.get_text("labels"));
    scans = manifest.scan_paths;
    labels = manifest.label_paths;
  } else {
    scans = {in};
    const fs::path side = fs::path(in).replace_extension(".label");
    if (fs::exists(side)) labels = {side};
  }

  int failures = 0;
  char name[32];
  for (std::size_t i = 0; i < scans.size(); ++i) {
    try {
      LabeledCloud cloud = read_scan_bin(scans[i]);
      if (i < labels.size()) {
        // raw ids pass straight through to the palette
        std::map<std::uint32_t, int> identity;
        for (std::uint32_t raw = 0; raw < 256; ++raw)
          identity[raw] = static_cast<int>(raw);
        cloud.labels = read_labels(labels[i], identity, 0);
      }
      std::snprintf(name, sizeof(name), "%06zu", i);
      write_pgm(render_range_image(cloud, cfg),
                out / (std::string(name) + "_range.pgm"));
      write_ppm(render_label_image(cloud, cfg),
                out / (std::string(name) + "_labels.ppm"));
    } catch (const Error& e) {
      ++failures;
      std::cerr << "render: " << scans[i].string() << ": " << e.what() << "\n";
    }
  }
  write_run_manifest(r, out / "run_manifest.txt");
  std::cout << "rendered " << (scans.size() - failures) << "/" << scans.size()
            << " scans into " << out.string() << "\n";
  return failures == 0 ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic LiDAR domain adaptation toolkit"};
  app.require_subcommand(1);

  struct Sub {
    const char* name;
    const char* desc;
    Schema schema;
    int (*run)(const Resolved&);
  };
  std::vector<Sub> subs;
  subs.push_back({"synth", "generate a source/target synthetic dataset pair",
                  synth_schema(), cmd_synth});
  subs.push_back({"align", "apply a data-alignment chain to a dataset offline",
                  align_schema(), cmd_align});
  subs.push_back({"train", "jointly train on source labels and unlabeled target",
                  train_schema(), cmd_train});
  subs.push_back({"eval", "evaluate a checkpoint on a labeled dataset",
                  eval_schema(), cmd_eval});
  subs.push_back({"ablate", "run the cumulative pipeline ablation or lambda sweep",
                  ablate_schema(), cmd_ablate});
  subs.push_back({"render", "write spherical-projection range/label images",
                  render_schema(), cmd_render});

  std::vector<CommandContext> contexts(subs.size());
  for (std::size_t i = 0; i < subs.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(subs[i].name, subs[i].desc);
    bind_schema(cmd, subs[i].schema, contexts[i]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (std::size_t i = 0; i < subs.size(); ++i) {
      if (app.get_subcommand(subs[i].name)->parsed())
        return subs[i].run(resolve(subs[i].schema, contexts[i]));
    }
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
