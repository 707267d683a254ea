// SPDX-License-Identifier: Apache-2.0
#include "lidarda/align.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lidarda/error.hpp"

namespace lidarda {

void AugmentConfig::validate() const {
  if (global_shift_xy < 0.0 || global_shift_z < 0.0 ||
      per_class_shift_xy < 0.0 || per_class_shift_z < 0.0)
    throw ValidationError("augment: shift ranges must be >= 0");
}

void ClassHistogram::validate(int ignore_index) const {
  if (freq.size() == 0) throw ValidationError("histogram: empty");
  double sum = 0.0;
  for (Eigen::Index c = 0; c < freq.size(); ++c) {
    if (freq[c] < 0.0) throw ValidationError("histogram: negative entry");
    sum += freq[c];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw ValidationError("histogram: entries sum to " + std::to_string(sum));
  if (ignore_index >= 0 && ignore_index < freq.size() && freq[ignore_index] != 0.0)
    throw ValidationError("histogram: ignore class has nonzero frequency");
}

LabeledCloud translate(const LabeledCloud& cloud, const Eigen::Vector3d& shift) {
  LabeledCloud out = cloud;
  for (auto& p : out.points) p += shift;
  return out;
}

LabeledCloud xyz_shift(const LabeledCloud& cloud, const AugmentConfig& cfg, Rng& rng) {
  cfg.validate();
  const Eigen::Vector3d shift{rng.uniform(-cfg.global_shift_xy, cfg.global_shift_xy),
                              rng.uniform(-cfg.global_shift_xy, cfg.global_shift_xy),
                              rng.uniform(-cfg.global_shift_z, cfg.global_shift_z)};
  return translate(cloud, shift);
}

LabeledCloud per_class_translate(const LabeledCloud& cloud,
                                 const std::map<int, Eigen::Vector3d>& shifts) {
  if (!cloud.has_labels() && cloud.size() > 0)
    throw ValidationError("per_class_translate: cloud has no labels");
  LabeledCloud out = cloud;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto it = shifts.find(out.labels[i]);
    if (it != shifts.end()) out.points[i] += it->second;
  }
  return out;
}

LabeledCloud per_class_shift(const LabeledCloud& cloud, const AugmentConfig& cfg,
                             Rng& rng, int ignore_index) {
  cfg.validate();
  if (!cloud.has_labels() && cloud.size() > 0)
    throw ValidationError("per_class_shift: cloud has no labels");
  // Draw in ascending class order so the shifts do not depend on point order.
  const std::set<int> classes(cloud.labels.begin(), cloud.labels.end());
  std::map<int, Eigen::Vector3d> shifts;
  for (int c : classes) {
    if (c == ignore_index) continue;
    shifts[c] = {rng.uniform(-cfg.per_class_shift_xy, cfg.per_class_shift_xy),
                 rng.uniform(-cfg.per_class_shift_xy, cfg.per_class_shift_xy),
                 rng.uniform(-cfg.per_class_shift_z, cfg.per_class_shift_z)};
  }
  return per_class_translate(cloud, shifts);
}

std::vector<int> beam_keep_set(int src_beams, int tgt_beams, BeamSelection mode) {
  if (src_beams < 1 || tgt_beams < 1)
    throw ValidationError("beam_keep_set: beam counts must be >= 1");
  if (tgt_beams > src_beams)
    throw ValidationError("beam_keep_set: cannot upsample " +
                          std::to_string(src_beams) + " beams to " +
                          std::to_string(tgt_beams));
  std::vector<int> keep;
  keep.reserve(static_cast<std::size_t>(tgt_beams));
  if (mode == BeamSelection::even) {
    if (tgt_beams == 1) return {0};
    for (int i = 0; i < tgt_beams; ++i)
      keep.push_back(static_cast<int>(std::lround(
          static_cast<double>(i) * (src_beams - 1) / (tgt_beams - 1))));
  } else {
    const int stride = (src_beams + tgt_beams - 1) / tgt_beams;
    for (int b = 0; b < src_beams && static_cast<int>(keep.size()) < tgt_beams;
         b += stride)
      keep.push_back(b);
  }
  return keep;
}

LabeledCloud match_beams(const LabeledCloud& cloud, int src_beams, int tgt_beams,
                         BeamSelection mode) {
  const std::vector<int> keep = beam_keep_set(src_beams, tgt_beams, mode);
  std::vector<int> renumber(static_cast<std::size_t>(src_beams), -1);
  for (std::size_t i = 0; i < keep.size(); ++i) renumber[keep[i]] = static_cast<int>(i);

  LabeledCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const int b = cloud.beam[i];
    if (b < 0 || b >= src_beams)
      throw ValidationError("match_beams: point " + std::to_string(i) +
                            " has beam index " + std::to_string(b) +
                            " outside [0, " + std::to_string(src_beams) + ")");
    if (renumber[b] < 0) continue;
    out.points.push_back(cloud.points[i]);
    out.reflectance.push_back(cloud.reflectance[i]);
    out.beam.push_back(renumber[b]);
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[i]);
  }
  return out;
}

LabeledCloud infer_beams(const LabeledCloud& cloud, const SensorConfig& sensor) {
  sensor.validate();
  const double lo = sensor.min_elev_deg * M_PI / 180.0;
  const double hi = sensor.max_elev_deg * M_PI / 180.0;
  const int bins = sensor.beam_count;
  LabeledCloud out = cloud;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double norm = out.points[i].norm();
    const double elev = norm == 0.0 ? 0.0 : std::asin(out.points[i].z() / norm);
    int bin = static_cast<int>(std::floor((elev - lo) / (hi - lo) * bins));
    bin = std::clamp(bin, 0, bins - 1);
    out.beam[i] = bin;
  }
  return out;
}

LabeledCloud fov_crop(const LabeledCloud& cloud, double max_range,
                      double azimuth_min_deg, double azimuth_max_deg,
                      double elev_min_deg, double elev_max_deg) {
  if (azimuth_min_deg > azimuth_max_deg || elev_min_deg > elev_max_deg)
    throw ValidationError("fov_crop: empty span");
  const double to_rad = M_PI / 180.0;
  LabeledCloud out;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const double range = p.norm();
    if (range > max_range) continue;
    const double az = std::atan2(p.y(), p.x());
    if (az < azimuth_min_deg * to_rad || az > azimuth_max_deg * to_rad) continue;
    const double elev = range == 0.0 ? 0.0 : std::asin(p.z() / range);
    if (elev < elev_min_deg * to_rad || elev > elev_max_deg * to_rad) continue;
    out.points.push_back(p);
    out.reflectance.push_back(cloud.reflectance[i]);
    out.beam.push_back(cloud.beam[i]);
    if (cloud.has_labels()) out.labels.push_back(cloud.labels[i]);
  }
  return out;
}

ClassHistogram class_histogram(const std::vector<std::vector<int>>& label_sets,
                               const ClassDef& class_def) {
  class_def.validate();
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(class_def.class_count);
  for (const auto& labels : label_sets) {
    for (int l : labels) {
      if (l < 0 || l >= class_def.class_count)
        throw ValidationError("class_histogram: label " + std::to_string(l) +
                              " out of range");
      if (!class_def.is_ignored(l)) counts[l] += 1.0;
    }
  }
  const double total = counts.sum();
  if (total == 0.0)
    throw ValidationError("class_histogram: no countable labeled points");
  ClassHistogram hist;
  hist.freq = counts / total;
  return hist;
}

ClassHistogram class_histogram(const DatasetManifest& manifest) {
  if (!manifest.labeled())
    throw ValidationError("class_histogram: manifest has no labels");
  std::vector<std::vector<int>> label_sets;
  label_sets.reserve(manifest.label_paths.size());
  for (const auto& p : manifest.label_paths)
    label_sets.push_back(read_labels(p, manifest.class_def));
  return class_histogram(label_sets, manifest.class_def);
}

}  // namespace lidarda
