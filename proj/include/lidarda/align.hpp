// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <vector>

#include "lidarda/cloud.hpp"
#include "lidarda/rng.hpp"
#include "lidarda/synth.hpp"

namespace lidarda {

// Shift ranges in meters ("up to +/-" bounds, sampled uniformly).
struct AugmentConfig {
  double global_shift_xy = 5.0;
  double global_shift_z = 2.0;
  double per_class_shift_xy = 3.0;
  double per_class_shift_z = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Normalized class-frequency vector. The ignore class has frequency 0 and is
// excluded from normalization.
struct ClassHistogram {
  Eigen::VectorXd freq;

  void validate(int ignore_index) const;
};

// Applies a fixed translation to every point (deterministic core of
// xyz_shift).
LabeledCloud translate(const LabeledCloud& cloud, const Eigen::Vector3d& shift);

// One uniform shift vector for the whole cloud, drawn from
// [-xy, xy]^2 x [-z, z].
LabeledCloud xyz_shift(const LabeledCloud& cloud, const AugmentConfig& cfg, Rng& rng);

// One shift vector per class id present (deterministic core + drawing
// wrapper). Ignore-class points stay put when ignore_index >= 0.
LabeledCloud per_class_translate(const LabeledCloud& cloud,
                                 const std::map<int, Eigen::Vector3d>& shifts);
LabeledCloud per_class_shift(const LabeledCloud& cloud, const AugmentConfig& cfg,
                             Rng& rng, int ignore_index = -1);

// Beam selection sets for reducing a denser sensor to tgt_beams: evenly
// spaced (endpoints included) or strided (every ceil(src/tgt)-th beam).
enum class BeamSelection { even, stride };
std::vector<int> beam_keep_set(int src_beams, int tgt_beams,
                               BeamSelection mode = BeamSelection::even);

// Keeps only the selected beams and renumbers them 0..tgt_beams-1 preserving
// elevation order.
LabeledCloud match_beams(const LabeledCloud& cloud, int src_beams, int tgt_beams,
                         BeamSelection mode = BeamSelection::even);

// Bins each point's elevation angle into beam_count uniform bins over the
// sensor's vertical FOV. Out-of-FOV points clamp to the nearest bin.
LabeledCloud infer_beams(const LabeledCloud& cloud, const SensorConfig& sensor);

// Retains points with range <= max_range, azimuth and elevation within the
// given spans (degrees). Order preserved.
LabeledCloud fov_crop(const LabeledCloud& cloud, double max_range,
                      double azimuth_min_deg, double azimuth_max_deg,
                      double elev_min_deg, double elev_max_deg);

// Class frequencies over all non-ignored labels of the given label arrays.
ClassHistogram class_histogram(const std::vector<std::vector<int>>& label_sets,
                               const ClassDef& class_def);
// Convenience: reads every label file of a labeled manifest.
ClassHistogram class_histogram(const DatasetManifest& manifest);

}  // namespace lidarda
