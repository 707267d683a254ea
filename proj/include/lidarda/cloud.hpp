// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lidarda {

// One LiDAR scan in sensor-relative coordinates. Parallel arrays of length N.
// Labels may be empty (unlabeled target data); beam is -1 where unknown.
// Immutable by convention after construction: transforms return new clouds.
struct LabeledCloud {
  std::vector<Eigen::Vector3d> points;
  std::vector<double> reflectance;
  std::vector<int> beam;
  std::vector<int> labels;

  std::size_t size() const { return points.size(); }
  bool has_labels() const { return !labels.empty(); }

  // Checks parallel-array lengths, finiteness and label/beam ranges.
  // class_count < 0 skips the label upper-bound check.
  void validate(int class_count = -1) const;
};

struct ClassDef {
  int class_count = 0;
  std::vector<std::string> names;
  int ignore_index = -1;  // -1: no ignore class

  void validate() const;
  bool is_ignored(int label) const { return label == ignore_index; }
};

enum class DatasetRole { source, target };

struct DatasetManifest {
  DatasetRole role = DatasetRole::source;
  std::vector<std::filesystem::path> scan_paths;
  std::vector<std::filesystem::path> label_paths;  // empty when unlabeled
  ClassDef class_def;

  bool labeled() const { return !label_paths.empty(); }
  void validate() const;
};

// KITTI-style scan file: packed little-endian float32 quadruplets
// (x, y, z, reflectance), 16 bytes per point.
LabeledCloud read_scan_bin(const std::filesystem::path& path);
void write_scan_bin(const LabeledCloud& cloud, const std::filesystem::path& path);

// KITTI-style label file: packed little-endian uint32, one per point, the
// semantic class in bits 0-15. Raw ids missing from class_map become
// ignore_index.
std::vector<int> read_labels(const std::filesystem::path& path,
                             const std::map<std::uint32_t, int>& class_map,
                             int ignore_index);
// Identity mapping: raw id < class_count passes through, else ignore_index.
std::vector<int> read_labels(const std::filesystem::path& path,
                             const ClassDef& class_def);
void write_labels(const LabeledCloud& cloud, const std::filesystem::path& path);

// classes.txt: one display name per line. By toolkit convention the last
// class is the ignore class (the synthesizer always appends "unlabeled").
ClassDef read_class_def(const std::filesystem::path& path);
void write_class_def(const ClassDef& class_def, const std::filesystem::path& path);

// Manifest text files: one path per line, relative to the manifest's
// directory; a labels manifest is parallel by line number.
std::vector<std::filesystem::path> read_manifest_lines(
    const std::filesystem::path& manifest_path);
void write_manifest_lines(const std::vector<std::filesystem::path>& relative_paths,
                          const std::filesystem::path& manifest_path);

// Loads a dataset directory (scans.txt, classes.txt, optional labels
// manifest). labels_manifest may name a file that does not exist, in which
// case the dataset is loaded unlabeled.
DatasetManifest load_dataset(const std::filesystem::path& dir, DatasetRole role,
                             const std::string& labels_manifest = "labels.txt");

}  // namespace lidarda
