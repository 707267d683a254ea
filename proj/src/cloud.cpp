// SPDX-License-Identifier: Apache-2.0
#include "lidarda/cloud.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include "lidarda/error.hpp"

namespace lidarda {

namespace fs = std::filesystem;

void LabeledCloud::validate(int class_count) const {
  const std::size_t n = points.size();
  if (reflectance.size() != n)
    throw ValidationError("cloud: reflectance length " +
                          std::to_string(reflectance.size()) +
                          " does not match point count " + std::to_string(n));
  if (beam.size() != n)
    throw ValidationError("cloud: beam length " + std::to_string(beam.size()) +
                          " does not match point count " + std::to_string(n));
  if (!labels.empty() && labels.size() != n)
    throw ValidationError("cloud: label length " + std::to_string(labels.size()) +
                          " does not match point count " + std::to_string(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (!points[i].allFinite() || !std::isfinite(reflectance[i]))
      throw ValidationError("cloud: non-finite value at point " + std::to_string(i));
    if (beam[i] < -1)
      throw ValidationError("cloud: invalid beam index at point " + std::to_string(i));
  }
  if (class_count >= 0) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0 || labels[i] >= class_count)
        throw ValidationError("cloud: label " + std::to_string(labels[i]) +
                              " out of range at point " + std::to_string(i));
    }
  }
}

void ClassDef::validate() const {
  if (class_count < 2)
    throw ValidationError("class_def: class_count must be >= 2");
  if (static_cast<int>(names.size()) != class_count)
    throw ValidationError("class_def: expected " + std::to_string(class_count) +
                          " names, got " + std::to_string(names.size()));
  if (ignore_index >= class_count)
    throw ValidationError("class_def: ignore_index out of range");
}

void DatasetManifest::validate() const {
  if (!label_paths.empty() && label_paths.size() != scan_paths.size())
    throw ValidationError("manifest: label list length does not match scan list");
  std::set<fs::path> seen(scan_paths.begin(), scan_paths.end());
  if (seen.size() != scan_paths.size())
    throw ValidationError("manifest: duplicate scan paths");
  class_def.validate();
}

namespace {

std::vector<char> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff len = in.tellg();
  in.seekg(0, std::ios::beg);
  std::vector<char> bytes(static_cast<std::size_t>(len));
  if (len > 0 && !in.read(bytes.data(), len))
    throw IoError("read failed on " + path.string());
  return bytes;
}

float load_f32_le(const char* p) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i)
    u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  float f;
  std::memcpy(&f, &u, 4);
  return f;
}

void store_f32_le(float f, char* p) {
  std::uint32_t u;
  std::memcpy(&u, &f, 4);
  for (int i = 0; i < 4; ++i) p[i] = static_cast<char>((u >> (8 * i)) & 0xff);
}

std::uint32_t load_u32_le(const char* p) {
  std::uint32_t u = 0;
  for (int i = 0; i < 4; ++i)
    u |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return u;
}

}  // namespace

LabeledCloud read_scan_bin(const fs::path& path) {
  const std::vector<char> bytes = read_file_bytes(path);
  if (bytes.size() % 16 != 0)
    throw FormatError(path.string() + ": truncated scan file at offset " +
                      std::to_string(bytes.size() - bytes.size() % 16));
  const std::size_t n = bytes.size() / 16;
  LabeledCloud cloud;
  cloud.points.resize(n);
  cloud.reflectance.resize(n);
  cloud.beam.assign(n, -1);
  for (std::size_t i = 0; i < n; ++i) {
    const char* rec = bytes.data() + 16 * i;
    const double x = load_f32_le(rec);
    const double y = load_f32_le(rec + 4);
    const double z = load_f32_le(rec + 8);
    const double r = load_f32_le(rec + 12);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) ||
        !std::isfinite(r))
      throw ValidationError(path.string() + ": non-finite value at point " +
                            std::to_string(i));
    cloud.points[i] = {x, y, z};
    cloud.reflectance[i] = r;
  }
  return cloud;
}

void write_scan_bin(const LabeledCloud& cloud, const fs::path& path) {
  cloud.validate();
  std::vector<char> bytes(cloud.size() * 16);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    char* rec = bytes.data() + 16 * i;
    store_f32_le(static_cast<float>(cloud.points[i].x()), rec);
    store_f32_le(static_cast<float>(cloud.points[i].y()), rec + 4);
    store_f32_le(static_cast<float>(cloud.points[i].z()), rec + 8);
    store_f32_le(static_cast<float>(cloud.reflectance[i]), rec + 12);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (!bytes.empty()) out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<int> read_labels(const fs::path& path,
                             const std::map<std::uint32_t, int>& class_map,
                             int ignore_index) {
  const std::vector<char> bytes = read_file_bytes(path);
  if (bytes.size() % 4 != 0)
    throw FormatError(path.string() + ": truncated label file at offset " +
                      std::to_string(bytes.size() - bytes.size() % 4));
  const std::size_t n = bytes.size() / 4;
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Semantic class lives in the lower 16 bits; upper bits carry instance id.
    const std::uint32_t raw = load_u32_le(bytes.data() + 4 * i) & 0xffffu;
    auto it = class_map.find(raw);
    labels[i] = it == class_map.end() ? ignore_index : it->second;
  }
  return labels;
}

std::vector<int> read_labels(const fs::path& path, const ClassDef& class_def) {
  std::map<std::uint32_t, int> identity;
  for (int c = 0; c < class_def.class_count; ++c)
    identity[static_cast<std::uint32_t>(c)] = c;
  return read_labels(path, identity, class_def.ignore_index);
}

void write_labels(const LabeledCloud& cloud, const fs::path& path) {
  cloud.validate();
  if (cloud.size() > 0 && !cloud.has_labels())
    throw ValidationError("write_labels: cloud has no labels");
  std::vector<char> bytes(cloud.size() * 4);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const std::uint32_t raw = static_cast<std::uint32_t>(cloud.labels[i]) & 0xffffu;
    char* rec = bytes.data() + 4 * i;
    for (int b = 0; b < 4; ++b) rec[b] = static_cast<char>((raw >> (8 * b)) & 0xff);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  if (!bytes.empty()) out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

ClassDef read_class_def(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  ClassDef def;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    def.names.push_back(line);
  }
  def.class_count = static_cast<int>(def.names.size());
  def.ignore_index = def.class_count - 1;
  def.validate();
  return def;
}

void write_class_def(const ClassDef& class_def, const fs::path& path) {
  class_def.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (const auto& name : class_def.names) out << name << "\n";
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<fs::path> read_manifest_lines(const fs::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  std::vector<fs::path> paths;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    paths.emplace_back(line);
  }
  return paths;
}

void write_manifest_lines(const std::vector<fs::path>& relative_paths,
                          const fs::path& manifest_path) {
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + manifest_path.string() + " for writing");
  for (const auto& p : relative_paths) out << p.generic_string() << "\n";
  if (!out) throw IoError("write failed on " + manifest_path.string());
}

DatasetManifest load_dataset(const fs::path& dir, DatasetRole role,
                             const std::string& labels_manifest) {
  DatasetManifest manifest;
  manifest.role = role;
  manifest.class_def = read_class_def(dir / "classes.txt");
  for (const auto& rel : read_manifest_lines(dir / "scans.txt"))
    manifest.scan_paths.push_back(dir / rel);
  const fs::path labels_path = dir / labels_manifest;
  if (fs::exists(labels_path)) {
    for (const auto& rel : read_manifest_lines(labels_path))
      manifest.label_paths.push_back(dir / rel);
  }
  manifest.validate();
  return manifest;
}

}  // namespace lidarda
