// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "lidarda/cloud.hpp"

namespace lidarda {

struct RenderConfig {
  int width = 512;
  int rows = 0;          // 0: use max stored beam index + 1
  double max_range = 80.0;
  double min_elev_deg = -25.0;  // elevation binning when beams are missing
  double max_elev_deg = 15.0;
};

// 8-bit grayscale / RGB rasters written as binary PGM (P5) / PPM (P6).
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major RGB triplets
};

void write_pgm(const GrayImage& image, const std::filesystem::path& path);
void write_ppm(const RgbImage& image, const std::filesystem::path& path);

// Fixed per-class palette (class id modulo table size).
std::array<std::uint8_t, 3> class_color(int class_id);

// Spherical projection: azimuth bin = column (azimuth 0 at the center
// column), beam = row (highest beam on top). Nearest point wins per cell;
// empty cells are black. Range maps linearly onto [0, 255] clamped at
// max_range.
GrayImage render_range_image(const LabeledCloud& cloud, const RenderConfig& cfg);
RgbImage render_label_image(const LabeledCloud& cloud, const RenderConfig& cfg);

}  // namespace lidarda
