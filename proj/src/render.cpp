// SPDX-License-Identifier: Apache-2.0
#include "lidarda/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "lidarda/error.hpp"

namespace lidarda {

void write_pgm(const GrayImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P5\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

void write_ppm(const RgbImage& image, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.pixels.data()),
            static_cast<std::streamsize>(image.pixels.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

std::array<std::uint8_t, 3> class_color(int class_id) {
  static constexpr std::array<std::array<std::uint8_t, 3>, 16> palette = {{
      {128, 64, 128},   // road: purple-gray
      {244, 35, 232},   // sidewalk: magenta
      {70, 70, 70},     // building: dark gray
      {0, 0, 142},      // car: blue
      {153, 153, 153},  // pole: light gray
      {102, 51, 0},     // trunk: brown
      {220, 20, 60},    // person: crimson
      {107, 142, 35},   // vegetation: olive
      {0, 0, 0},        // unlabeled: black
      {255, 200, 0},
      {0, 200, 255},
      {200, 255, 0},
      {255, 0, 100},
      {100, 0, 255},
      {0, 255, 150},
      {255, 255, 255},
  }};
  if (class_id < 0) return {0, 0, 0};
  return palette[static_cast<std::size_t>(class_id) % palette.size()];
}

namespace {

struct CellIndex {
  std::vector<int> point_of_cell;  // -1: empty
  int rows = 0;
  int width = 0;
};

int row_count(const LabeledCloud& cloud, const RenderConfig& cfg) {
  if (cfg.rows > 0) return cfg.rows;
  int max_beam = -1;
  for (int b : cloud.beam) max_beam = std::max(max_beam, b);
  return max_beam >= 0 ? max_beam + 1 : 64;
}

// Nearest point per (row, column) cell; ties keep the earliest point.
CellIndex project(const LabeledCloud& cloud, const RenderConfig& cfg) {
  if (cfg.width < 1) throw ValidationError("render: width must be >= 1");
  if (!(cfg.max_range > 0.0)) throw ValidationError("render: max_range must be > 0");
  CellIndex cells;
  cells.rows = row_count(cloud, cfg);
  cells.width = cfg.width;
  cells.point_of_cell.assign(static_cast<std::size_t>(cells.rows) * cells.width, -1);
  std::vector<double> depth(cells.point_of_cell.size(),
                            std::numeric_limits<double>::infinity());

  const double lo = cfg.min_elev_deg * M_PI / 180.0;
  const double hi = cfg.max_elev_deg * M_PI / 180.0;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Eigen::Vector3d& p = cloud.points[i];
    const double range = p.norm();
    const double az = std::atan2(p.y(), p.x());
    int col = static_cast<int>(std::floor((0.5 - az / (2.0 * M_PI)) * cfg.width));
    col = std::clamp(col, 0, cfg.width - 1);

    int row_src;
    if (cloud.beam[i] >= 0) {
      row_src = cloud.beam[i];
    } else {
      const double elev = range == 0.0 ? 0.0 : std::asin(p.z() / range);
      row_src = static_cast<int>(std::floor((elev - lo) / (hi - lo) * cells.rows));
    }
    row_src = std::clamp(row_src, 0, cells.rows - 1);
    const int row = cells.rows - 1 - row_src;  // highest beam on top

    const std::size_t cell = static_cast<std::size_t>(row) * cfg.width + col;
    if (range < depth[cell]) {
      depth[cell] = range;
      cells.point_of_cell[cell] = static_cast<int>(i);
    }
  }
  return cells;
}

}  // namespace

GrayImage render_range_image(const LabeledCloud& cloud, const RenderConfig& cfg) {
  const CellIndex cells = project(cloud, cfg);
  GrayImage image;
  image.width = cells.width;
  image.height = cells.rows;
  image.pixels.assign(cells.point_of_cell.size(), 0);
  for (std::size_t c = 0; c < cells.point_of_cell.size(); ++c) {
    const int i = cells.point_of_cell[c];
    if (i < 0) continue;
    const double range = std::min(cloud.points[i].norm(), cfg.max_range);
    image.pixels[c] =
        static_cast<std::uint8_t>(std::lround(255.0 * range / cfg.max_range));
  }
  return image;
}

RgbImage render_label_image(const LabeledCloud& cloud, const RenderConfig& cfg) {
  const CellIndex cells = project(cloud, cfg);
  RgbImage image;
  image.width = cells.width;
  image.height = cells.rows;
  image.pixels.assign(cells.point_of_cell.size() * 3, 0);
  for (std::size_t c = 0; c < cells.point_of_cell.size(); ++c) {
    const int i = cells.point_of_cell[c];
    if (i < 0) continue;
    const auto color =
        class_color(cloud.has_labels() ? cloud.labels[i] : -1);
    image.pixels[3 * c] = color[0];
    image.pixels[3 * c + 1] = color[1];
    image.pixels[3 * c + 2] = color[2];
  }
  return image;
}

}  // namespace lidarda
