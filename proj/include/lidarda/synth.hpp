// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lidarda/cloud.hpp"

namespace lidarda {

// Virtual scanner geometry. Angles in degrees, lengths in meters.
struct SensorConfig {
  int beam_count = 64;
  double min_elev_deg = -24.8;
  double max_elev_deg = 2.0;
  int horizontal_steps = 1024;
  double mount_height = 1.73;
  double mount_tilt_deg = 0.0;  // rotation-axis tilt from vertical, about +Y
  double max_range = 80.0;
  double azimuth_start_deg = -180.0;
  double azimuth_end_deg = 180.0;
  double range_noise_sigma = 0.0;  // optional Gaussian range noise

  void validate() const;
};

// Named presets loosely modeled on common sensor set-ups.
// "hdl64" (default source), "vlp16-low", "pandora40", "hdl32-tilted".
SensorConfig sensor_preset(const std::string& name);

struct SizeRange {
  double lo = 0.0;
  double hi = 0.0;
};

// Synthetic urban scene recipe. The ground plane is always present (a road
// slab covering the whole extent, flanked by raised sidewalk strips).
struct SceneSpec {
  std::uint64_t seed = 0;
  double extent = 30.0;  // square scene half-width
  double road_half_width = 4.0;
  double sidewalk_width = 3.0;
  double sidewalk_height = 0.15;
  int n_buildings = 10;
  int n_cars = 8;
  int n_poles = 10;
  int n_trees = 8;
  int n_persons = 6;
  int n_bushes = 6;
  SizeRange building_footprint{4.0, 10.0};
  SizeRange building_height{4.0, 10.0};
  SizeRange car_length{3.5, 4.8};
  SizeRange car_height{1.4, 1.7};
  SizeRange pole_radius{0.05, 0.15};
  SizeRange pole_height{3.0, 6.0};
  SizeRange trunk_radius{0.15, 0.4};
  SizeRange trunk_height{2.0, 4.0};
  SizeRange crown_radius{1.0, 2.5};
  SizeRange person_radius{0.25, 0.35};
  SizeRange person_height{1.6, 1.9};
  SizeRange bush_radius{0.5, 1.2};

  void validate() const;
};

// Default class set written by the synthesizer. "unlabeled" is last and is
// the ignore class.
ClassDef synth_class_def();
namespace synth_class {
inline constexpr int kRoad = 0;
inline constexpr int kSidewalk = 1;
inline constexpr int kBuilding = 2;
inline constexpr int kCar = 3;
inline constexpr int kPole = 4;
inline constexpr int kTrunk = 5;
inline constexpr int kPerson = 6;
inline constexpr int kVegetation = 7;
inline constexpr int kUnlabeled = 8;
}  // namespace synth_class

// Labeled geometric primitives with closed-form ray intersections.
struct Primitive {
  enum class Kind { rect, box, cylinder, sphere };
  Kind kind = Kind::rect;
  int label = 0;
  double reflectance = 0.5;
  // rect: horizontal rectangle at height z0, [min.x,max.x] x [min.y,max.y]
  // box: axis-aligned box [min, max]
  // cylinder: vertical axis through (center.x, center.y), z in [z0, z1]
  // sphere: center, radius
  Eigen::Vector3d min = Eigen::Vector3d::Zero();
  Eigen::Vector3d max = Eigen::Vector3d::Zero();
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  double radius = 0.0;
  double z0 = 0.0;
  double z1 = 0.0;

  // Smallest t >= t_min with origin + t*dir on the surface, if any.
  std::optional<double> raycast(const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& dir, double t_min) const;
  // Unsigned distance from p to the primitive's surface.
  double surface_distance(const Eigen::Vector3d& p) const;
};

struct Scene {
  std::vector<Primitive> primitives;
};

// Sensor placement in the world: planar position, yaw, and the tilt/height
// taken from the SensorConfig.
struct SensorPose {
  double x = 0.0;
  double y = 0.0;
  double yaw_deg = 0.0;
};

Scene generate_scene(const SceneSpec& spec);

// World-frame mount rotation/origin for a pose (used by scan and by tests
// that map sensor-relative points back to the world).
Eigen::Matrix3d sensor_rotation(const SensorConfig& sensor, const SensorPose& pose);
Eigen::Vector3d sensor_origin(const SensorConfig& sensor, const SensorPose& pose);

// Casts one ray per (beam, azimuth step). Beam elevations are uniformly
// spaced over the vertical FOV; hits come back in sensor-relative
// coordinates carrying the primitive's label and the beam index.
LabeledCloud scan(const Scene& scene, const SensorConfig& sensor,
                  const SensorPose& pose = {}, std::uint64_t noise_seed = 0);

// Nearest primitive index by surface distance, for label/geometry checks.
std::size_t nearest_primitive(const Scene& scene, const Eigen::Vector3d& p_world);

struct DomainPairResult {
  std::filesystem::path source_dir;
  std::filesystem::path target_dir;
  int n_scans = 0;
};

// Generates n_scans scenes (seed offsets), scans each with both sensors from
// a shared randomized pose, and writes two dataset directories. The target
// manifest omits labels; held-out target labels go to labels_eval.txt.
DomainPairResult domain_pair(const SceneSpec& spec, const SensorConfig& src,
                             const SensorConfig& tgt, int n_scans,
                             const std::filesystem::path& out_dir);

}  // namespace lidarda
