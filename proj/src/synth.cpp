// SPDX-License-Identifier: Apache-2.0
#include "lidarda/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "lidarda/error.hpp"
#include "lidarda/rng.hpp"

namespace lidarda {

namespace fs = std::filesystem;

namespace {
constexpr double kDegToRad = M_PI / 180.0;
constexpr double kRayTMin = 0.05;  // ignore hits closer than 5 cm
}  // namespace

void SensorConfig::validate() const {
  if (beam_count < 1) throw ValidationError("sensor: beam_count must be >= 1");
  if (horizontal_steps < 1)
    throw ValidationError("sensor: horizontal_steps must be >= 1");
  if (!(min_elev_deg < max_elev_deg))
    throw ValidationError("sensor: vertical FOV is empty");
  if (!(max_range > 0.0)) throw ValidationError("sensor: max_range must be > 0");
  if (!(azimuth_start_deg < azimuth_end_deg))
    throw ValidationError("sensor: azimuth span is empty");
  if (range_noise_sigma < 0.0)
    throw ValidationError("sensor: range_noise_sigma must be >= 0");
}

SensorConfig sensor_preset(const std::string& name) {
  SensorConfig cfg;
  if (name == "hdl64") {
    // vehicle-mounted 64-beam source sensor
    cfg.beam_count = 64;
    cfg.min_elev_deg = -24.8;
    cfg.max_elev_deg = 2.0;
    cfg.mount_height = 1.73;
  } else if (name == "vlp16-low") {
    // 16-beam sensor on a low mobile robot
    cfg.beam_count = 16;
    cfg.min_elev_deg = -15.0;
    cfg.max_elev_deg = 15.0;
    cfg.mount_height = 0.5;
  } else if (name == "pandora40") {
    cfg.beam_count = 40;
    cfg.min_elev_deg = -16.0;
    cfg.max_elev_deg = 7.0;
    cfg.mount_height = 1.5;
  } else if (name == "hdl32-tilted") {
    // tilted rear-mounted 32-beam sensor, near-range returns only
    cfg.beam_count = 32;
    cfg.min_elev_deg = -30.67;
    cfg.max_elev_deg = 10.67;
    cfg.mount_height = 1.7;
    cfg.mount_tilt_deg = 30.0;
    cfg.max_range = 20.0;
  } else {
    throw ValidationError("unknown sensor preset: " + name);
  }
  return cfg;
}

void SceneSpec::validate() const {
  if (!(extent > 0.0)) throw ValidationError("scene: extent must be > 0");
  if (road_half_width < 0.0 || sidewalk_width < 0.0)
    throw ValidationError("scene: negative strip width");
  const int counts[] = {n_buildings, n_cars, n_poles, n_trees, n_persons, n_bushes};
  for (int c : counts)
    if (c < 0) throw ValidationError("scene: negative primitive count");
  const SizeRange ranges[] = {building_footprint, building_height, car_length,
                              car_height,        pole_radius,     pole_height,
                              trunk_radius,      trunk_height,    crown_radius,
                              person_radius,     person_height,   bush_radius};
  for (const auto& r : ranges)
    if (!(r.lo > 0.0) || r.hi < r.lo)
      throw ValidationError("scene: size range must satisfy 0 < lo <= hi");
}

ClassDef synth_class_def() {
  ClassDef def;
  def.names = {"road",  "sidewalk", "building",   "car",      "pole",
               "trunk", "person",   "vegetation", "unlabeled"};
  def.class_count = static_cast<int>(def.names.size());
  def.ignore_index = synth_class::kUnlabeled;
  return def;
}

std::optional<double> Primitive::raycast(const Eigen::Vector3d& o,
                                         const Eigen::Vector3d& d,
                                         double t_min) const {
  const double inf = std::numeric_limits<double>::infinity();
  switch (kind) {
    case Kind::rect: {
      if (d.z() == 0.0) return std::nullopt;
      const double t = (z0 - o.z()) / d.z();
      if (t < t_min) return std::nullopt;
      const double x = o.x() + t * d.x();
      const double y = o.y() + t * d.y();
      if (x < min.x() || x > max.x() || y < min.y() || y > max.y())
        return std::nullopt;
      return t;
    }
    case Kind::box: {
      double t_enter = -inf;
      double t_exit = inf;
      for (int axis = 0; axis < 3; ++axis) {
        const double oa = o[axis];
        const double da = d[axis];
        if (da == 0.0) {
          if (oa < min[axis] || oa > max[axis]) return std::nullopt;
          continue;
        }
        double t0 = (min[axis] - oa) / da;
        double t1 = (max[axis] - oa) / da;
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
      }
      if (t_enter > t_exit || t_exit < t_min) return std::nullopt;
      return t_enter >= t_min ? t_enter : t_exit;
    }
    case Kind::cylinder: {
      double best = inf;
      const double ox = o.x() - center.x();
      const double oy = o.y() - center.y();
      const double a = d.x() * d.x() + d.y() * d.y();
      if (a > 0.0) {
        const double b = 2.0 * (ox * d.x() + oy * d.y());
        const double c = ox * ox + oy * oy - radius * radius;
        const double disc = b * b - 4.0 * a * c;
        if (disc >= 0.0) {
          const double sq = std::sqrt(disc);
          for (const double t : {(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)}) {
            if (t < t_min || t >= best) continue;
            const double z = o.z() + t * d.z();
            if (z >= z0 && z <= z1) best = t;
          }
        }
      }
      if (d.z() != 0.0) {
        for (const double zc : {z0, z1}) {
          const double t = (zc - o.z()) / d.z();
          if (t < t_min || t >= best) continue;
          const double x = o.x() + t * d.x() - center.x();
          const double y = o.y() + t * d.y() - center.y();
          if (x * x + y * y <= radius * radius) best = t;
        }
      }
      if (best == inf) return std::nullopt;
      return best;
    }
    case Kind::sphere: {
      const Eigen::Vector3d oc = o - center;
      const double b = 2.0 * oc.dot(d);
      const double c = oc.squaredNorm() - radius * radius;
      const double disc = b * b - 4.0 * c;  // |d| == 1
      if (disc < 0.0) return std::nullopt;
      const double sq = std::sqrt(disc);
      const double t0 = (-b - sq) / 2.0;
      if (t0 >= t_min) return t0;
      const double t1 = (-b + sq) / 2.0;
      if (t1 >= t_min) return t1;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

double Primitive::surface_distance(const Eigen::Vector3d& p) const {
  switch (kind) {
    case Kind::rect: {
      const double dx = std::max({min.x() - p.x(), 0.0, p.x() - max.x()});
      const double dy = std::max({min.y() - p.y(), 0.0, p.y() - max.y()});
      const double dz = p.z() - z0;
      return std::sqrt(dx * dx + dy * dy + dz * dz);
    }
    case Kind::box: {
      double outside_sq = 0.0;
      bool inside = true;
      double inner = std::numeric_limits<double>::infinity();
      for (int axis = 0; axis < 3; ++axis) {
        const double lo = min[axis] - p[axis];
        const double hi = p[axis] - max[axis];
        const double out = std::max({lo, hi, 0.0});
        outside_sq += out * out;
        if (out > 0.0) inside = false;
        inner = std::min(inner, std::min(-lo, -hi));
      }
      return inside ? inner : std::sqrt(outside_sq);
    }
    case Kind::cylinder: {
      const double dr =
          std::hypot(p.x() - center.x(), p.y() - center.y()) - radius;
      const double dz = std::max(z0 - p.z(), p.z() - z1);
      const double out_r = std::max(dr, 0.0);
      const double out_z = std::max(dz, 0.0);
      if (out_r > 0.0 || out_z > 0.0) return std::hypot(out_r, out_z);
      return std::min(-dr, -dz);
    }
    case Kind::sphere:
      return std::abs((p - center).norm() - radius);
  }
  return 0.0;
}

namespace {

double sample_range(Rng& rng, const SizeRange& r) {
  return rng.uniform(r.lo, r.hi);
}

void add_box(Scene& scene, int label, double refl, const Eigen::Vector3d& lo,
             const Eigen::Vector3d& hi) {
  Primitive prim;
  prim.kind = Primitive::Kind::box;
  prim.label = label;
  prim.reflectance = refl;
  prim.min = lo;
  prim.max = hi;
  scene.primitives.push_back(prim);
}

void add_cylinder(Scene& scene, int label, double refl, double cx, double cy,
                  double r, double zlo, double zhi) {
  Primitive prim;
  prim.kind = Primitive::Kind::cylinder;
  prim.label = label;
  prim.reflectance = refl;
  prim.center = {cx, cy, 0.0};
  prim.radius = r;
  prim.z0 = zlo;
  prim.z1 = zhi;
  scene.primitives.push_back(prim);
}

void add_sphere(Scene& scene, int label, double refl, const Eigen::Vector3d& c,
                double r) {
  Primitive prim;
  prim.kind = Primitive::Kind::sphere;
  prim.label = label;
  prim.reflectance = refl;
  prim.center = c;
  prim.radius = r;
  scene.primitives.push_back(prim);
}

}  // namespace

Scene generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(mix_seed(spec.seed, {stream::kScene}));
  Scene scene;
  const double e = spec.extent;

  {
    // ground slab covering the whole extent
    Primitive ground;
    ground.kind = Primitive::Kind::rect;
    ground.label = synth_class::kRoad;
    ground.reflectance = 0.2;
    ground.min = {-e, -e, 0.0};
    ground.max = {e, e, 0.0};
    ground.z0 = 0.0;
    scene.primitives.push_back(ground);
  }
  if (spec.sidewalk_width > 0.0) {
    for (const double side : {1.0, -1.0}) {
      Primitive walk;
      walk.kind = Primitive::Kind::rect;
      walk.label = synth_class::kSidewalk;
      walk.reflectance = 0.4;
      const double y0 = side > 0 ? spec.road_half_width
                                 : -spec.road_half_width - spec.sidewalk_width;
      walk.min = {-e, y0, 0.0};
      walk.max = {e, y0 + spec.sidewalk_width, 0.0};
      walk.z0 = spec.sidewalk_height;
      walk.z1 = spec.sidewalk_height;
      scene.primitives.push_back(walk);
    }
  }

  const double outer_lo = spec.road_half_width + spec.sidewalk_width;
  for (int i = 0; i < spec.n_buildings; ++i) {
    const double fx = sample_range(rng, spec.building_footprint);
    const double fy = sample_range(rng, spec.building_footprint);
    const double h = sample_range(rng, spec.building_height);
    const double side = rng.uniform_index(2) == 0 ? 1.0 : -1.0;
    const double cx = rng.uniform(-e + fx / 2, e - fx / 2);
    const double ylo = outer_lo + 1.0;
    const double yhi = std::max(ylo + 0.5, e - fy);
    const double cy = side * (rng.uniform(ylo, yhi) + fy / 2);
    add_box(scene, synth_class::kBuilding, 0.5,
            {cx - fx / 2, cy - fy / 2, 0.0}, {cx + fx / 2, cy + fy / 2, h});
  }
  for (int i = 0; i < spec.n_cars; ++i) {
    const double l = sample_range(rng, spec.car_length);
    const double w = 0.42 * l;
    const double h = sample_range(rng, spec.car_height);
    const double cx = rng.uniform(-e + l / 2, e - l / 2);
    const double ymax = std::max(0.5, spec.road_half_width - w / 2 - 0.3);
    const double cy = rng.uniform(-ymax, ymax);
    add_box(scene, synth_class::kCar, 0.7, {cx - l / 2, cy - w / 2, 0.3},
            {cx + l / 2, cy + w / 2, h});
  }
  for (int i = 0; i < spec.n_poles; ++i) {
    const double r = sample_range(rng, spec.pole_radius);
    const double h = sample_range(rng, spec.pole_height);
    const double side = rng.uniform_index(2) == 0 ? 1.0 : -1.0;
    const double cx = rng.uniform(-e * 0.95, e * 0.95);
    const double cy = side * rng.uniform(spec.road_half_width + 0.3,
                                         std::max(spec.road_half_width + 0.4,
                                                  outer_lo - 0.3));
    add_cylinder(scene, synth_class::kPole, 0.6, cx, cy, r,
                 spec.sidewalk_height, spec.sidewalk_height + h);
  }
  for (int i = 0; i < spec.n_trees; ++i) {
    const double r = sample_range(rng, spec.trunk_radius);
    const double h = sample_range(rng, spec.trunk_height);
    const double cr = sample_range(rng, spec.crown_radius);
    const double side = rng.uniform_index(2) == 0 ? 1.0 : -1.0;
    const double cx = rng.uniform(-e * 0.95, e * 0.95);
    const double cy =
        side * rng.uniform(outer_lo + 0.5, std::max(outer_lo + 1.0, e * 0.8));
    add_cylinder(scene, synth_class::kTrunk, 0.45, cx, cy, r, 0.0, h);
    add_sphere(scene, synth_class::kVegetation, 0.55,
               {cx, cy, h + 0.6 * cr}, cr);
  }
  for (int i = 0; i < spec.n_persons; ++i) {
    const double r = sample_range(rng, spec.person_radius);
    const double h = sample_range(rng, spec.person_height);
    const double cx = rng.uniform(-e * 0.95, e * 0.95);
    const double cy = rng.uniform(-outer_lo, outer_lo);
    const double base = std::abs(cy) > spec.road_half_width ? spec.sidewalk_height : 0.0;
    add_cylinder(scene, synth_class::kPerson, 0.35, cx, cy, r, base, base + h);
  }
  for (int i = 0; i < spec.n_bushes; ++i) {
    const double r = sample_range(rng, spec.bush_radius);
    const double side = rng.uniform_index(2) == 0 ? 1.0 : -1.0;
    const double cx = rng.uniform(-e * 0.95, e * 0.95);
    const double cy =
        side * rng.uniform(outer_lo + 0.3, std::max(outer_lo + 0.8, e * 0.9));
    add_sphere(scene, synth_class::kVegetation, 0.55, {cx, cy, 0.8 * r}, r);
  }
  return scene;
}

Eigen::Matrix3d sensor_rotation(const SensorConfig& sensor, const SensorPose& pose) {
  return (Eigen::AngleAxisd(pose.yaw_deg * kDegToRad, Eigen::Vector3d::UnitZ()) *
          Eigen::AngleAxisd(sensor.mount_tilt_deg * kDegToRad, Eigen::Vector3d::UnitY()))
      .toRotationMatrix();
}

Eigen::Vector3d sensor_origin(const SensorConfig& sensor, const SensorPose& pose) {
  return {pose.x, pose.y, sensor.mount_height};
}

LabeledCloud scan(const Scene& scene, const SensorConfig& sensor,
                  const SensorPose& pose, std::uint64_t noise_seed) {
  sensor.validate();
  const Eigen::Matrix3d rot = sensor_rotation(sensor, pose);
  const Eigen::Vector3d origin = sensor_origin(sensor, pose);
  const int b_count = sensor.beam_count;
  const int h_count = sensor.horizontal_steps;
  const double az_start = sensor.azimuth_start_deg * kDegToRad;
  const double az_step =
      (sensor.azimuth_end_deg - sensor.azimuth_start_deg) * kDegToRad / h_count;

  Rng noise_rng(noise_seed);
  LabeledCloud cloud;
  cloud.points.reserve(static_cast<std::size_t>(b_count) * h_count);

  for (int b = 0; b < b_count; ++b) {
    const double elev =
        b_count == 1
            ? 0.5 * (sensor.min_elev_deg + sensor.max_elev_deg) * kDegToRad
            : (sensor.min_elev_deg + b * (sensor.max_elev_deg - sensor.min_elev_deg) /
                                         (b_count - 1)) *
                  kDegToRad;
    const double ce = std::cos(elev);
    const double se = std::sin(elev);
    for (int j = 0; j < h_count; ++j) {
      const double az = az_start + j * az_step;
      const Eigen::Vector3d dir_sensor{ce * std::cos(az), ce * std::sin(az), se};
      const Eigen::Vector3d dir_world = rot * dir_sensor;

      double best_t = std::numeric_limits<double>::infinity();
      int best_idx = -1;
      for (std::size_t p = 0; p < scene.primitives.size(); ++p) {
        const auto t = scene.primitives[p].raycast(origin, dir_world, kRayTMin);
        if (t && *t < best_t) {
          best_t = *t;
          best_idx = static_cast<int>(p);
        }
      }
      if (best_idx < 0 || best_t > sensor.max_range) continue;
      double range = best_t;
      if (sensor.range_noise_sigma > 0.0)
        range = std::max(kRayTMin, noise_rng.normal(range, sensor.range_noise_sigma));
      // hit = origin + range * dir_world, so the sensor-relative point is
      // exactly range * dir_sensor
      cloud.points.push_back(range * dir_sensor);
      cloud.reflectance.push_back(scene.primitives[best_idx].reflectance);
      cloud.beam.push_back(b);
      cloud.labels.push_back(scene.primitives[best_idx].label);
    }
  }
  return cloud;
}

std::size_t nearest_primitive(const Scene& scene, const Eigen::Vector3d& p_world) {
  if (scene.primitives.empty())
    throw ValidationError("nearest_primitive: empty scene");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < scene.primitives.size(); ++i) {
    const double d = scene.primitives[i].surface_distance(p_world);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return best;
}

namespace {

// The sensor should not start inside scene geometry; keep a clearance in XY
// from every non-ground primitive.
bool pose_clear(const Scene& scene, double x, double y, double clearance) {
  for (const auto& prim : scene.primitives) {
    if (prim.kind == Primitive::Kind::rect) continue;
    double d = 0.0;
    if (prim.kind == Primitive::Kind::box) {
      const double dx = std::max({prim.min.x() - x, 0.0, x - prim.max.x()});
      const double dy = std::max({prim.min.y() - y, 0.0, y - prim.max.y()});
      d = std::hypot(dx, dy);
    } else {
      d = std::hypot(x - prim.center.x(), y - prim.center.y()) - prim.radius;
    }
    if (d < clearance) return false;
  }
  return true;
}

void write_dataset(const fs::path& dir, const std::vector<LabeledCloud>& clouds,
                   bool labels_in_manifest) {
  fs::create_directories(dir / "scans");
  fs::create_directories(dir / "labels");
  std::vector<fs::path> scan_rel;
  std::vector<fs::path> label_rel;
  char name[32];
  for (std::size_t i = 0; i < clouds.size(); ++i) {
    std::snprintf(name, sizeof(name), "%06zu", i);
    const fs::path scan_rel_path = fs::path("scans") / (std::string(name) + ".bin");
    const fs::path label_rel_path = fs::path("labels") / (std::string(name) + ".label");
    write_scan_bin(clouds[i], dir / scan_rel_path);
    write_labels(clouds[i], dir / label_rel_path);
    scan_rel.push_back(scan_rel_path);
    label_rel.push_back(label_rel_path);
  }
  write_manifest_lines(scan_rel, dir / "scans.txt");
  write_manifest_lines(label_rel,
                       dir / (labels_in_manifest ? "labels.txt" : "labels_eval.txt"));
  write_class_def(synth_class_def(), dir / "classes.txt");
}

}  // namespace

DomainPairResult domain_pair(const SceneSpec& spec, const SensorConfig& src,
                             const SensorConfig& tgt, int n_scans,
                             const fs::path& out_dir) {
  if (n_scans < 1) throw ValidationError("domain_pair: n_scans must be >= 1");
  spec.validate();
  src.validate();
  tgt.validate();

  std::vector<LabeledCloud> src_clouds;
  std::vector<LabeledCloud> tgt_clouds;
  for (int s = 0; s < n_scans; ++s) {
    SceneSpec scene_spec = spec;
    scene_spec.seed = spec.seed + static_cast<std::uint64_t>(s);
    const Scene scene = generate_scene(scene_spec);

    Rng pose_rng(mix_seed(spec.seed, {stream::kPose, static_cast<std::uint64_t>(s)}));
    SensorPose pose;
    for (int attempt = 0; attempt < 100; ++attempt) {
      pose.x = pose_rng.uniform(-spec.extent / 2, spec.extent / 2);
      const double ymax = std::max(0.5, spec.road_half_width - 1.0);
      pose.y = pose_rng.uniform(-ymax, ymax);
      pose.yaw_deg = pose_rng.uniform(0.0, 360.0);
      if (pose_clear(scene, pose.x, pose.y, 0.8)) break;
    }

    const std::uint64_t s_u = static_cast<std::uint64_t>(s);
    src_clouds.push_back(scan(scene, src, pose, mix_seed(spec.seed, {stream::kNoise, s_u, 0})));
    tgt_clouds.push_back(scan(scene, tgt, pose, mix_seed(spec.seed, {stream::kNoise, s_u, 1})));
  }

  DomainPairResult result;
  result.source_dir = out_dir / "source";
  result.target_dir = out_dir / "target";
  result.n_scans = n_scans;
  write_dataset(result.source_dir, src_clouds, true);
  write_dataset(result.target_dir, tgt_clouds, false);
  return result;
}

}  // namespace lidarda
