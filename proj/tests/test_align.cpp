// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <map>

#include "doctest.h"
#include "lidarda/align.hpp"
#include "lidarda/error.hpp"
#include "test_util.hpp"

using namespace lidarda;

namespace {

double max_pairwise_distance_change(const LabeledCloud& a, const LabeledCloud& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double da = (a.points[i] - a.points[j]).norm();
      const double db = (b.points[i] - b.points[j]).norm();
      worst = std::max(worst, std::abs(da - db));
    }
  return worst;
}

LabeledCloud ground_scan_with_beams(int beams) {
  SceneSpec spec;
  spec.n_buildings = spec.n_cars = spec.n_poles = 0;
  spec.n_trees = spec.n_persons = spec.n_bushes = 0;
  spec.sidewalk_width = 0.0;
  SensorConfig sensor;
  sensor.beam_count = beams;
  sensor.min_elev_deg = -80.0;
  sensor.max_elev_deg = -30.0;
  sensor.horizontal_steps = 60;
  sensor.mount_height = 1.73;
  return scan(generate_scene(spec), sensor);
}

}  // namespace

TEST_CASE("xyz_shift with zero ranges is the identity") {
  const LabeledCloud cloud = testutil::random_cloud(1, 40, 4);
  AugmentConfig cfg;
  cfg.global_shift_xy = 0.0;
  cfg.global_shift_z = 0.0;
  Rng rng(5);
  const LabeledCloud out = xyz_shift(cloud, cfg, rng);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(out.points[i] == cloud.points[i]);
}

TEST_CASE("translate adds the shift and keeps labels") {
  LabeledCloud cloud;
  cloud.points = {{0.0, 0.0, 0.0}};
  cloud.reflectance = {0.3};
  cloud.beam = {-1};
  cloud.labels = {2};
  const LabeledCloud out = translate(cloud, {1.0, 2.0, 0.5});
  CHECK(out.points[0] == Eigen::Vector3d(1.0, 2.0, 0.5));
  CHECK(out.labels[0] == 2);
  CHECK(out.reflectance[0] == 0.3);
}

TEST_CASE("xyz_shift preserves pairwise distances") {
  AugmentConfig cfg;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabeledCloud cloud = testutil::random_cloud(seed, 60, 4);
    Rng rng(seed);
    const LabeledCloud out = xyz_shift(cloud, cfg, rng);
    REQUIRE(out.size() == cloud.size());
    CHECK(max_pairwise_distance_change(cloud, out) <= 1e-9);
    CHECK(out.labels == cloud.labels);
  }
}

TEST_CASE("per_class_shift on a single class equals xyz_shift by that vector") {
  const LabeledCloud cloud = testutil::random_cloud(2, 30, 1);
  const Eigen::Vector3d v{0.7, -1.1, 0.4};
  const LabeledCloud direct = translate(cloud, v);
  const LabeledCloud via_map = per_class_translate(cloud, {{0, v}});
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(via_map.points[i] == direct.points[i]);
}

TEST_CASE("per_class_shift preserves within-class distances, moves classes apart") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabeledCloud cloud = testutil::random_cloud(seed, 50, 2);
    AugmentConfig cfg;
    Rng rng(seed + 100);
    const LabeledCloud out = per_class_shift(cloud, cfg, rng);
    REQUIRE(out.size() == cloud.size());
    CHECK(out.labels == cloud.labels);

    double worst_within = 0.0;
    double max_cross_change = 0.0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
      for (std::size_t j = i + 1; j < cloud.size(); ++j) {
        const double da = (cloud.points[i] - cloud.points[j]).norm();
        const double db = (out.points[i] - out.points[j]).norm();
        if (cloud.labels[i] == cloud.labels[j])
          worst_within = std::max(worst_within, std::abs(da - db));
        else
          max_cross_change = std::max(max_cross_change, std::abs(da - db));
      }
    CHECK(worst_within <= 1e-9);
    CHECK(max_cross_change > 1e-3);  // two independent draws almost surely differ
  }
}

TEST_CASE("per_class_shift leaves ignore-class points unshifted") {
  LabeledCloud cloud = testutil::random_cloud(4, 30, 3);
  AugmentConfig cfg;
  Rng rng(9);
  const LabeledCloud out = per_class_shift(cloud, cfg, rng, 2);
  bool saw_ignored = false;
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    if (cloud.labels[i] == 2) {
      CHECK(out.points[i] == cloud.points[i]);
      saw_ignored = true;
    }
  }
  CHECK(saw_ignored);
}

TEST_CASE("per_class_shift requires labels; zero ranges are the identity") {
  LabeledCloud unlabeled = testutil::random_cloud(5, 10);
  AugmentConfig cfg;
  Rng rng(1);
  CHECK_THROWS_AS(per_class_shift(unlabeled, cfg, rng), ValidationError);

  const LabeledCloud cloud = testutil::random_cloud(6, 10, 3);
  AugmentConfig zero;
  zero.per_class_shift_xy = 0.0;
  zero.per_class_shift_z = 0.0;
  Rng rng2(1);
  const LabeledCloud out = per_class_shift(cloud, zero, rng2);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(out.points[i] == cloud.points[i]);
}

TEST_CASE("beam_keep_set follows the even-spacing rounding rule") {
  // round(i * 63 / 15) for i = 0..15, worked out by hand
  const std::vector<int> expected{0,  4,  8,  13, 17, 21, 25, 29,
                                  34, 38, 42, 46, 50, 55, 59, 63};
  CHECK(beam_keep_set(64, 16) == expected);
  CHECK(beam_keep_set(64, 1) == std::vector<int>{0});
  CHECK(beam_keep_set(64, 64).size() == 64);
  CHECK_THROWS_AS(beam_keep_set(16, 64), ValidationError);

  const std::vector<int> strided = beam_keep_set(64, 16, BeamSelection::stride);
  REQUIRE(strided.size() == 16);
  for (int i = 0; i < 16; ++i) CHECK(strided[i] == 4 * i);
}

TEST_CASE("match_beams keeps exactly the selected beams and renumbers") {
  const LabeledCloud scan64 = ground_scan_with_beams(64);
  REQUIRE(scan64.size() == 64u * 60u);

  const LabeledCloud identity = match_beams(scan64, 64, 64);
  CHECK(identity.size() == scan64.size());

  const LabeledCloud reduced = match_beams(scan64, 64, 16);
  CHECK(reduced.size() == scan64.size() / 4);
  const auto max_beam = *std::max_element(reduced.beam.begin(), reduced.beam.end());
  const auto min_beam = *std::min_element(reduced.beam.begin(), reduced.beam.end());
  CHECK(min_beam == 0);
  CHECK(max_beam == 15);

  // idempotent after renumbering
  const LabeledCloud twice = match_beams(reduced, 16, 16);
  CHECK(twice.size() == reduced.size());
  for (std::size_t i = 0; i < reduced.size(); ++i)
    CHECK(twice.points[i] == reduced.points[i]);

  // the reduced cloud is a subsequence of the input
  std::size_t cursor = 0;
  for (std::size_t i = 0; i < scan64.size() && cursor < reduced.size(); ++i)
    if (scan64.points[i] == reduced.points[cursor]) ++cursor;
  CHECK(cursor == reduced.size());
}

TEST_CASE("match_beams rejects missing beam indices") {
  LabeledCloud cloud = testutil::random_cloud(7, 5);
  CHECK_THROWS_AS(match_beams(cloud, 64, 16), ValidationError);
}

TEST_CASE("infer_beams recovers the synthesizer's beam indices") {
  SceneSpec spec;
  spec.seed = 21;
  const Scene scene = generate_scene(spec);
  SensorConfig sensor = sensor_preset("hdl64");
  sensor.horizontal_steps = 128;
  const LabeledCloud cloud = scan(scene, sensor, {1.0, 0.0, 45.0});
  REQUIRE(cloud.size() > 1000);
  const LabeledCloud inferred = infer_beams(cloud, sensor);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    CHECK(inferred.beam[i] == cloud.beam[i]);
}

TEST_CASE("infer_beams bin edges and degenerate cases") {
  SensorConfig sensor;
  sensor.beam_count = 4;
  sensor.min_elev_deg = -10.0;
  sensor.max_elev_deg = 10.0;

  LabeledCloud cloud;
  const double elev = -10.0 * M_PI / 180.0;
  cloud.points.push_back({std::cos(elev), 0.0, std::sin(elev)});  // exactly min_elev
  cloud.points.push_back({1.0, 0.0, 10.0});                       // above FOV
  cloud.points.push_back({0.0, 0.0, 0.0});                        // at the origin
  cloud.reflectance = {0, 0, 0};
  cloud.beam = {-1, -1, -1};

  const LabeledCloud out = infer_beams(cloud, sensor);
  CHECK(out.beam[0] == 0);  // lower bin edge is inclusive
  CHECK(out.beam[1] == 3);  // out-of-FOV clamps to the nearest bin
  CHECK(out.beam[2] == 2);  // origin point: elevation-0 convention

  SensorConfig single = sensor;
  single.beam_count = 1;
  const LabeledCloud one = infer_beams(cloud, single);
  for (int b : one.beam) CHECK(b == 0);
}

TEST_CASE("fov_crop retains exactly the in-window points") {
  LabeledCloud far_point;
  far_point.points = {{25.0, 0.0, 0.0}};
  far_point.reflectance = {0.1};
  far_point.beam = {-1};
  CHECK(fov_crop(far_point, 20.0, -180.0, 180.0, -90.0, 90.0).size() == 0);
  CHECK(fov_crop(far_point, 25.5, -180.0, 180.0, -90.0, 90.0).size() == 1);

  // ring of 100 points at azimuths strictly inside/outside (-90, 90)
  LabeledCloud ring;
  for (int k = 0; k < 100; ++k) {
    const double az = ((k + 0.5) * 3.6 - 180.0) * M_PI / 180.0;
    ring.points.push_back({10.0 * std::cos(az), 10.0 * std::sin(az), 0.0});
    ring.reflectance.push_back(0.5);
    ring.beam.push_back(-1);
  }
  const LabeledCloud half = fov_crop(ring, 1e9, -90.0, 90.0, -90.0, 90.0);
  CHECK(half.size() == 50);

  // idempotent and monotone
  const LabeledCloud again = fov_crop(half, 1e9, -90.0, 90.0, -90.0, 90.0);
  CHECK(again.size() == half.size());
  CHECK(fov_crop(ring, 1e9, -45.0, 45.0, -90.0, 90.0).size() <= half.size());

  const LabeledCloud all = fov_crop(ring, 1e9, -180.0, 180.0, -90.0, 90.0);
  CHECK(all.size() == ring.size());
}

TEST_CASE("class_histogram counts non-ignored labels") {
  ClassDef two{2, {"a", "b"}, -1};
  const ClassHistogram h = class_histogram({{0, 0, 0, 1}}, two);
  CHECK(h.freq[0] == doctest::Approx(0.75));
  CHECK(h.freq[1] == doctest::Approx(0.25));
  h.validate(-1);

  ClassDef three{3, {"a", "b", "ignore"}, 2};
  const ClassHistogram hi = class_histogram({{0, 1, 2, 1}}, three);
  CHECK(hi.freq[0] == doctest::Approx(1.0 / 3.0));
  CHECK(hi.freq[1] == doctest::Approx(2.0 / 3.0));
  CHECK(hi.freq[2] == 0.0);
  hi.validate(2);

  const ClassHistogram onehot = class_histogram({{1, 1, 1}}, two);
  CHECK(onehot.freq[1] == 1.0);

  CHECK_THROWS_AS(class_histogram({{2, 2}}, three), ValidationError);
  CHECK_THROWS_AS(class_histogram({std::vector<int>{}}, two), ValidationError);
}

TEST_CASE("class_histogram is permutation-equivariant") {
  ClassDef def{4, {"a", "b", "c", "d"}, -1};
  const std::vector<int> labels{0, 1, 1, 2, 3, 3, 3};
  const ClassHistogram h = class_histogram({labels}, def);
  // swap classes 1 and 3
  std::vector<int> swapped;
  for (int l : labels) swapped.push_back(l == 1 ? 3 : l == 3 ? 1 : l);
  const ClassHistogram hs = class_histogram({swapped}, def);
  CHECK(hs.freq[1] == h.freq[3]);
  CHECK(hs.freq[3] == h.freq[1]);
  CHECK(hs.freq[0] == h.freq[0]);
  CHECK(h.freq.sum() == doctest::Approx(1.0).epsilon(1e-12));
}
