// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "lidarda/cloud.hpp"

namespace lidarda {

enum class FeatureMode { relative_only, relative_absolute };

// Per-point feature rows. D = k*5 in relative-only mode (dx, dy, dz,
// d_reflectance, d_range per neighbor); +4 (x, y, z, range) when absolute
// values are appended.
struct FeatureMatrix {
  Eigen::MatrixXd rows;  // N x D
  FeatureMode mode = FeatureMode::relative_only;
  int k = 0;
};

inline int feature_dim(int k, FeatureMode mode) {
  return k * 5 + (mode == FeatureMode::relative_absolute ? 4 : 0);
}

// Index matrix: row i lists the k nearest points to point i (excluding i),
// ascending distance, ties by ascending index. If fewer than k neighbors
// exist the last one repeats; a single-point cloud self-pads with index 0.
using NeighborMatrix = std::vector<std::vector<int>>;

// Exact KNN over the whole cloud (uniform-grid accelerated, brute-force
// fallback for small N).
NeighborMatrix knn(const LabeledCloud& cloud, int k);

// Exact KNN for a subset of query points; neighbors still come from the
// whole cloud. Used by training, which only featurizes sampled points.
NeighborMatrix knn_subset(const LabeledCloud& cloud, const std::vector<int>& queries,
                          int k);

// Reference O(N^2) search with the identical ordering contract.
NeighborMatrix knn_brute_force(const LabeledCloud& cloud, int k);

// Feature rows for every cloud point given its neighbor row.
FeatureMatrix relative_features(const LabeledCloud& cloud,
                                const NeighborMatrix& neighbors, FeatureMode mode);

// Feature rows for a subset: row j describes cloud point queries[j] using
// neighbors[j].
FeatureMatrix relative_features_subset(const LabeledCloud& cloud,
                                       const std::vector<int>& queries,
                                       const NeighborMatrix& neighbors,
                                       FeatureMode mode);

}  // namespace lidarda
