// SPDX-License-Identifier: Apache-2.0
#include "lidarda/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

#include "lidarda/error.hpp"

namespace lidarda {

namespace {

using DistIdx = std::pair<double, int>;  // (squared distance, point index)

// Worst candidate on top; ties resolved toward larger index so the kept set
// matches a (d2, idx)-lexicographic sort.
struct WorseFirst {
  bool operator()(const DistIdx& a, const DistIdx& b) const { return a < b; }
};

void pad_row(std::vector<int>& row, int k) {
  while (static_cast<int>(row.size()) < k) row.push_back(row.back());
}

std::vector<int> brute_force_row(const LabeledCloud& cloud, int query, int k) {
  const std::size_t n = cloud.size();
  std::vector<DistIdx> all;
  all.reserve(n - 1);
  for (std::size_t j = 0; j < n; ++j) {
    if (static_cast<int>(j) == query) continue;
    all.emplace_back((cloud.points[j] - cloud.points[query]).squaredNorm(),
                     static_cast<int>(j));
  }
  const std::size_t m = std::min<std::size_t>(k, all.size());
  std::partial_sort(all.begin(), all.begin() + m, all.end());
  std::vector<int> row;
  row.reserve(k);
  for (std::size_t j = 0; j < m; ++j) row.push_back(all[j].second);
  if (row.empty()) row.push_back(query);  // single-point cloud self-pads
  pad_row(row, k);
  return row;
}

// Uniform cubic grid in CSR layout. Cell edge h is shared by all axes so the
// ring-search stop bound (r * h) is valid.
class PointGrid {
public:
  explicit PointGrid(const LabeledCloud& cloud) : cloud_(cloud) {
    const std::size_t n = cloud.size();
    Eigen::Vector3d lo = cloud.points[0];
    Eigen::Vector3d hi = cloud.points[0];
    for (const auto& p : cloud.points) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    origin_ = lo;
    const Eigen::Vector3d span = hi - lo;
    const double span_max = std::max({span.x(), span.y(), span.z(), 1e-9});
    const double volume = std::max(span.x(), 1e-6) * std::max(span.y(), 1e-6) *
                          std::max(span.z(), 1e-6);
    h_ = std::max({std::cbrt(volume * 4.0 / static_cast<double>(n)),
                   span_max / 64.0, 1e-9});
    for (int a = 0; a < 3; ++a)
      dims_[a] = static_cast<int>(std::floor(span[a] / h_)) + 1;

    const std::size_t n_cells =
        static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    std::vector<int> cell_of(n);
    offsets_.assign(n_cells + 1, 0);
    for (std::size_t i = 0; i < n; ++i) {
      cell_of[i] = cell_id(cell_coords(cloud.points[i]));
      ++offsets_[cell_of[i] + 1];
    }
    std::partial_sum(offsets_.begin(), offsets_.end(), offsets_.begin());
    indices_.resize(n);
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < n; ++i)
      indices_[cursor[cell_of[i]]++] = static_cast<int>(i);
  }

  std::vector<int> query(int query_idx, int k) const {
    const Eigen::Vector3d& q = cloud_.points[query_idx];
    const std::array<int, 3> qc = cell_coords(q);
    const int r_max =
        std::max({std::max(qc[0], dims_[0] - 1 - qc[0]),
                  std::max(qc[1], dims_[1] - 1 - qc[1]),
                  std::max(qc[2], dims_[2] - 1 - qc[2])});

    std::vector<DistIdx> heap;
    heap.reserve(static_cast<std::size_t>(k) + 1);
    for (int r = 0; r <= r_max; ++r) {
      visit_ring(qc, r, [&](int cell) {
        for (int s = offsets_[cell]; s < offsets_[cell + 1]; ++s) {
          const int j = indices_[s];
          if (j == query_idx) continue;
          const DistIdx cand{(cloud_.points[j] - q).squaredNorm(), j};
          if (static_cast<int>(heap.size()) < k) {
            heap.push_back(cand);
            std::push_heap(heap.begin(), heap.end(), WorseFirst{});
          } else if (cand < heap.front()) {
            std::pop_heap(heap.begin(), heap.end(), WorseFirst{});
            heap.back() = cand;
            std::push_heap(heap.begin(), heap.end(), WorseFirst{});
          }
        }
      });
      // Unvisited points lie in cells at Chebyshev distance > r, hence at
      // Euclidean distance >= r*h. Strict inequality so equal-distance
      // lower-index candidates in the next ring still get considered.
      if (static_cast<int>(heap.size()) == k) {
        const double bound = static_cast<double>(r) * h_;
        if (heap.front().first < bound * bound) break;
      }
    }
    std::sort(heap.begin(), heap.end());
    std::vector<int> row;
    row.reserve(k);
    for (const auto& [d2, j] : heap) row.push_back(j);
    if (row.empty()) row.push_back(query_idx);
    pad_row(row, k);
    return row;
  }

private:
  std::array<int, 3> cell_coords(const Eigen::Vector3d& p) const {
    std::array<int, 3> c;
    for (int a = 0; a < 3; ++a) {
      const int v = static_cast<int>(std::floor((p[a] - origin_[a]) / h_));
      c[a] = std::clamp(v, 0, dims_[a] - 1);
    }
    return c;
  }

  int cell_id(const std::array<int, 3>& c) const {
    return (c[2] * dims_[1] + c[1]) * dims_[0] + c[0];
  }

  template <typename Fn>
  void visit_ring(const std::array<int, 3>& qc, int r, Fn&& fn) const {
    const int x0 = std::max(qc[0] - r, 0), x1 = std::min(qc[0] + r, dims_[0] - 1);
    const int y0 = std::max(qc[1] - r, 0), y1 = std::min(qc[1] + r, dims_[1] - 1);
    const int z0 = std::max(qc[2] - r, 0), z1 = std::min(qc[2] + r, dims_[2] - 1);
    for (int z = z0; z <= z1; ++z) {
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const int cheb = std::max({std::abs(x - qc[0]), std::abs(y - qc[1]),
                                     std::abs(z - qc[2])});
          if (cheb != r) continue;
          fn(cell_id({x, y, z}));
        }
      }
    }
  }

  const LabeledCloud& cloud_;
  Eigen::Vector3d origin_ = Eigen::Vector3d::Zero();
  double h_ = 1.0;
  std::array<int, 3> dims_{1, 1, 1};
  std::vector<int> offsets_;
  std::vector<int> indices_;
};

constexpr std::size_t kBruteForceMax = 32;

NeighborMatrix knn_impl(const LabeledCloud& cloud, const std::vector<int>& queries,
                        int k) {
  if (cloud.size() == 0) throw ValidationError("knn: empty cloud");
  if (k < 1) throw ValidationError("knn: k must be >= 1");
  NeighborMatrix result(queries.size());
  if (cloud.size() <= kBruteForceMax) {
    for (std::size_t i = 0; i < queries.size(); ++i)
      result[i] = brute_force_row(cloud, queries[i], k);
    return result;
  }
  const PointGrid grid(cloud);
  for (std::size_t i = 0; i < queries.size(); ++i)
    result[i] = grid.query(queries[i], k);
  return result;
}

}  // namespace

NeighborMatrix knn(const LabeledCloud& cloud, int k) {
  std::vector<int> all(cloud.size());
  std::iota(all.begin(), all.end(), 0);
  return knn_impl(cloud, all, k);
}

NeighborMatrix knn_subset(const LabeledCloud& cloud, const std::vector<int>& queries,
                          int k) {
  for (int q : queries)
    if (q < 0 || static_cast<std::size_t>(q) >= cloud.size())
      throw ValidationError("knn_subset: query index out of range");
  return knn_impl(cloud, queries, k);
}

NeighborMatrix knn_brute_force(const LabeledCloud& cloud, int k) {
  if (cloud.size() == 0) throw ValidationError("knn: empty cloud");
  if (k < 1) throw ValidationError("knn: k must be >= 1");
  NeighborMatrix result(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i)
    result[i] = brute_force_row(cloud, static_cast<int>(i), k);
  return result;
}

FeatureMatrix relative_features_subset(const LabeledCloud& cloud,
                                       const std::vector<int>& queries,
                                       const NeighborMatrix& neighbors,
                                       FeatureMode mode) {
  if (neighbors.size() != queries.size())
    throw ValidationError("relative_features: neighbor rows do not match queries");
  const int k = neighbors.empty() ? 0 : static_cast<int>(neighbors[0].size());
  FeatureMatrix fm;
  fm.mode = mode;
  fm.k = k;
  fm.rows.resize(static_cast<Eigen::Index>(queries.size()), feature_dim(k, mode));
  for (std::size_t row = 0; row < queries.size(); ++row) {
    const int i = queries[row];
    if (static_cast<int>(neighbors[row].size()) != k)
      throw ValidationError("relative_features: ragged neighbor matrix");
    const Eigen::Vector3d& pi = cloud.points[i];
    const double range_i = pi.norm();
    for (int s = 0; s < k; ++s) {
      const int j = neighbors[row][s];
      if (j < 0 || static_cast<std::size_t>(j) >= cloud.size())
        throw ValidationError("relative_features: neighbor index out of range");
      const Eigen::Vector3d& pj = cloud.points[j];
      fm.rows(row, 5 * s + 0) = pj.x() - pi.x();
      fm.rows(row, 5 * s + 1) = pj.y() - pi.y();
      fm.rows(row, 5 * s + 2) = pj.z() - pi.z();
      fm.rows(row, 5 * s + 3) = cloud.reflectance[j] - cloud.reflectance[i];
      fm.rows(row, 5 * s + 4) = pj.norm() - range_i;
    }
    if (mode == FeatureMode::relative_absolute) {
      fm.rows(row, 5 * k + 0) = pi.x();
      fm.rows(row, 5 * k + 1) = pi.y();
      fm.rows(row, 5 * k + 2) = pi.z();
      fm.rows(row, 5 * k + 3) = range_i;
    }
  }
  return fm;
}

FeatureMatrix relative_features(const LabeledCloud& cloud,
                                const NeighborMatrix& neighbors, FeatureMode mode) {
  if (neighbors.size() != cloud.size())
    throw ValidationError("relative_features: neighbor rows do not match cloud");
  std::vector<int> all(cloud.size());
  std::iota(all.begin(), all.end(), 0);
  return relative_features_subset(cloud, all, neighbors, mode);
}

}  // namespace lidarda
