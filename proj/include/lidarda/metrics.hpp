// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <vector>

#include "lidarda/cloud.hpp"
#include "lidarda/model.hpp"

namespace lidarda {

// Rows = ground truth, columns = prediction. Ignore-class ground truth is
// never counted.
struct ConfusionMatrix {
  Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;
  int ignore_index = -1;

  explicit ConfusionMatrix(int class_count = 0, int ignore = -1);
  ConfusionMatrix& operator+=(const ConfusionMatrix& other);
};

// Predicted class per row: argmax, ties to the lowest class index.
std::vector<int> argmax_rows(const Eigen::MatrixXd& probs);

void accumulate(ConfusionMatrix& cm, const std::vector<int>& labels,
                const Prediction& pred);
void accumulate_predicted(ConfusionMatrix& cm, const std::vector<int>& labels,
                          const std::vector<int>& predicted);

struct IouReport {
  std::vector<double> iou;       // per class; NaN when excluded
  std::vector<bool> included;    // zero-denominator and ignore classes excluded
  std::vector<std::int64_t> support;  // ground-truth points per class
  double miou = 0.0;             // mean over included classes
};

IouReport iou(const ConfusionMatrix& cm);

// CSV: one row per class (name, iou, support), then an mIoU summary row.
void write_iou_csv(const IouReport& report, const ClassDef& class_def,
                   const std::filesystem::path& path);

}  // namespace lidarda
