// SPDX-License-Identifier: Apache-2.0
#include "lidarda/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "lidarda/error.hpp"

namespace lidarda {

ConfusionMatrix::ConfusionMatrix(int class_count, int ignore)
    : ignore_index(ignore) {
  counts.setZero(class_count, class_count);
}

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other) {
  if (other.counts.rows() != counts.rows() || other.ignore_index != ignore_index)
    throw ValidationError("confusion matrix: incompatible merge");
  counts += other.counts;
  return *this;
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& probs) {
  std::vector<int> out(static_cast<std::size_t>(probs.rows()));
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    int best = 0;
    double best_p = probs(i, 0);
    for (Eigen::Index j = 1; j < probs.cols(); ++j) {
      if (probs(i, j) > best_p) {
        best_p = probs(i, j);
        best = static_cast<int>(j);
      }
    }
    out[i] = best;
  }
  return out;
}

void accumulate_predicted(ConfusionMatrix& cm, const std::vector<int>& labels,
                          const std::vector<int>& predicted) {
  if (labels.size() != predicted.size())
    throw ValidationError("accumulate: label/prediction length mismatch");
  const int c = static_cast<int>(cm.counts.rows());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int y = labels[i];
    if (y == cm.ignore_index) continue;
    if (y < 0 || y >= c || predicted[i] < 0 || predicted[i] >= c)
      throw ValidationError("accumulate: class id out of range at point " +
                            std::to_string(i));
    ++cm.counts(y, predicted[i]);
  }
}

void accumulate(ConfusionMatrix& cm, const std::vector<int>& labels,
                const Prediction& pred) {
  if (static_cast<Eigen::Index>(labels.size()) != pred.probs.rows())
    throw ValidationError("accumulate: label/prediction length mismatch");
  accumulate_predicted(cm, labels, argmax_rows(pred.probs));
}

IouReport iou(const ConfusionMatrix& cm) {
  const int c = static_cast<int>(cm.counts.rows());
  IouReport report;
  report.iou.assign(c, std::numeric_limits<double>::quiet_NaN());
  report.included.assign(c, false);
  report.support.assign(c, 0);

  double sum = 0.0;
  int n_included = 0;
  for (int k = 0; k < c; ++k) {
    const std::int64_t tp = cm.counts(k, k);
    const std::int64_t row = cm.counts.row(k).sum();
    const std::int64_t col = cm.counts.col(k).sum();
    const std::int64_t denom = row + col - tp;
    report.support[k] = row;
    if (k == cm.ignore_index || denom == 0) continue;
    report.iou[k] = static_cast<double>(tp) / static_cast<double>(denom);
    report.included[k] = true;
    sum += report.iou[k];
    ++n_included;
  }
  if (n_included == 0) throw ValidationError("iou: every class is excluded");
  report.miou = sum / n_included;
  return report;
}

void write_iou_csv(const IouReport& report, const ClassDef& class_def,
                   const std::filesystem::path& path) {
  if (static_cast<int>(report.iou.size()) != class_def.class_count)
    throw ValidationError("write_iou_csv: class count mismatch");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "class,iou,support\n";
  char buf[64];
  for (int k = 0; k < class_def.class_count; ++k) {
    if (report.included[k]) {
      std::snprintf(buf, sizeof(buf), "%.6f", report.iou[k]);
      out << class_def.names[k] << "," << buf << "," << report.support[k] << "\n";
    } else {
      out << class_def.names[k] << ",excluded," << report.support[k] << "\n";
    }
  }
  std::snprintf(buf, sizeof(buf), "%.6f", report.miou);
  out << "mIoU," << buf << ",\n";
  if (!out) throw IoError("write failed on " + path.string());
}

}  // namespace lidarda
