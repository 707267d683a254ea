// SPDX-License-Identifier: Apache-2.0
#include "lidarda/losses.hpp"

#include <cmath>

#include "lidarda/error.hpp"

namespace lidarda {

namespace {
constexpr double kProbClamp = 1e-12;
}

void LossWeights::validate() const {
  if (lambda_ent < 0.0 || lambda_align < 0.0)
    throw ValidationError("loss weights must be >= 0");
}

LossValue seg_loss(const Prediction& pred, const std::vector<int>& labels,
                   int ignore_index) {
  const Eigen::Index n = pred.probs.rows();
  const Eigen::Index c = pred.probs.cols();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw ValidationError("seg_loss: label count does not match prediction");

  Eigen::Index counted = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] == ignore_index) continue;
    if (labels[i] < 0 || labels[i] >= c)
      throw ValidationError("seg_loss: label out of range at point " +
                            std::to_string(i));
    ++counted;
  }
  if (counted == 0) throw ValidationError("seg_loss: all points ignored");

  LossValue loss;
  loss.d_probs = Eigen::MatrixXd::Zero(n, c);
  const double inv_m = 1.0 / static_cast<double>(counted);
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (labels[i] == ignore_index) continue;
    const double p = std::max(pred.probs(i, labels[i]), kProbClamp);
    sum -= std::log(p);
    loss.d_probs(i, labels[i]) = -inv_m / p;
  }
  loss.value = sum * inv_m;
  return loss;
}

LossValue entropy_loss(const Prediction& pred) {
  const Eigen::Index n = pred.probs.rows();
  const Eigen::Index c = pred.probs.cols();
  if (c < 2) throw ValidationError("entropy_loss: needs at least 2 classes");

  LossValue loss;
  loss.d_probs = Eigen::MatrixXd::Zero(n, c);
  if (n == 0) return loss;

  const double scale = -1.0 / (static_cast<double>(n) * std::log(static_cast<double>(c)));
  double sum = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < c; ++j) {
      const double p = pred.probs(i, j);
      if (p > 0.0) sum += p * std::log(std::max(p, kProbClamp));
      loss.d_probs(i, j) = scale * (std::log(std::max(p, kProbClamp)) + 1.0);
    }
  }
  loss.value = scale * sum;
  return loss;
}

LossValue align_loss(const Prediction& pred, const ClassHistogram& hist,
                     int ignore_index, AlignMode mode) {
  const Eigen::Index n = pred.probs.rows();
  const Eigen::Index c = pred.probs.cols();
  if (n < 1) throw ValidationError("align_loss: empty prediction");
  if (hist.freq.size() != c)
    throw ValidationError("align_loss: histogram length does not match classes");
  hist.validate(ignore_index);

  LossValue loss;
  loss.d_probs = Eigen::MatrixXd::Zero(n, c);

  if (mode == AlignMode::batch_mean) {
    const Eigen::VectorXd p_bar = pred.probs.colwise().mean().transpose();
    for (Eigen::Index j = 0; j < c; ++j) {
      const double h = hist.freq[j];
      if (h <= 0.0) continue;  // includes the ignore column
      const double p = std::max(p_bar[j], kProbClamp);
      loss.value += h * std::log(h / p);
      const double g = -h / (static_cast<double>(n) * p);
      if (j != ignore_index) loss.d_probs.col(j).setConstant(g);
    }
  } else {
    const double inv_n = 1.0 / static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) {
        const double h = hist.freq[j];
        if (h <= 0.0) continue;
        const double p = std::max(pred.probs(i, j), kProbClamp);
        loss.value += inv_n * h * std::log(h / p);
        if (j != ignore_index) loss.d_probs(i, j) = -inv_n * h / p;
      }
    }
  }
  return loss;
}

JointLoss joint_loss(const Prediction& src_pred, const std::vector<int>& src_labels,
                     const Prediction& tgt_pred, const ClassHistogram& hist,
                     const LossWeights& weights, int ignore_index,
                     AlignMode align_mode) {
  weights.validate();
  const LossValue seg = seg_loss(src_pred, src_labels, ignore_index);
  const LossValue align = align_loss(tgt_pred, hist, ignore_index, align_mode);
  const LossValue ent = entropy_loss(tgt_pred);

  JointLoss joint;
  joint.seg = seg.value;
  joint.align = align.value;
  joint.ent = ent.value;
  joint.total = seg.value + weights.lambda_align * align.value +
                weights.lambda_ent * ent.value;
  joint.d_src_probs = seg.d_probs;
  joint.d_tgt_probs =
      weights.lambda_align * align.d_probs + weights.lambda_ent * ent.d_probs;
  return joint;
}

}  // namespace lidarda
