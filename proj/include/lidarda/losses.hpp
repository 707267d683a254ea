// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <vector>

#include "lidarda/align.hpp"
#include "lidarda/model.hpp"

namespace lidarda {

// Scalar loss plus its gradient with respect to the predicted probabilities.
struct LossValue {
  double value = 0.0;
  Eigen::MatrixXd d_probs;  // N x C
};

struct LossWeights {
  double lambda_ent = 0.001;
  double lambda_align = 0.001;

  void validate() const;
};

// How the class-alignment KL is reduced. batch_mean compares the source
// histogram against the column-mean prediction of the batch; per_point is
// the literal per-point divergence, kept for comparison.
enum class AlignMode { batch_mean, per_point };

// Mean over non-ignored points of -log P[n, label_n]; log clamped at 1e-12.
LossValue seg_loss(const Prediction& pred, const std::vector<int>& labels,
                   int ignore_index);

// Per-point mean of Shannon entropy normalized by log C, in [0, 1].
LossValue entropy_loss(const Prediction& pred);

// KL(hist || P_bar) with P_bar the column mean of the batch's probabilities
// (or the per-point variant). The ignore column of the gradient is zero.
LossValue align_loss(const Prediction& pred, const ClassHistogram& hist,
                     int ignore_index, AlignMode mode = AlignMode::batch_mean);

struct JointLoss {
  double total = 0.0;
  double seg = 0.0;
  double align = 0.0;
  double ent = 0.0;
  Eigen::MatrixXd d_src_probs;
  Eigen::MatrixXd d_tgt_probs;
};

// total = seg(src) + lambda_align * align(tgt) + lambda_ent * ent(tgt).
// Source gradient comes from seg only; target gradient is the weighted sum
// of the align and entropy gradients.
JointLoss joint_loss(const Prediction& src_pred, const std::vector<int>& src_labels,
                     const Prediction& tgt_pred, const ClassHistogram& hist,
                     const LossWeights& weights, int ignore_index,
                     AlignMode align_mode = AlignMode::batch_mean);

}  // namespace lidarda
