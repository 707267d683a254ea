// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>

#include "lidarda/features.hpp"

namespace lidarda {

// Per-point MLP D -> h1 -> h2 -> C with ReLU activations and a row-softmax
// head. All parameters and activations are double precision.
struct ModelParams {
  Eigen::MatrixXd w1;  // h1 x D
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // h2 x h1
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;  // C x h2
  Eigen::VectorXd b3;
  std::uint64_t init_seed = 0;

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int class_count() const { return static_cast<int>(w3.rows()); }
  void validate() const;
};

struct Prediction {
  Eigen::MatrixXd probs;   // N x C, rows sum to 1
  Eigen::MatrixXd logits;  // retained for the backward pass
  // hidden pre-/post-activations retained for the backward pass
  Eigen::MatrixXd a1, h1, a2, h2;
};

struct GradientSet {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;
  Eigen::VectorXd b3;

  static GradientSet zeros_like(const ModelParams& params);
  GradientSet& operator+=(const GradientSet& other);
  GradientSet& operator*=(double s);
  double squared_norm() const;
};

// He-style init: zero-mean weights with variance 2/fan_in, zero biases.
ModelParams init_params(int input_dim, int class_count, std::uint64_t seed,
                        int hidden1 = 64, int hidden2 = 64);

Prediction forward(const ModelParams& params, const Eigen::MatrixXd& features);

// Exact parameter gradients of the scalar loss whose probability-space
// gradient is d_loss_d_probs.
GradientSet backward(const ModelParams& params, const Eigen::MatrixXd& features,
                     const Prediction& pred, const Eigen::MatrixXd& d_loss_d_probs);

// Versioned binary checkpoint: header (magic, version, D, h1, h2, C), then
// little-endian float64 tensors in declaration order.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_checkpoint(const std::filesystem::path& path);

}  // namespace lidarda
