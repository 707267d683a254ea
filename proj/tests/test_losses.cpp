// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "doctest.h"
#include "lidarda/error.hpp"
#include "lidarda/losses.hpp"
#include "lidarda/rng.hpp"

using namespace lidarda;

namespace {

Prediction prediction_from_probs(const Eigen::MatrixXd& probs) {
  Prediction pred;
  pred.probs = probs;
  return pred;
}

Prediction random_prediction(std::uint64_t seed, int n, int c) {
  Rng rng(seed);
  Eigen::MatrixXd probs(n, c);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int j = 0; j < c; ++j) {
      probs(i, j) = rng.uniform(0.01, 1.0);
      sum += probs(i, j);
    }
    probs.row(i) /= sum;
  }
  return prediction_from_probs(probs);
}

ClassHistogram make_hist(std::initializer_list<double> freq) {
  ClassHistogram hist;
  hist.freq = Eigen::VectorXd(static_cast<Eigen::Index>(freq.size()));
  Eigen::Index i = 0;
  for (double f : freq) hist.freq[i++] = f;
  return hist;
}

}  // namespace

TEST_CASE("seg loss anchors") {
  // perfectly confident and correct: -log 1 = 0
  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(3, 2);
  onehot(0, 0) = onehot(1, 1) = onehot(2, 0) = 1.0;
  const LossValue perfect =
      seg_loss(prediction_from_probs(onehot), {0, 1, 0}, -1);
  CHECK(perfect.value == doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd half(1, 2);
  half << 0.5, 0.5;
  const LossValue coin = seg_loss(prediction_from_probs(half), {0}, -1);
  CHECK(coin.value == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // gradient: -1/(M*P) at the true class, zero elsewhere
  CHECK(coin.d_probs(0, 0) == doctest::Approx(-2.0));
  CHECK(coin.d_probs(0, 1) == 0.0);
}

TEST_CASE("seg loss ignores the ignore class and validates labels") {
  Eigen::MatrixXd probs(3, 2);
  probs << 0.9, 0.1, 0.5, 0.5, 0.2, 0.8;
  const LossValue loss = seg_loss(prediction_from_probs(probs), {0, 2, 1}, 2);
  // mean over points 0 and 2 only
  const double expected = -0.5 * (std::log(0.9) + std::log(0.8));
  CHECK(loss.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(loss.d_probs(1, 0) == 0.0);
  CHECK(loss.d_probs(1, 1) == 0.0);

  CHECK_THROWS_AS(seg_loss(prediction_from_probs(probs), {2, 2, 2}, 2),
                  ValidationError);
  CHECK_THROWS_AS(seg_loss(prediction_from_probs(probs), {0, 1}, -1),
                  ValidationError);
  CHECK_THROWS_AS(seg_loss(prediction_from_probs(probs), {0, 5, 1}, -1),
                  ValidationError);
}

TEST_CASE("entropy loss anchors") {
  const int c = 4;
  Eigen::MatrixXd uniform = Eigen::MatrixXd::Constant(7, c, 1.0 / c);
  CHECK(entropy_loss(prediction_from_probs(uniform)).value ==
        doctest::Approx(1.0).epsilon(1e-12));

  Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(5, c);
  for (int i = 0; i < 5; ++i) onehot(i, i % c) = 1.0;
  CHECK(entropy_loss(prediction_from_probs(onehot)).value ==
        doctest::Approx(0.0).epsilon(1e-12));

  Eigen::MatrixXd half(1, 4);
  half << 0.5, 0.5, 0.0, 0.0;
  CHECK(entropy_loss(prediction_from_probs(half)).value ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("entropy loss stays in [0,1] and its gradient matches the formula") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Prediction pred = random_prediction(seed, 12, 5);
    const LossValue loss = entropy_loss(pred);
    CHECK(loss.value >= 0.0);
    CHECK(loss.value <= 1.0);
    const double scale = -1.0 / (12.0 * std::log(5.0));
    for (int j = 0; j < 5; ++j)
      CHECK(loss.d_probs(3, j) ==
            doctest::Approx(scale * (std::log(pred.probs(3, j)) + 1.0)));
  }
}

TEST_CASE("align loss anchors") {
  // P_bar equal to hist: KL = 0
  Eigen::MatrixXd probs(4, 2);
  probs << 0.9, 0.1, 0.9, 0.1, 0.9, 0.1, 0.9, 0.1;
  const ClassHistogram hist = make_hist({0.9, 0.1});
  const LossValue zero = align_loss(prediction_from_probs(probs), hist, -1);
  CHECK(std::abs(zero.value) <= 1e-12);

  // independent scalar evaluation: 0.9*ln(0.9/0.5) + 0.1*ln(0.1/0.5)
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(6, 2, 0.5);
  const double expected = 0.9 * std::log(0.9 / 0.5) + 0.1 * std::log(0.1 / 0.5);
  const LossValue kl = align_loss(prediction_from_probs(flat), hist, -1);
  CHECK(kl.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(kl.value == doctest::Approx(0.3680642071684).epsilon(1e-9));

  // gradient: -hist_c / (N * P_bar_c) broadcast down each column
  for (int i = 0; i < 6; ++i) {
    CHECK(kl.d_probs(i, 0) == doctest::Approx(-0.9 / (6.0 * 0.5)));
    CHECK(kl.d_probs(i, 1) == doctest::Approx(-0.1 / (6.0 * 0.5)));
  }
}

TEST_CASE("align loss is non-negative and zero only at the histogram") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Prediction pred = random_prediction(seed + 3, 9, 4);
    const ClassHistogram hist = make_hist({0.4, 0.3, 0.2, 0.1});
    CHECK(align_loss(pred, hist, -1).value >= 0.0);
  }
}

TEST_CASE("align loss zeroes the ignore column and tolerates tiny P_bar") {
  Eigen::MatrixXd probs(2, 3);
  probs << 1.0, 0.0, 0.0, 1.0, 0.0, 0.0;
  const ClassHistogram hist = make_hist({0.7, 0.3, 0.0});
  const LossValue loss = align_loss(prediction_from_probs(probs), hist, 2);
  CHECK(std::isfinite(loss.value));
  CHECK(loss.value > 1.0);  // hist mass where P_bar underflows: large but finite
  CHECK(loss.d_probs.col(2).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("per-point align variant averages the per-point divergences") {
  Eigen::MatrixXd probs(2, 2);
  probs << 0.6, 0.4, 0.2, 0.8;
  const ClassHistogram hist = make_hist({0.5, 0.5});
  const double expected =
      0.5 * ((0.5 * std::log(0.5 / 0.6) + 0.5 * std::log(0.5 / 0.4)) +
             (0.5 * std::log(0.5 / 0.2) + 0.5 * std::log(0.5 / 0.8)));
  const LossValue loss = align_loss(prediction_from_probs(probs), hist, -1,
                                    AlignMode::per_point);
  CHECK(loss.value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("joint loss composes the three terms") {
  const Prediction src = random_prediction(1, 6, 3);
  const Prediction tgt = random_prediction(2, 8, 3);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  const ClassHistogram hist = make_hist({0.5, 0.25, 0.25});

  LossWeights weights;  // defaults: 0.001 / 0.001
  const JointLoss joint = joint_loss(src, labels, tgt, hist, weights, -1);
  const double expected = seg_loss(src, labels, -1).value +
                          0.001 * align_loss(tgt, hist, -1).value +
                          0.001 * entropy_loss(tgt).value;
  CHECK(joint.total == doctest::Approx(expected).epsilon(1e-12));
  CHECK(joint.total ==
        doctest::Approx(joint.seg + 0.001 * joint.align + 0.001 * joint.ent)
            .epsilon(1e-12));

  // gradients are the weighted sums of the component gradients
  const Eigen::MatrixXd expected_tgt = 0.001 * align_loss(tgt, hist, -1).d_probs +
                                       0.001 * entropy_loss(tgt).d_probs;
  CHECK((joint.d_tgt_probs - expected_tgt).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK((joint.d_src_probs - seg_loss(src, labels, -1).d_probs)
            .cwiseAbs()
            .maxCoeff() == 0.0);
}

TEST_CASE("joint loss with zero weights reduces to the segmentation loss") {
  const Prediction src = random_prediction(5, 6, 3);
  const Prediction tgt = random_prediction(6, 8, 3);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  const ClassHistogram hist = make_hist({0.5, 0.25, 0.25});
  LossWeights weights;
  weights.lambda_ent = 0.0;
  weights.lambda_align = 0.0;
  const JointLoss joint = joint_loss(src, labels, tgt, hist, weights, -1);
  CHECK(joint.total == seg_loss(src, labels, -1).value);
  CHECK(joint.d_tgt_probs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("joint loss is linear in the weights") {
  const Prediction src = random_prediction(8, 6, 3);
  const Prediction tgt = random_prediction(9, 8, 3);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  const ClassHistogram hist = make_hist({0.5, 0.25, 0.25});
  LossWeights w1{0.002, 0.004};
  LossWeights w2{0.006, 0.012};
  const JointLoss j1 = joint_loss(src, labels, tgt, hist, w1, -1);
  const JointLoss j2 = joint_loss(src, labels, tgt, hist, w2, -1);
  CHECK((j2.total - j2.seg) == doctest::Approx(3.0 * (j1.total - j1.seg)).epsilon(1e-12));
}

TEST_CASE("loss weight validation") {
  LossWeights bad;
  bad.lambda_ent = -0.1;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("histogram validation inside align loss") {
  const Prediction pred = random_prediction(4, 3, 3);
  ClassHistogram bad = make_hist({0.5, 0.2, 0.2});  // sums to 0.9
  CHECK_THROWS_AS(align_loss(pred, bad, -1), ValidationError);
  ClassHistogram wrong_size = make_hist({0.5, 0.5});
  CHECK_THROWS_AS(align_loss(pred, wrong_size, -1), ValidationError);
}
