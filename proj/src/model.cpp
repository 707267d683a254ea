// SPDX-License-Identifier: Apache-2.0
#include "lidarda/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

#include "lidarda/error.hpp"
#include "lidarda/rng.hpp"

namespace lidarda {

namespace fs = std::filesystem;

void ModelParams::validate() const {
  if (w1.rows() == 0 || w1.cols() == 0 || w3.rows() == 0)
    throw ValidationError("model: empty layer");
  if (b1.size() != w1.rows() || w2.cols() != w1.rows() || b2.size() != w2.rows() ||
      w3.cols() != w2.rows() || b3.size() != w3.rows())
    throw ValidationError("model: inconsistent layer shapes");
  const Eigen::MatrixXd* mats[] = {&w1, &w2, &w3};
  for (const auto* m : mats)
    if (!m->allFinite()) throw ValidationError("model: non-finite weights");
  if (!b1.allFinite() || !b2.allFinite() || !b3.allFinite())
    throw ValidationError("model: non-finite biases");
}

GradientSet GradientSet::zeros_like(const ModelParams& params) {
  GradientSet g;
  g.w1 = Eigen::MatrixXd::Zero(params.w1.rows(), params.w1.cols());
  g.b1 = Eigen::VectorXd::Zero(params.b1.size());
  g.w2 = Eigen::MatrixXd::Zero(params.w2.rows(), params.w2.cols());
  g.b2 = Eigen::VectorXd::Zero(params.b2.size());
  g.w3 = Eigen::MatrixXd::Zero(params.w3.rows(), params.w3.cols());
  g.b3 = Eigen::VectorXd::Zero(params.b3.size());
  return g;
}

GradientSet& GradientSet::operator+=(const GradientSet& other) {
  w1 += other.w1;
  b1 += other.b1;
  w2 += other.w2;
  b2 += other.b2;
  w3 += other.w3;
  b3 += other.b3;
  return *this;
}

GradientSet& GradientSet::operator*=(double s) {
  w1 *= s;
  b1 *= s;
  w2 *= s;
  b2 *= s;
  w3 *= s;
  b3 *= s;
  return *this;
}

double GradientSet::squared_norm() const {
  return w1.squaredNorm() + b1.squaredNorm() + w2.squaredNorm() +
         b2.squaredNorm() + w3.squaredNorm() + b3.squaredNorm();
}

namespace {

Eigen::MatrixXd he_matrix(int rows, int cols, Rng& rng) {
  const double sigma = std::sqrt(2.0 / static_cast<double>(cols));
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal(0.0, sigma);
  return m;
}

}  // namespace

ModelParams init_params(int input_dim, int class_count, std::uint64_t seed,
                        int hidden1, int hidden2) {
  if (input_dim < 1 || class_count < 1 || hidden1 < 1 || hidden2 < 1)
    throw ValidationError("init_params: dimensions must be >= 1");
  Rng rng(mix_seed(seed, {stream::kInit}));
  ModelParams params;
  params.init_seed = seed;
  params.w1 = he_matrix(hidden1, input_dim, rng);
  params.b1 = Eigen::VectorXd::Zero(hidden1);
  params.w2 = he_matrix(hidden2, hidden1, rng);
  params.b2 = Eigen::VectorXd::Zero(hidden2);
  params.w3 = he_matrix(class_count, hidden2, rng);
  params.b3 = Eigen::VectorXd::Zero(class_count);
  return params;
}

Prediction forward(const ModelParams& params, const Eigen::MatrixXd& features) {
  params.validate();
  if (features.cols() != params.w1.cols())
    throw ValidationError("forward: feature dimension " +
                          std::to_string(features.cols()) +
                          " does not match model input " +
                          std::to_string(params.w1.cols()));
  Prediction pred;
  pred.a1 = (features * params.w1.transpose()).rowwise() + params.b1.transpose();
  pred.h1 = pred.a1.cwiseMax(0.0);
  pred.a2 = (pred.h1 * params.w2.transpose()).rowwise() + params.b2.transpose();
  pred.h2 = pred.a2.cwiseMax(0.0);
  pred.logits = (pred.h2 * params.w3.transpose()).rowwise() + params.b3.transpose();

  const char* layer_names[] = {"layer1", "layer2", "logits"};
  const Eigen::MatrixXd* acts[] = {&pred.a1, &pred.a2, &pred.logits};
  for (int l = 0; l < 3; ++l)
    if (!acts[l]->allFinite())
      throw NumericError(std::string("forward: non-finite activation in ") +
                         layer_names[l]);

  // Row-softmax with max subtraction.
  pred.probs.resize(pred.logits.rows(), pred.logits.cols());
  for (Eigen::Index i = 0; i < pred.logits.rows(); ++i) {
    const double m = pred.logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (pred.logits.row(i).array() - m).exp();
    pred.probs.row(i) = e / e.sum();
  }
  return pred;
}

GradientSet backward(const ModelParams& params, const Eigen::MatrixXd& features,
                     const Prediction& pred, const Eigen::MatrixXd& d_loss_d_probs) {
  if (d_loss_d_probs.rows() != pred.probs.rows() ||
      d_loss_d_probs.cols() != pred.probs.cols())
    throw ValidationError("backward: gradient shape mismatch");
  if (!d_loss_d_probs.allFinite())
    throw ValidationError("backward: non-finite upstream gradient");

  // Softmax Jacobian: dL/dz_i = p_i .* (dL/dp_i - <dL/dp_i, p_i>)
  const Eigen::VectorXd row_dots =
      (d_loss_d_probs.array() * pred.probs.array()).rowwise().sum().matrix();
  const Eigen::MatrixXd d_logits =
      (pred.probs.array() *
       (d_loss_d_probs.colwise() - row_dots).array()).matrix();

  GradientSet g;
  g.w3 = d_logits.transpose() * pred.h2;
  g.b3 = d_logits.colwise().sum().transpose();
  const Eigen::MatrixXd d_h2 = d_logits * params.w3;
  const Eigen::MatrixXd d_a2 =
      (d_h2.array() * (pred.a2.array() > 0.0).cast<double>()).matrix();
  g.w2 = d_a2.transpose() * pred.h1;
  g.b2 = d_a2.colwise().sum().transpose();
  const Eigen::MatrixXd d_h1 = d_a2 * params.w2;
  const Eigen::MatrixXd d_a1 =
      (d_h1.array() * (pred.a1.array() > 0.0).cast<double>()).matrix();
  g.w1 = d_a1.transpose() * features;
  g.b1 = d_a1.colwise().sum().transpose();
  return g;
}

namespace {

constexpr char kMagic[4] = {'L', 'D', 'A', 'M'};
constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::vector<char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::vector<char>& out, double d) {
  std::uint64_t u;
  std::memcpy(&u, &d, 8);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return v;
}

double get_f64(const char* p) {
  std::uint64_t u = 0;
  for (int i = 0; i < 8; ++i)
    u |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  double d;
  std::memcpy(&d, &u, 8);
  return d;
}

void put_matrix(std::vector<char>& out, const Eigen::MatrixXd& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) put_f64(out, m(i, j));
}

void put_vector(std::vector<char>& out, const Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) put_f64(out, v[i]);
}

}  // namespace

void save_checkpoint(const ModelParams& params, const fs::path& path) {
  params.validate();
  std::vector<char> bytes;
  bytes.insert(bytes.end(), kMagic, kMagic + 4);
  put_u32(bytes, kCheckpointVersion);
  put_u32(bytes, static_cast<std::uint32_t>(params.w1.cols()));
  put_u32(bytes, static_cast<std::uint32_t>(params.w1.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(params.w2.rows()));
  put_u32(bytes, static_cast<std::uint32_t>(params.w3.rows()));
  put_matrix(bytes, params.w1);
  put_vector(bytes, params.b1);
  put_matrix(bytes, params.w2);
  put_vector(bytes, params.b2);
  put_matrix(bytes, params.w3);
  put_vector(bytes, params.b3);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

ModelParams load_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  if (bytes.size() < 24 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError(path.string() + ": not a checkpoint file");
  if (get_u32(bytes.data() + 4) != kCheckpointVersion)
    throw FormatError(path.string() + ": unsupported checkpoint version");
  const std::uint32_t d = get_u32(bytes.data() + 8);
  const std::uint32_t h1 = get_u32(bytes.data() + 12);
  const std::uint32_t h2 = get_u32(bytes.data() + 16);
  const std::uint32_t c = get_u32(bytes.data() + 20);
  const std::size_t n_params = static_cast<std::size_t>(h1) * d + h1 +
                               static_cast<std::size_t>(h2) * h1 + h2 +
                               static_cast<std::size_t>(c) * h2 + c;
  if (bytes.size() != 24 + 8 * n_params)
    throw FormatError(path.string() + ": checkpoint size does not match header");

  const char* p = bytes.data() + 24;
  auto read_matrix = [&p](Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
      for (Eigen::Index j = 0; j < cols; ++j) {
        m(i, j) = get_f64(p);
        p += 8;
      }
    return m;
  };
  auto read_vector = [&p](Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      v[i] = get_f64(p);
      p += 8;
    }
    return v;
  };
  ModelParams params;
  params.w1 = read_matrix(h1, d);
  params.b1 = read_vector(h1);
  params.w2 = read_matrix(h2, h1);
  params.b2 = read_vector(h2);
  params.w3 = read_matrix(c, h2);
  params.b3 = read_vector(c);
  params.validate();
  return params;
}

}  // namespace lidarda
