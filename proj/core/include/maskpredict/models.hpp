// Copyright 2026 The MaskPredict Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/matcore.hpp"

namespace maskpredict {

enum class KernelKind : std::uint8_t { kLinear = 1, kPolynomial = 2, kRbf = 3, kTanh = 4 };

struct Kernel {
  KernelKind kind = KernelKind::kLinear;
  int degree = 3;      // polynomial
  double gamma = 1.0;  // rbf
  double kappa = 1.0;  // tanh slope
  double coef0 = 0.0;  // tanh offset

  static Kernel linear() { return {}; }
  static Kernel polynomial(int d) { return {KernelKind::kPolynomial, d, 1.0, 1.0, 0.0}; }
  static Kernel rbf(double g) { return {KernelKind::kRbf, 3, g, 1.0, 0.0}; }
  static Kernel tanh(double k, double c) { return {KernelKind::kTanh, 3, 1.0, k, c}; }
};

const char* to_string(KernelKind kind);
// Accepts linear, poly, rbf, tanh with default parameters.
Kernel parse_kernel(std::string_view name);
void validate(const Kernel& kernel);

// K from the two quantities every supported kernel depends on.
double kernel_value(const Kernel& kernel, double inner, double squared_distance);

// f(t) = sum_i coeffs_i K(t, x_i) + bias, coeffs_i = alpha_i y_i.
struct SvmModel {
  Vector coeffs;
  double bias = 0.0;
  Kernel kernel;
  Matrix support_points;  // p x n projected training columns (server-held)

  Index p() const { return support_points.rows(); }
  Index n() const { return support_points.cols(); }
};

// The part of an SVM the server releases: no support points.
struct SvmPayload {
  Vector coeffs;
  double bias = 0.0;
  Kernel kernel;
};

struct SvmOptions {
  double c = 1.0;
  double tol = 1e-4;
  long max_iter = 10'000'000;
  // Kernel rows kept in the LRU cache when the Gram matrix is not precomputed.
  std::size_t cache_bytes = std::size_t{256} << 20;
};

struct SvmTrainInfo {
  long iterations = 0;
  double final_gap = 0.0;
  Vector alpha;  // dual variables, 0 <= alpha <= C
};

// Soft-margin dual by SMO with second-order working-set selection.
// Labels are +1 / -1.
SvmModel train_svm(const Matrix& z, std::span<const int> y, const Kernel& kernel,
                   const SvmOptions& opts = {}, SvmTrainInfo* info = nullptr);

double svm_decide_plain(const SvmModel& model, const Vector& t);

// t*^T A_I x*; equals t^T x when the starred vectors are A t, A x and
// A_I = (A A^T)^{-1}.
double enc_inner_product(const Vector& t_star, const Vector& x_star, const Matrix& a_inv_gram);

// sqrt((x* - t*)^T A_I (x* - t*)), radicand clamped at zero.
double enc_distance(const Vector& t_star, const Vector& x_star, const Matrix& a_inv_gram);

double svm_decide_encrypted(const SvmPayload& model, const Matrix& x_star,
                            const Vector& t_star, const Matrix& a_inv_gram);

inline int svm_label(double score) { return score >= 0.0 ? 1 : -1; }

enum class OutputActivation : std::uint8_t { kLogistic = 1, kIdentity = 2 };

// One hidden layer of logistic units, z_i = sigma(b_i + w_i^T x), followed by
// f(x) = g(out_b + out_w^T z).
struct NnModel {
  Matrix hidden_w;  // M x p, row i holds alpha_i
  Vector hidden_b;  // M
  Vector out_w;     // M
  double out_b = 0.0;
  OutputActivation output = OutputActivation::kLogistic;

  Index p() const { return hidden_w.cols(); }
  Index hidden() const { return hidden_w.rows(); }
};

// Hidden weights replaced by (A^{-1})^T alpha_i so that the network accepts
// A x directly.
struct EncNnModel {
  NnModel masked;
};

struct NnOptions {
  Index hidden = 16;
  int epochs = 500;
  double lr = 0.1;
  std::uint64_t seed = 0;
};

struct NnGradient {
  Matrix hidden_w;
  Vector hidden_b;
  Vector out_w;
  double out_b = 0.0;
};

NnModel init_nn(Index p, Index hidden, std::uint64_t seed);

// Mean logistic loss over columns of z with labels +1 / -1.
double nn_loss(const NnModel& model, const Matrix& z, std::span<const int> y);
double nn_loss_and_gradient(const NnModel& model, const Matrix& z, std::span<const int> y,
                            NnGradient& grad);

// Full-batch gradient descent. Appends the loss before every epoch and after
// the last one to `loss_history` when given.
NnModel train_nn(const Matrix& z, std::span<const int> y, const NnOptions& opts = {},
                 std::vector<double>* loss_history = nullptr);

double nn_forward(const NnModel& model, const Vector& x);
double nn_forward(const EncNnModel& model, const Vector& x_star);
int nn_label(const NnModel& model, double score);

EncNnModel transform_nn_weights(const NnModel& model, const Matrix& a);

void validate(const NnModel& model);

Bytes encode_svm_model(const SvmModel& model);
SvmModel decode_svm_model(std::span<const std::uint8_t> bytes);
Bytes encode_nn_model(const NnModel& model);
NnModel decode_nn_model(std::span<const std::uint8_t> bytes);

// Bodies carried inside protocol messages (no magic, no version).
void write_svm_payload(ByteWriter& w, const SvmPayload& payload);
SvmPayload read_svm_payload(ByteReader& r);
std::size_t svm_payload_size(Index n);
void write_nn_payload(ByteWriter& w, const NnModel& model);
NnModel read_nn_payload(ByteReader& r);
std::size_t nn_payload_size(Index p, Index hidden);

}  // namespace maskpredict
