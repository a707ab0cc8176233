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

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace maskpredict {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Masking matrices whose 1-norm condition estimate exceeds this are rejected
// and the caller resamples.
inline constexpr double kDefaultConditionLimit = 1e8;
// Eigenvalue gaps are judged relative to the spectral radius.
inline constexpr double kEigenGapRelTol = 1e-9;
// Acceptance threshold on max |B * inv(B) - I| for a computed inverse.
inline constexpr double kInverseResidualTol = 1e-8;

void require_finite(const Matrix& m, const char* what);
double max_abs_diff(const Matrix& a, const Matrix& b);

// i.i.d. N(0, sigma^2) entries drawn in row-major order from a generator
// seeded by `seed`.
Matrix gen_gaussian(Index rows, Index cols, double sigma, std::uint64_t seed);

// sum_{j=1..d} coeffs[j-1] * B^j by Horner accumulation (d multiplies).
Matrix mat_poly_eval(const Matrix& b, std::span<const double> coeffs);
inline Matrix mat_poly_eval(const Matrix& b, const Vector& coeffs) {
  return mat_poly_eval(b, std::span<const double>(coeffs.data(), coeffs.size()));
}

Matrix block_diag_compose(std::span<const Matrix> blocks);

// Reciprocal of the LU-based 1-norm reciprocal-condition estimate.
// Infinite for singular input.
double condition_estimate(const Matrix& b);

// Throws IllConditioned when the condition estimate exceeds `cond_limit`
// or the computed inverse fails the residual check.
Matrix invert(const Matrix& b, double cond_limit = kDefaultConditionLimit);

struct EigReport {
  std::vector<std::complex<double>> eigenvalues;
  double min_pairwise_gap = 0.0;
  double spectral_radius = 0.0;
  bool distinct = false;
};

// Eigenvalues in the complex plane. `distinct` iff every pairwise distance
// exceeds gap_tol (absolute).
EigReport eig_distinctness(const Matrix& b, double gap_tol);
// Same, with the gap tolerance taken as rel_tol * spectral radius.
EigReport eig_distinctness_relative(const Matrix& b, double rel_tol = kEigenGapRelTol);

struct BlockSpec {
  Index total_dim = 0;
  Index block_size = 0;

  Index num_blocks() const { return total_dim / block_size; }
};

// Validates q mod q* == 0.
BlockSpec make_block_spec(Index total_dim, Index block_size);

// Square block-diagonal matrix kept in factored form. A dense matrix is the
// one-block case. Products against it cost O(sum of block_size^2) per vector
// instead of O(dim^2).
class BlockDiagonal {
 public:
  BlockDiagonal() = default;
  explicit BlockDiagonal(std::vector<Matrix> blocks);
  static BlockDiagonal dense(Matrix m);

  Index dim() const { return dim_; }
  std::size_t num_blocks() const { return blocks_.size(); }
  const Matrix& block(std::size_t i) const { return blocks_[i]; }
  const std::vector<Matrix>& blocks() const { return blocks_; }
  Index offset(std::size_t i) const { return offsets_[i]; }
  bool is_dense() const { return blocks_.size() == 1; }

  Matrix to_dense() const;
  Vector apply(const Vector& x) const;            // M * x
  Matrix left_multiply(const Matrix& x) const;    // M * X
  Matrix right_multiply(const Matrix& x) const;   // X * M
  BlockDiagonal operator*(const BlockDiagonal& rhs) const;
  BlockDiagonal operator-(const BlockDiagonal& rhs) const;

 private:
  void require_compatible(const BlockDiagonal& rhs) const;

  std::vector<Matrix> blocks_;
  std::vector<Index> offsets_;
  Index dim_ = 0;
};

}  // namespace maskpredict
