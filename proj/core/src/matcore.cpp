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

#include "maskpredict/matcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    throw InvalidArgument(std::string(what) + " contains NaN or Inf");
  }
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidArgument("max_abs_diff: shape mismatch");
  }
  if (a.size() == 0) return 0.0;
  return (a - b).cwiseAbs().maxCoeff();
}

Matrix gen_gaussian(Index rows, Index cols, double sigma, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0) {
    throw InvalidArgument("gen_gaussian: dimensions must be positive");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("gen_gaussian: sigma must be positive and finite");
  }
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  Matrix out(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = normal(rng);
  }
  return out;
}

Matrix mat_poly_eval(const Matrix& b, std::span<const double> coeffs) {
  if (b.rows() != b.cols()) {
    throw InvalidArgument("mat_poly_eval: matrix must be square");
  }
  if (coeffs.empty()) {
    throw InvalidArgument("mat_poly_eval: need at least one coefficient");
  }
  const Index n = b.rows();
  // acc = c_d I; acc <- B acc + c_j I for j = d-1..1; result = B acc.
  Matrix acc = Matrix::Identity(n, n) * coeffs.back();
  Matrix tmp(n, n);
  for (std::size_t j = coeffs.size() - 1; j-- > 0;) {
    tmp.noalias() = b * acc;
    acc.swap(tmp);
    acc.diagonal().array() += coeffs[j];
  }
  tmp.noalias() = b * acc;
  return tmp;
}

Matrix block_diag_compose(std::span<const Matrix> blocks) {
  if (blocks.empty()) {
    throw InvalidArgument("block_diag_compose: empty block list");
  }
  Index dim = 0;
  for (const auto& blk : blocks) {
    if (blk.rows() != blk.cols() || blk.rows() == 0) {
      throw InvalidArgument("block_diag_compose: blocks must be square and nonempty");
    }
    dim += blk.rows();
  }
  Matrix out = Matrix::Zero(dim, dim);
  Index off = 0;
  for (const auto& blk : blocks) {
    out.block(off, off, blk.rows(), blk.cols()) = blk;
    off += blk.rows();
  }
  return out;
}

double condition_estimate(const Matrix& b) {
  if (b.rows() != b.cols() || b.rows() == 0) {
    throw InvalidArgument("condition_estimate: matrix must be square");
  }
  Eigen::PartialPivLU<Matrix> lu(b);
  const double rcond = lu.rcond();
  if (!(rcond > 0.0) || !std::isfinite(rcond)) {
    return std::numeric_limits<double>::infinity();
  }
  return 1.0 / rcond;
}

Matrix invert(const Matrix& b, double cond_limit) {
  if (b.rows() != b.cols() || b.rows() == 0) {
    throw InvalidArgument("invert: matrix must be square");
  }
  if (!(cond_limit > 0.0)) {
    throw InvalidArgument("invert: cond_limit must be positive");
  }
  require_finite(b, "invert input");
  Eigen::PartialPivLU<Matrix> lu(b);
  const double rcond = lu.rcond();
  const double cond =
      (rcond > 0.0 && std::isfinite(rcond)) ? 1.0 / rcond
                                            : std::numeric_limits<double>::infinity();
  if (!(cond <= cond_limit)) {
    throw IllConditioned("invert: condition estimate " + std::to_string(cond) +
                             " exceeds limit " + std::to_string(cond_limit),
                         cond);
  }
  Matrix inv = lu.inverse();
  const Index n = b.rows();
  Matrix residual = b * inv;
  residual.diagonal().array() -= 1.0;
  const double res = residual.cwiseAbs().maxCoeff();
  if (!inv.allFinite() || !(res < kInverseResidualTol)) {
    throw IllConditioned("invert: inverse residual " + std::to_string(res) +
                             " too large for n=" + std::to_string(n),
                         cond);
  }
  return inv;
}

namespace {

EigReport spectrum(const Matrix& b) {
  if (b.rows() != b.cols() || b.rows() == 0) {
    throw InvalidArgument("eig_distinctness: matrix must be square");
  }
  Eigen::EigenSolver<Matrix> solver(b, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success) {
    throw NumericalFailure("eig_distinctness: eigen-solver did not converge");
  }
  EigReport report;
  const auto& ev = solver.eigenvalues();
  report.eigenvalues.assign(ev.data(), ev.data() + ev.size());
  double gap = std::numeric_limits<double>::infinity();
  double radius = 0.0;
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    radius = std::max(radius, std::abs(report.eigenvalues[i]));
    for (std::size_t j = i + 1; j < report.eigenvalues.size(); ++j) {
      gap = std::min(gap, std::abs(report.eigenvalues[i] - report.eigenvalues[j]));
    }
  }
  report.min_pairwise_gap = gap;
  report.spectral_radius = radius;
  return report;
}

}  // namespace

EigReport eig_distinctness(const Matrix& b, double gap_tol) {
  if (!(gap_tol > 0.0)) {
    throw InvalidArgument("eig_distinctness: gap_tol must be positive");
  }
  EigReport report = spectrum(b);
  report.distinct = report.min_pairwise_gap > gap_tol;
  return report;
}

EigReport eig_distinctness_relative(const Matrix& b, double rel_tol) {
  if (!(rel_tol > 0.0)) {
    throw InvalidArgument("eig_distinctness: rel_tol must be positive");
  }
  EigReport report = spectrum(b);
  report.distinct = report.min_pairwise_gap > rel_tol * report.spectral_radius;
  return report;
}

BlockSpec make_block_spec(Index total_dim, Index block_size) {
  if (total_dim <= 0 || block_size <= 0) {
    throw InvalidArgument("block spec: dimensions must be positive");
  }
  if (total_dim % block_size != 0) {
    throw InvalidArgument("block spec: block size " + std::to_string(block_size) +
                          " does not divide dimension " + std::to_string(total_dim));
  }
  return BlockSpec{total_dim, block_size};
}

BlockDiagonal::BlockDiagonal(std::vector<Matrix> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw InvalidArgument("BlockDiagonal: empty block list");
  offsets_.reserve(blocks_.size());
  for (const auto& blk : blocks_) {
    if (blk.rows() != blk.cols() || blk.rows() == 0) {
      throw InvalidArgument("BlockDiagonal: blocks must be square and nonempty");
    }
    offsets_.push_back(dim_);
    dim_ += blk.rows();
  }
}

BlockDiagonal BlockDiagonal::dense(Matrix m) {
  std::vector<Matrix> blocks;
  blocks.push_back(std::move(m));
  return BlockDiagonal(std::move(blocks));
}

Matrix BlockDiagonal::to_dense() const { return block_diag_compose(blocks_); }

Vector BlockDiagonal::apply(const Vector& x) const {
  if (x.size() != dim_) throw InvalidArgument("BlockDiagonal::apply: dimension mismatch");
  Vector out(dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i].rows();
    out.segment(offsets_[i], n).noalias() = blocks_[i] * x.segment(offsets_[i], n);
  }
  return out;
}

Matrix BlockDiagonal::left_multiply(const Matrix& x) const {
  if (x.rows() != dim_) {
    throw InvalidArgument("BlockDiagonal::left_multiply: dimension mismatch");
  }
  Matrix out(dim_, x.cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i].rows();
    out.middleRows(offsets_[i], n).noalias() = blocks_[i] * x.middleRows(offsets_[i], n);
  }
  return out;
}

Matrix BlockDiagonal::right_multiply(const Matrix& x) const {
  if (x.cols() != dim_) {
    throw InvalidArgument("BlockDiagonal::right_multiply: dimension mismatch");
  }
  Matrix out(x.rows(), dim_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const Index n = blocks_[i].rows();
    out.middleCols(offsets_[i], n).noalias() = x.middleCols(offsets_[i], n) * blocks_[i];
  }
  return out;
}

void BlockDiagonal::require_compatible(const BlockDiagonal& rhs) const {
  if (blocks_.size() != rhs.blocks_.size()) {
    throw InvalidArgument("BlockDiagonal: block structures differ");
  }
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    if (blocks_[i].rows() != rhs.blocks_[i].rows()) {
      throw InvalidArgument("BlockDiagonal: block sizes differ");
    }
  }
}

BlockDiagonal BlockDiagonal::operator*(const BlockDiagonal& rhs) const {
  require_compatible(rhs);
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) out.push_back(blocks_[i] * rhs.blocks_[i]);
  return BlockDiagonal(std::move(out));
}

BlockDiagonal BlockDiagonal::operator-(const BlockDiagonal& rhs) const {
  require_compatible(rhs);
  std::vector<Matrix> out;
  out.reserve(blocks_.size());
  for (std::size_t i = 0; i < blocks_.size(); ++i) out.push_back(blocks_[i] - rhs.blocks_[i]);
  return BlockDiagonal(std::move(out));
}

}  // namespace maskpredict
