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

#include "maskpredict/masking.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <string>

#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

constexpr char kKeyMagic[] = "MKEY";
constexpr std::uint8_t kKeyVersion = 1;
constexpr double kMaskEqualityTol = 1e-8;

struct BlockCertificate {
  EigReport eig;
  double condition = 0.0;
};

// Returns nullopt when the block violates the key invariants.
std::optional<BlockCertificate> certify_block(const Matrix& blk) {
  EigReport report = eig_distinctness_relative(blk, kEigenGapRelTol);
  if (!report.distinct) return std::nullopt;
  const double cond = condition_estimate(blk);
  if (!(cond <= kDefaultConditionLimit)) return std::nullopt;
  return BlockCertificate{std::move(report), cond};
}

double share_condition_limit(const MaskKey& key, std::size_t block) {
  if (block >= key.block_conditions.size()) return kDefaultConditionLimit;
  return std::min(kDefaultConditionLimit, kShareConditionFactor * key.block_conditions[block]);
}

}  // namespace

double default_key_sigma(Index block_dim) {
  if (block_dim <= 0) throw InvalidArgument("default_key_sigma: dimension must be positive");
  return 0.5 / std::sqrt(static_cast<double>(block_dim));
}

MaskKey keygen(const KeygenOptions& opts) {
  if (opts.q < 2) throw InvalidArgument("keygen: q must be at least 2");
  Index block_dim = opts.q;
  if (opts.block_size) {
    block_dim = make_block_spec(opts.q, *opts.block_size).block_size;
  }
  const double sigma = opts.sigma > 0.0 ? opts.sigma : default_key_sigma(block_dim);
  if (!std::isfinite(sigma)) throw InvalidArgument("keygen: sigma must be finite");
  const std::size_t num_blocks = static_cast<std::size_t>(opts.q / block_dim);

  MaskKey key;
  key.q = opts.q;
  key.block_size = opts.block_size ? *opts.block_size : 0;
  key.sigma = sigma;

  std::vector<Matrix> blocks;
  blocks.reserve(num_blocks);
  for (std::size_t i = 0; i < num_blocks; ++i) {
    if (opts.shared_block && i > 0) {
      blocks.push_back(blocks.front());
      key.eig_reports.push_back(key.eig_reports.front());
      key.block_conditions.push_back(key.block_conditions.front());
      continue;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxResamples && !accepted; ++attempt) {
      Matrix blk = gen_gaussian(block_dim, block_dim, sigma,
                                mix_seed(mix_seed(opts.seed, i), attempt));
      if (auto cert = certify_block(blk)) {
        key.eig_reports.push_back(std::move(cert->eig));
        key.block_conditions.push_back(cert->condition);
        blocks.push_back(std::move(blk));
        accepted = true;
      }
    }
    if (!accepted) {
      throw KeyGenerationFailure("keygen: block " + std::to_string(i) +
                                 " still degenerate after " +
                                 std::to_string(kMaxResamples) + " resamples");
    }
  }
  key.b0 = BlockDiagonal(std::move(blocks));
  return key;
}

MaskKey make_key(BlockDiagonal b0, double sigma) {
  MaskKey key;
  key.q = b0.dim();
  if (key.q < 2) throw InvalidArgument("make_key: q must be at least 2");
  key.block_size = b0.is_dense() ? 0 : b0.block(0).rows();
  for (const auto& blk : b0.blocks()) {
    if (!b0.is_dense() && blk.rows() != key.block_size) {
      throw InvalidArgument("make_key: blocks must share one size");
    }
    require_finite(blk, "key block");
    auto cert = certify_block(blk);
    if (!cert) {
      throw KeyGenerationFailure(
          "make_key: block has repeated eigenvalues or is ill-conditioned");
    }
    key.eig_reports.push_back(std::move(cert->eig));
    key.block_conditions.push_back(cert->condition);
  }
  key.sigma = sigma;
  key.b0 = std::move(b0);
  return key;
}

Vector sample_coefficients(Index length, double alpha, std::uint64_t seed,
                           std::size_t block, int attempt) {
  if (length <= 0) throw InvalidArgument("sample_coefficients: length must be positive");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw InvalidArgument("sample_coefficients: alpha must be positive");
  }
  Rng rng = make_rng(mix_seed(seed, block), static_cast<std::uint64_t>(attempt));
  // Open interval (-alpha, alpha): reject the measure-zero endpoint.
  std::uniform_real_distribution<double> uniform(-alpha, alpha);
  Vector out(length);
  for (Index j = 0; j < length; ++j) {
    double v;
    do {
      v = uniform(rng);
    } while (v == -alpha);
    out[j] = v;
  }
  return out;
}

MaskShare derive_share(const MaskKey& key, double alpha, std::uint64_t seed) {
  if (key.q == 0) throw InvalidArgument("derive_share: empty key");
  MaskShare share;
  share.alpha = alpha;
  std::vector<Matrix> masks;
  std::vector<Matrix> inverses;
  for (std::size_t i = 0; i < key.num_blocks(); ++i) {
    const Matrix& blk = key.b0.block(i);
    const double limit = share_condition_limit(key, i);
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxResamples && !accepted; ++attempt) {
      Vector c = sample_coefficients(blk.rows(), alpha, seed, i, attempt);
      Matrix m = mat_poly_eval(blk, c);
      try {
        Matrix inv = invert(m, limit);
        share.coeffs.push_back(std::move(c));
        masks.push_back(std::move(m));
        inverses.push_back(std::move(inv));
        accepted = true;
      } catch (const IllConditioned&) {
        // resample
      }
    }
    if (!accepted) {
      throw ShareDerivationFailure("derive_share: block " + std::to_string(i) +
                                   " mask singular after " +
                                   std::to_string(kMaxResamples) + " resamples");
    }
  }
  share.mask = BlockDiagonal(std::move(masks));
  share.mask_inv = BlockDiagonal(std::move(inverses));
  return share;
}

MaskShare share_from_coeffs(const MaskKey& key, std::vector<Vector> coeffs, double alpha) {
  if (coeffs.size() != key.num_blocks()) {
    throw InvalidArgument("share_from_coeffs: need one coefficient vector per block");
  }
  std::vector<Matrix> masks;
  std::vector<Matrix> inverses;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    if (coeffs[i].size() != key.b0.block(i).rows()) {
      throw InvalidArgument("share_from_coeffs: coefficient length must equal block size");
    }
    masks.push_back(mat_poly_eval(key.b0.block(i), coeffs[i]));
    inverses.push_back(invert(masks.back(), kDefaultConditionLimit));
  }
  MaskShare share;
  share.coeffs = std::move(coeffs);
  share.alpha = alpha;
  share.mask = BlockDiagonal(std::move(masks));
  share.mask_inv = BlockDiagonal(std::move(inverses));
  return share;
}

MaskShare share_from_mask(BlockDiagonal mask) {
  std::vector<Matrix> inverses;
  for (const auto& blk : mask.blocks()) inverses.push_back(invert(blk, kDefaultConditionLimit));
  MaskShare share;
  share.mask = std::move(mask);
  share.mask_inv = BlockDiagonal(std::move(inverses));
  return share;
}

namespace {

void check_oracle_args(const MaskKey& key, const Vector& b1, const Vector& b2) {
  if (b1.size() != b2.size() || b1.size() != key.q) {
    throw InvalidArgument("uniqueness oracle: coefficient vectors must have length q");
  }
}

}  // namespace

bool uniqueness_oracle(const MaskKey& key, const Vector& b1, const Vector& b2) {
  check_oracle_args(key, b1, b2);
  const Index d = key.block_dim();
  for (std::size_t i = 0; i < key.num_blocks(); ++i) {
    const Matrix& blk = key.b0.block(i);
    const Matrix m1 = mat_poly_eval(blk, Vector(b1.segment(i * d, d)));
    const Matrix m2 = mat_poly_eval(blk, Vector(b2.segment(i * d, d)));
    if (max_abs_diff(m1, m2) >= kMaskEqualityTol) return false;
  }
  return true;
}

bool vandermonde_criterion(const MaskKey& key, const Vector& b1, const Vector& b2) {
  check_oracle_args(key, b1, b2);
  const Index d = key.block_dim();
  for (std::size_t i = 0; i < key.num_blocks(); ++i) {
    const auto& lambdas = key.eig_reports[i].eigenvalues;
    for (const auto& lambda : lambdas) {
      // (Lambda (b1 - b2))_row = sum_j lambda^j (b1_j - b2_j)
      std::complex<double> acc = 0.0;
      std::complex<double> power = lambda;
      for (Index j = 0; j < d; ++j) {
        acc += power * (b1[i * d + j] - b2[i * d + j]);
        power *= lambda;
      }
      if (std::abs(acc) >= kMaskEqualityTol) return false;
    }
  }
  return true;
}

Bytes encode_key(const MaskKey& key) {
  ByteWriter w;
  w.put_magic(std::string_view(kKeyMagic, 4));
  w.put_u8(kKeyVersion);
  w.put_u32(static_cast<std::uint32_t>(key.q));
  w.put_u32(static_cast<std::uint32_t>(key.block_size));
  w.put_f64(key.sigma);
  const Index q = key.q;
  // Row-major dense B0; off-block entries are written as zeros.
  for (Index r = 0; r < q; ++r) {
    for (std::size_t b = 0; b < key.num_blocks(); ++b) {
      const Index off = key.b0.offset(b);
      const Index n = key.b0.block(b).rows();
      if (r >= off && r < off + n) {
        for (Index c = 0; c < q; ++c) {
          const bool inside = c >= off && c < off + n;
          w.put_f64(inside ? key.b0.block(b)(r - off, c - off) : 0.0);
        }
        break;
      }
    }
  }
  return std::move(w).take();
}

MaskKey decode_key(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kKeyMagic, 4));
  const std::size_t version_at = r.offset();
  if (r.get_u8() != kKeyVersion) throw DecodeError("unsupported key version", version_at);
  const std::size_t dims_at = r.offset();
  const Index q = r.get_u32();
  const Index block_size = r.get_u32();
  const double sigma = r.get_f64();
  if (q < 2) throw DecodeError("key dimension must be at least 2", dims_at);
  if (block_size != 0 && q % block_size != 0) {
    throw DecodeError("block size does not divide q", dims_at);
  }
  if (r.remaining() != static_cast<std::size_t>(q * q) * 8) {
    throw DecodeError("key body length does not match q", r.offset());
  }
  Matrix dense(q, q);
  for (Index i = 0; i < q; ++i) {
    for (Index j = 0; j < q; ++j) dense(i, j) = r.get_f64();
  }
  r.expect_end();
  if (block_size == 0) return make_key(BlockDiagonal::dense(std::move(dense)), sigma);
  std::vector<Matrix> blocks;
  for (Index off = 0; off < q; off += block_size) {
    blocks.push_back(dense.block(off, off, block_size, block_size));
  }
  BlockDiagonal b0(std::move(blocks));
  if (max_abs_diff(b0.to_dense(), dense) != 0.0) {
    throw DecodeError("nonzero entries outside the diagonal blocks", 0);
  }
  return make_key(std::move(b0), sigma);
}

void save_key(const MaskKey& key, const std::filesystem::path& path) {
  write_file(path, encode_key(key));
}

MaskKey load_key(const std::filesystem::path& path) { return decode_key(read_file(path)); }

}  // namespace maskpredict
