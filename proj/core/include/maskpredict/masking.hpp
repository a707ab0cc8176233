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
#include <optional>
#include <vector>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/matcore.hpp"

namespace maskpredict {

inline constexpr double kDefaultCoeffBound = 10.0;
inline constexpr int kMaxResamples = 16;
// derive_share rejects a mask block whose condition estimate exceeds this
// multiple of the key block's own condition estimate. Quantized transport
// amplifies rounding error by roughly the mask condition number, and the
// rare draws whose polynomial nearly vanishes on an eigenvalue of B0 are
// cheap to redraw.
inline constexpr double kShareConditionFactor = 30.0;

// Default key entry scale: keeps the spectral radius of each Gaussian block
// below one so that high powers B0^j stay bounded and the derived masks
// remain well conditioned.
double default_key_sigma(Index block_dim);

// Shared root secret B0, optionally block diagonal.
struct MaskKey {
  BlockDiagonal b0;
  Index q = 0;
  Index block_size = 0;  // 0 means dense
  double sigma = 0.0;
  std::vector<EigReport> eig_reports;  // one per diagonal block
  std::vector<double> block_conditions;  // condition estimate per block

  Index block_dim() const { return block_size == 0 ? q : block_size; }
  std::size_t num_blocks() const { return b0.num_blocks(); }
};

struct KeygenOptions {
  Index q = 0;
  double sigma = 0.0;                // <= 0 selects default_key_sigma
  std::optional<Index> block_size;   // absent for a dense key
  bool shared_block = false;         // reuse one block B for every diagonal slot
  std::uint64_t seed = 0;
};

MaskKey keygen(const KeygenOptions& opts);

// Wraps an externally supplied B0 after checking the key invariants
// (distinct eigenvalues per block, invertible). Throws KeyGenerationFailure.
MaskKey make_key(BlockDiagonal b0, double sigma);

// One party's polynomial mask B_ii = sum_j b_j B0^j, cached with its inverse.
// Under a block key there is one coefficient vector per diagonal block.
struct MaskShare {
  std::vector<Vector> coeffs;
  BlockDiagonal mask;
  BlockDiagonal mask_inv;
  double alpha = 0.0;
};

// Coefficients for block `block` on resample attempt `attempt`. Depends only
// on its arguments, never on the key or on the other party's draw.
Vector sample_coefficients(Index length, double alpha, std::uint64_t seed,
                           std::size_t block, int attempt);

MaskShare derive_share(const MaskKey& key, double alpha, std::uint64_t seed);

// Builds a share from caller-chosen coefficients (one vector per block).
// Throws IllConditioned if the resulting mask cannot be inverted.
MaskShare share_from_coeffs(const MaskKey& key, std::vector<Vector> coeffs, double alpha);

// Wraps an arbitrary invertible mask. Used to force identity or other fixed
// masks in tests; the result carries no coefficients.
MaskShare share_from_mask(BlockDiagonal mask);

// Lemma-1 oracle: are the masks generated by b1 and b2 equal? Coefficients
// are concatenated across blocks (total length q).
bool uniqueness_oracle(const MaskKey& key, const Vector& b1, const Vector& b2);

// Same question answered through the eigenvalues: Lambda b1 == Lambda b2 with
// Lambda_{ij} = lambda_i^j, per block.
bool vandermonde_criterion(const MaskKey& key, const Vector& b1, const Vector& b2);

Bytes encode_key(const MaskKey& key);
MaskKey decode_key(std::span<const std::uint8_t> bytes);
void save_key(const MaskKey& key, const std::filesystem::path& path);
MaskKey load_key(const std::filesystem::path& path);

}  // namespace maskpredict
