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
#include <span>
#include <vector>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/matcore.hpp"

namespace maskpredict {

inline constexpr int kMinBits = 2;
inline constexpr int kMaxBits = 32;
// Bit width that marks a block carried losslessly as IEEE-754 doubles.
inline constexpr int kRawBits = 64;

// Symmetric per-matrix fixed point: code = round(v * (2^{bits-1} - 1) / s)
// with s = max |v|. Codes are row-major. For raw blocks (bits == 64) the
// codes are the bit patterns of the doubles and scale is 1.
struct QuantizedBlock {
  Index rows = 0;
  Index cols = 0;
  int bits = 0;
  double scale = 0.0;
  std::vector<std::int64_t> codes;

  bool is_raw() const { return bits == kRawBits; }
  friend bool operator==(const QuantizedBlock&, const QuantizedBlock&) = default;
};

QuantizedBlock quantize(const Matrix& m, int bits);
QuantizedBlock raw_block(const Matrix& m);
// quantize() for bits in [2, 32], raw_block() for bits == 64.
QuantizedBlock encode_block_values(const Matrix& m, int bits);
Matrix dequantize(const QuantizedBlock& block);

// Worst-case reconstruction error s / (2^{bits-1} - 1).
double quantization_step(double scale, int bits);

// ceil(count * bits / 8) bytes of little-endian-packed two's-complement codes.
Bytes pack_codes(std::span<const std::int64_t> codes, int bits);
std::vector<std::int64_t> unpack_codes(std::span<const std::uint8_t> bytes, std::size_t count,
                                       int bits);
std::size_t packed_size(std::size_t count, int bits);

struct PrecisionMeasures {
  double abs_diff = 0.0;     // T_A: max elementwise |d~ - d|
  double euclidean = 0.0;    // T_B: max over columns of the change in distance to t
  double cosine = 0.0;       // T_C: max over columns of the change in cosine similarity
};

// D and D~ hold records as columns; t and t~ have the column dimension.
PrecisionMeasures precision_measures(const Matrix& d, const Matrix& d_tilde, const Vector& t,
                                     const Vector& t_tilde);

}  // namespace maskpredict
