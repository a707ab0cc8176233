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

#include "maskpredict/quantize.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "maskpredict/error.hpp"

namespace maskpredict {
namespace {

void check_bits(int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw InvalidArgument("quantize: bits=" + std::to_string(bits) + " outside [2, 32]");
  }
}

double max_code(int bits) { return std::ldexp(1.0, bits - 1) - 1.0; }

double cosine(const Vector& a, const Vector& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

}  // namespace

QuantizedBlock quantize(const Matrix& m, int bits) {
  check_bits(bits);
  require_finite(m, "quantize input");
  QuantizedBlock q;
  q.rows = m.rows();
  q.cols = m.cols();
  q.bits = bits;
  q.scale = m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
  q.codes.resize(static_cast<std::size_t>(m.size()));
  const double factor = q.scale > 0.0 ? max_code(bits) / q.scale : 0.0;
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      q.codes[k++] = static_cast<std::int64_t>(std::llround(m(i, j) * factor));
    }
  }
  return q;
}

QuantizedBlock raw_block(const Matrix& m) {
  require_finite(m, "raw block input");
  QuantizedBlock q;
  q.rows = m.rows();
  q.cols = m.cols();
  q.bits = kRawBits;
  q.scale = 1.0;
  q.codes.resize(static_cast<std::size_t>(m.size()));
  std::size_t k = 0;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) q.codes[k++] = std::bit_cast<std::int64_t>(m(i, j));
  }
  return q;
}

QuantizedBlock encode_block_values(const Matrix& m, int bits) {
  return bits == kRawBits ? raw_block(m) : quantize(m, bits);
}

Matrix dequantize(const QuantizedBlock& block) {
  if (static_cast<Index>(block.codes.size()) != block.rows * block.cols) {
    throw InvalidArgument("dequantize: code count does not match dimensions");
  }
  Matrix m(block.rows, block.cols);
  std::size_t k = 0;
  if (block.is_raw()) {
    for (Index i = 0; i < block.rows; ++i) {
      for (Index j = 0; j < block.cols; ++j) m(i, j) = std::bit_cast<double>(block.codes[k++]);
    }
    return m;
  }
  check_bits(block.bits);
  const double step = block.scale > 0.0 ? block.scale / max_code(block.bits) : 0.0;
  for (Index i = 0; i < block.rows; ++i) {
    for (Index j = 0; j < block.cols; ++j) m(i, j) = static_cast<double>(block.codes[k++]) * step;
  }
  return m;
}

double quantization_step(double scale, int bits) {
  check_bits(bits);
  return scale / max_code(bits);
}

std::size_t packed_size(std::size_t count, int bits) {
  return (count * static_cast<std::size_t>(bits) + 7) / 8;
}

Bytes pack_codes(std::span<const std::int64_t> codes, int bits) {
  Bytes out;
  out.reserve(packed_size(codes.size(), bits));
  if (bits == kRawBits) {
    for (std::int64_t c : codes) {
      const auto u = static_cast<std::uint64_t>(c);
      for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    return out;
  }
  check_bits(bits);
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  std::uint64_t acc = 0;
  int filled = 0;
  for (std::int64_t c : codes) {
    acc |= (static_cast<std::uint64_t>(c) & mask) << filled;
    filled += bits;
    while (filled >= 8) {
      out.push_back(static_cast<std::uint8_t>(acc));
      acc >>= 8;
      filled -= 8;
    }
  }
  if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc));
  return out;
}

std::vector<std::int64_t> unpack_codes(std::span<const std::uint8_t> bytes, std::size_t count,
                                       int bits) {
  if (bytes.size() != packed_size(count, bits)) {
    throw InvalidArgument("unpack_codes: byte count does not match code count");
  }
  std::vector<std::int64_t> codes(count);
  if (bits == kRawBits) {
    for (std::size_t k = 0; k < count; ++k) {
      std::uint64_t u = 0;
      for (int i = 0; i < 8; ++i) u |= std::uint64_t{bytes[8 * k + i]} << (8 * i);
      codes[k] = static_cast<std::int64_t>(u);
    }
    return codes;
  }
  check_bits(bits);
  const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
  const std::uint64_t sign = std::uint64_t{1} << (bits - 1);
  std::uint64_t acc = 0;
  int filled = 0;
  std::size_t pos = 0;
  for (std::size_t k = 0; k < count; ++k) {
    while (filled < bits) {
      acc |= std::uint64_t{bytes[pos++]} << filled;
      filled += 8;
    }
    const std::uint64_t v = acc & mask;
    acc >>= bits;
    filled -= bits;
    codes[k] = (v & sign) ? static_cast<std::int64_t>(v) - static_cast<std::int64_t>(mask) - 1
                          : static_cast<std::int64_t>(v);
  }
  return codes;
}

PrecisionMeasures precision_measures(const Matrix& d, const Matrix& d_tilde, const Vector& t,
                                     const Vector& t_tilde) {
  if (d.rows() != d_tilde.rows() || d.cols() != d_tilde.cols() || t.size() != t_tilde.size() ||
      t.size() != d.rows()) {
    throw InvalidArgument("precision_measures: dimension mismatch");
  }
  PrecisionMeasures out;
  out.abs_diff = max_abs_diff(d, d_tilde);
  for (Index i = 0; i < d.cols(); ++i) {
    const double e = (t - d.col(i)).norm();
    const double e_tilde = (t_tilde - d_tilde.col(i)).norm();
    out.euclidean = std::max(out.euclidean, std::abs(e_tilde - e));
    const double c = cosine(t, d.col(i));
    const double c_tilde = cosine(t_tilde, d_tilde.col(i));
    out.cosine = std::max(out.cosine, std::abs(c_tilde - c));
  }
  return out;
}

}  // namespace maskpredict
