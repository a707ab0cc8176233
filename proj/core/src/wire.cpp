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

#include "maskpredict/wire.hpp"

#include <string>

#include "maskpredict/error.hpp"

namespace maskpredict {
namespace {

constexpr char kWireMagic[] = "MEPP";

void write_block(ByteWriter& w, const QuantizedBlock& b) {
  w.put_u32(static_cast<std::uint32_t>(b.rows));
  w.put_u32(static_cast<std::uint32_t>(b.cols));
  w.put_u8(static_cast<std::uint8_t>(b.bits));
  w.put_f64(b.scale);
  w.put_bytes(pack_codes(b.codes, b.bits));
}

QuantizedBlock read_block(ByteReader& r) {
  QuantizedBlock b;
  const std::size_t at = r.offset();
  b.rows = r.get_u32();
  b.cols = r.get_u32();
  b.bits = r.get_u8();
  if (b.bits != kRawBits && (b.bits < kMinBits || b.bits > kMaxBits)) {
    throw DecodeError("block bit width " + std::to_string(b.bits) + " not supported", at + 8);
  }
  b.scale = r.get_f64();
  const std::size_t count = static_cast<std::size_t>(b.rows) * static_cast<std::size_t>(b.cols);
  const std::size_t nbytes = packed_size(count, b.bits);
  if (r.remaining() < nbytes) throw DecodeError("truncated block codes", r.offset());
  b.codes = unpack_codes(r.get_bytes(nbytes), count, b.bits);
  return b;
}

std::size_t expected_blocks(MessageType t) { return t == MessageType::kEII2 ? 3 : 1; }

}  // namespace

const char* to_string(MessageType type) {
  switch (type) {
    case MessageType::kEI1: return "EI1";
    case MessageType::kEII1: return "EII1";
    case MessageType::kEII2: return "EII2";
  }
  return "unknown";
}

Bytes encode_message(const WireMessage& msg) {
  if (msg.blocks.size() != expected_blocks(msg.type)) {
    throw InvalidArgument(std::string("encode_message: wrong block count for ") +
                          to_string(msg.type));
  }
  if ((msg.type == MessageType::kEII2) != msg.model.has_value()) {
    throw InvalidArgument("encode_message: only EII2 carries a model payload");
  }
  ByteWriter w;
  w.put_magic(std::string_view(kWireMagic, 4));
  w.put_u8(kWireVersion);
  w.put_u8(static_cast<std::uint8_t>(msg.type));
  for (const auto& b : msg.blocks) write_block(w, b);
  if (msg.model) {
    if (const auto* svm = std::get_if<SvmPayload>(&*msg.model)) {
      w.put_u8(static_cast<std::uint8_t>(ModelKind::kSvm));
      write_svm_payload(w, *svm);
    } else {
      w.put_u8(static_cast<std::uint8_t>(ModelKind::kNn));
      write_nn_payload(w, std::get<EncNnModel>(*msg.model).masked);
    }
  }
  return std::move(w).take();
}

WireMessage decode_message(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kWireMagic, 4));
  const std::size_t version_at = r.offset();
  if (r.get_u8() != kWireVersion) throw DecodeError("unsupported wire version", version_at);
  const std::size_t type_at = r.offset();
  const std::uint8_t type = r.get_u8();
  if (type < 1 || type > 3) throw DecodeError("unknown message type", type_at);
  WireMessage msg;
  msg.type = static_cast<MessageType>(type);
  for (std::size_t i = 0; i < expected_blocks(msg.type); ++i) msg.blocks.push_back(read_block(r));
  if (msg.type == MessageType::kEII2) {
    const std::size_t kind_at = r.offset();
    const std::uint8_t kind = r.get_u8();
    if (kind == static_cast<std::uint8_t>(ModelKind::kSvm)) {
      msg.model = read_svm_payload(r);
    } else if (kind == static_cast<std::uint8_t>(ModelKind::kNn)) {
      msg.model = EncNnModel{read_nn_payload(r)};
    } else {
      throw DecodeError("unknown model kind", kind_at);
    }
  }
  r.expect_end();
  return msg;
}

std::size_t block_wire_size(Index rows, Index cols, int bits) {
  return kBlockHeaderSize + packed_size(static_cast<std::size_t>(rows * cols), bits);
}

std::size_t model_payload_wire_size(const ModelPayload& model) {
  if (const auto* svm = std::get_if<SvmPayload>(&model)) {
    return analytic_svm_model_size(svm->coeffs.size());
  }
  const auto& nn = std::get<EncNnModel>(model).masked;
  return analytic_nn_model_size(nn.p(), nn.hidden());
}

std::size_t analytic_ei1_size(Index q, int bits) {
  return kWireHeaderSize + block_wire_size(q, 1, bits);
}

std::size_t analytic_eii1_size(Index q, int bits) { return analytic_ei1_size(q, bits); }

std::size_t analytic_eii2_size(Index p, Index q, Index n, int bits,
                               std::size_t model_payload_size) {
  return kWireHeaderSize + block_wire_size(p, q, bits) + block_wire_size(p, n, bits) +
         block_wire_size(p, p, kRawBits) + model_payload_size;
}

std::size_t analytic_svm_model_size(Index n) { return 1 + svm_payload_size(n); }

std::size_t analytic_nn_model_size(Index p, Index hidden) {
  return 1 + nn_payload_size(p, hidden);
}

}  // namespace maskpredict
