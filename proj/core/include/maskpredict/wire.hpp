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
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/models.hpp"
#include "maskpredict/quantize.hpp"

namespace maskpredict {

// Wire layout, all integers little-endian:
//   "MEPP" | version u8 = 1 | msg_type u8
//   per block: rows u32 | cols u32 | bits u8 | scale f64 | ceil(rows*cols*bits/8) code bytes
//   EII2 only, after its three blocks: model kind u8 (1 = SVM, 2 = NN) | model body
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderSize = 6;
inline constexpr std::size_t kBlockHeaderSize = 17;

enum class MessageType : std::uint8_t { kEI1 = 1, kEII1 = 2, kEII2 = 3 };

const char* to_string(MessageType type);

enum class ModelKind : std::uint8_t { kSvm = 1, kNn = 2 };

// SVM: permuted alpha_i y_i, bias and kernel. NN: weights already
// transformed by the session's A.
using ModelPayload = std::variant<SvmPayload, EncNnModel>;

// EI1 and EII1 carry one q x 1 block. EII2 carries W*, X_W*, A_I and a model.
struct WireMessage {
  MessageType type = MessageType::kEI1;
  std::vector<QuantizedBlock> blocks;
  std::optional<ModelPayload> model;
};

Bytes encode_message(const WireMessage& msg);
WireMessage decode_message(std::span<const std::uint8_t> bytes);

std::size_t block_wire_size(Index rows, Index cols, int bits);
std::size_t model_payload_wire_size(const ModelPayload& model);

// Closed-form message sizes for a session with signal dimension q, projected
// dimension p, n records and the given transmitted bit width. A_I always
// travels raw.
std::size_t analytic_ei1_size(Index q, int bits);
std::size_t analytic_eii1_size(Index q, int bits);
std::size_t analytic_eii2_size(Index p, Index q, Index n, int bits, std::size_t model_payload_size);
std::size_t analytic_svm_model_size(Index n);
std::size_t analytic_nn_model_size(Index p, Index hidden);

}  // namespace maskpredict
