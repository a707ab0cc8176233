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
#include <memory>
#include <string>
#include <string_view>

#include "maskpredict/masking.hpp"
#include "maskpredict/models.hpp"
#include "maskpredict/protocol.hpp"
#include "maskpredict/reduction.hpp"

namespace maskpredict {

enum class ModelType : std::uint8_t { kSvm = 1, kNn = 2 };

const char* to_string(ModelType type);
ModelType parse_model_type(std::string_view name);

// Everything needed to stand up a synthetic server and run sessions against
// it. Serialized as key=value lines.
struct SessionConfig {
  Index q = 128;
  Index p = 16;
  Index n = 500;
  int classes = 2;
  int bits = 12;
  Kernel kernel = Kernel::rbf(1.0);
  ProjectionMethod method = ProjectionMethod::kPca;
  ModelType model = ModelType::kSvm;
  Index block_size = 0;  // 0 = dense key
  bool shared_block = false;
  double alpha = kDefaultCoeffBound;
  double key_sigma = 0.0;  // <= 0 selects default_key_sigma
  std::uint64_t key_seed = 1;
  std::uint64_t data_seed = 2;
  std::uint64_t session_seed = 3;
  Index hidden = 16;
  int epochs = 500;
  double lr = 0.1;
  double svm_c = 1.0;
};

// Sets one field from its textual value. Unknown keys and malformed values
// throw InvalidArgument. The key `seed` sets all three seeds from one value.
void apply_config_value(SessionConfig& cfg, std::string_view key, std::string_view value);
// Lines are key=value; blank lines and lines starting with '#' are skipped.
SessionConfig parse_config(std::string_view text, SessionConfig base = {});
SessionConfig load_config(const std::filesystem::path& path, SessionConfig base = {});
std::string format_config(const SessionConfig& cfg);
// Checks cross-field preconditions before any work is done.
void validate(const SessionConfig& cfg);

// Binary target used for training: class 0 -> +1, every other class -> -1.
int binary_label(int class_index);

struct Pipeline {
  SessionConfig config;
  std::shared_ptr<const MaskKey> key;
  SignalDatabase db;
  std::shared_ptr<const ServerContext> server;
};

MaskKey make_config_key(const SessionConfig& cfg);
Projection fit_config_projection(const SessionConfig& cfg, const SignalDatabase& db);
TrainedModel train_config_model(const SessionConfig& cfg, const Matrix& z,
                                const std::vector<int>& labels);

// synth -> fit W (uncentered) -> project -> train -> server context. Uses
// `key` when given, otherwise generates one from the config.
Pipeline build_pipeline(const SessionConfig& cfg, std::shared_ptr<const MaskKey> key = nullptr);

// Fresh client signals drawn from the same generator family as the database.
SignalDatabase client_signals(const SessionConfig& cfg, Index count, std::uint64_t seed);

}  // namespace maskpredict
