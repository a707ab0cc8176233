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
#include <string>
#include <string_view>
#include <vector>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/matcore.hpp"

namespace maskpredict {

enum class ProjectionMethod : std::uint8_t { kPca = 1, kLda = 2, kIca = 3 };

const char* to_string(ProjectionMethod method);
ProjectionMethod parse_projection_method(std::string_view name);

// Labeled signals stored as columns of a q x n matrix. Labels are class
// indices in [0, num_classes); an unlabeled database has no labels.
struct SignalDatabase {
  Matrix x;
  std::vector<int> labels;
  int num_classes = 0;

  Index q() const { return x.rows(); }
  Index n() const { return x.cols(); }
};

void validate(const SignalDatabase& db);

// Linear map z = W (x - mean). `mean` is zero when centering is disabled,
// which makes project() the pure linear map used by the masking protocol.
struct Projection {
  Matrix w;  // p x q
  ProjectionMethod method = ProjectionMethod::kPca;
  Vector mean;
  bool centered = false;
  Vector scores;  // per-row: variance (PCA), Rayleigh quotient (LDA), negentropy (ICA)
  std::vector<std::string> warnings;

  Index p() const { return w.rows(); }
  Index q() const { return w.cols(); }
};

struct FitOptions {
  // Store the database mean in the projection and subtract it in project().
  bool center = true;
};

struct LdaOptions {
  bool center = true;
  // Strict caps p at classes - 1. Relaxed mode allows p up to q; the extra
  // rows are the next generalized eigenvectors (quotient ~ 0).
  bool strict = true;
};

struct IcaOptions {
  bool center = true;
  int max_iter = 500;
  double tol = 1e-6;
  // Whitening dimension; 0 keeps every direction of nonzero variance.
  Index whiten_dim = 0;
  std::uint64_t seed = 0;
};

Projection fit_pca(const SignalDatabase& db, Index p, const FitOptions& opts = {});
Projection fit_lda(const SignalDatabase& db, Index p, const LdaOptions& opts = {});
Projection fit_ica(const SignalDatabase& db, Index p, const IcaOptions& opts = {});

Vector project(const Projection& proj, const Vector& x);
Matrix project_columns(const Projection& proj, const Matrix& x);

// Class k is a fixed two-harmonic waveform at base frequency 2 + 3k cycles
// per window, jittered in amplitude and phase, plus white noise; every column
// is scaled to unit Euclidean norm. Labels cycle 0, 1, ..., classes - 1.
// The class waveforms are fixed; the seed drives only the per-column draws.
SignalDatabase synth_dataset(Index n, Index q, int classes, std::uint64_t seed);

Bytes encode_database(const SignalDatabase& db);
SignalDatabase decode_database(std::span<const std::uint8_t> bytes);
void save_database(const SignalDatabase& db, const std::filesystem::path& path);
SignalDatabase load_database(const std::filesystem::path& path);

}  // namespace maskpredict
