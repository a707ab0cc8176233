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
#include <deque>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "maskpredict/masking.hpp"
#include "maskpredict/models.hpp"
#include "maskpredict/reduction.hpp"
#include "maskpredict/wire.hpp"

namespace maskpredict {

using TrainedModel = std::variant<SvmModel, NnModel>;

// Server-side material shared read-only by every session: the key, the
// projection W (uncentered, so that it is a pure linear map), the projected
// database W X and the model trained on it.
struct ServerContext {
  std::shared_ptr<const MaskKey> key;
  Projection projection;
  Matrix projected_db;  // p x n
  TrainedModel model;

  bool projection_fitted() const { return projection.w.size() > 0; }
};

// Pass an empty Projection (p = 0) for a server that has not fitted W yet;
// sessions against it fail at bundle preparation.
std::shared_ptr<const ServerContext> make_server_context(std::shared_ptr<const MaskKey> key,
                                                         Projection projection,
                                                         const Matrix& db_x,
                                                         TrainedModel model);

struct PartyOptions {
  int bits = 12;  // 2..32, or 64 for lossless transmission
  double alpha = kDefaultCoeffBound;
  std::uint64_t seed = 0;
};

struct Prediction {
  double score = 0.0;
  int label = 0;
};

enum class ClientStage { kInit, kSentEI1, kGotEII1, kGotEII2, kDone };
const char* to_string(ClientStage stage);

class Client {
 public:
  Client(std::shared_ptr<const MaskKey> key, Vector signal, const PartyOptions& opts);
  // Uses a caller-supplied B11 instead of deriving one.
  Client(std::shared_ptr<const MaskKey> key, Vector signal, const PartyOptions& opts,
         MaskShare forced_share);

  // E I.1: B11 t.
  WireMessage encrypt_signal();
  // E II.1 arrives: t* = B22^{-1} B11 t.
  void receive_remasked(const WireMessage& msg);
  // E II.2 arrives: W*, X_W*, A_I and the model.
  void receive_bundle(const WireMessage& msg);
  // t_W* = W* B11^{-1} t*, equal to A W t. Available once E II.2 arrived.
  Vector recover_projection() const;
  // E I.2: prediction in the masked feature space.
  Prediction predict();

  ClientStage stage() const { return stage_; }
  const MaskShare& share() const { return share_; }

 private:
  void require_stage(ClientStage expected, const char* action) const;

  std::shared_ptr<const MaskKey> key_;
  Vector signal_;
  PartyOptions opts_;
  MaskShare share_;
  ClientStage stage_ = ClientStage::kInit;
  Vector t_star_;
  Matrix w_star_;
  Matrix x_star_;
  Matrix a_inv_gram_;
  std::optional<ModelPayload> model_;
};

enum class ServerStage { kAwaitingEI1, kSentEII1, kSentEII2 };
const char* to_string(ServerStage stage);

// Test hooks that pin the per-session randomness.
struct ServerOverrides {
  std::optional<MaskShare> share;
  std::optional<Matrix> a;
  std::optional<std::vector<Index>> permutation;
};

class ServerSession {
 public:
  ServerSession(std::shared_ptr<const ServerContext> ctx, const PartyOptions& opts,
                ServerOverrides overrides = {});

  // E II.1: t* = B22^{-1} (received B11 t).
  WireMessage remask(const WireMessage& msg);
  // E II.2: {A W B22, A W X_pi, (A A^T)^{-1}} plus the permuted or transformed model.
  WireMessage prepare_bundle();

  ServerStage stage() const { return stage_; }
  const MaskShare& share() const { return share_; }
  const Matrix& a() const { return a_; }
  const Matrix& a_inv_gram() const { return a_inv_gram_; }
  const std::vector<Index>& permutation() const { return permutation_; }

 private:
  std::shared_ptr<const ServerContext> ctx_;
  PartyOptions opts_;
  MaskShare share_;
  Matrix a_;
  Matrix a_inv_gram_;
  std::vector<Index> permutation_;
  ServerStage stage_ = ServerStage::kAwaitingEI1;
};

// Samples a p x p Gaussian A (sigma <= 0 selects 1/sqrt(p)) with cond(A) at
// most 1e4, so that A A^T stays within the default condition limit.
// Resamples up to 16 times.
Matrix sample_session_matrix(Index p, double sigma, std::uint64_t seed);
std::vector<Index> sample_permutation(Index n, std::uint64_t seed);

// Ordered, reliable, in-memory pipe between the two parties.
class InMemoryDuplex {
 public:
  enum class Side { kClient, kServer };

  void send(Side from, Bytes frame);
  Bytes receive(Side at);
  std::size_t pending(Side at) const;

 private:
  std::deque<Bytes> to_client_;
  std::deque<Bytes> to_server_;
};

// Raised by run_session; keeps the kind of the underlying failure and names
// the protocol step where it happened.
class SessionError : public Error {
 public:
  SessionError(ErrorKind kind, std::string step, const std::string& what)
      : Error(kind, step + ": " + what), step_(std::move(step)) {}
  const std::string& step() const { return step_; }

 private:
  std::string step_;
};

struct StepTimings {
  double client_share_ms = 0.0;   // derive B11
  double server_setup_ms = 0.0;   // derive B22, sample A, A_I and pi
  double masking_ms = 0.0;        // B11 t and B22^{-1} (B11 t), both sides
  double bundle_ms = 0.0;         // W*, X_W*, model payload
  double prediction_ms = 0.0;     // t_W* recovery and decision
  double total_ms = 0.0;
};

struct SessionReport {
  Prediction encrypted;
  Prediction plaintext;
  // ||t_W* - A W t|| / ||A W t|| on the client's recovered vector.
  double central_identity_residual = 0.0;
  std::size_t bytes_ei1 = 0;
  std::size_t bytes_eii1 = 0;
  std::size_t bytes_eii2 = 0;
  std::size_t analytic_ei1 = 0;
  std::size_t analytic_eii1 = 0;
  std::size_t analytic_eii2 = 0;
  StepTimings timings;

  std::size_t total_bytes() const { return bytes_ei1 + bytes_eii1 + bytes_eii2; }
  bool labels_match() const { return encrypted.label == plaintext.label; }
};

struct SessionOptions {
  int bits = 12;
  double alpha = kDefaultCoeffBound;
  std::uint64_t seed = 0;
};

// Runs E I.1 -> E II.1 -> E II.2 -> E I.2 over an InMemoryDuplex, plus the
// plaintext pipeline for reference.
SessionReport run_session(const std::shared_ptr<const ServerContext>& ctx, const Vector& signal,
                          const SessionOptions& opts);

// Plaintext-path score of the server model on W t.
Prediction plaintext_prediction(const ServerContext& ctx, const Vector& signal);

}  // namespace maskpredict
