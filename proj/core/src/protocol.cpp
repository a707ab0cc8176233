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

#include "maskpredict/protocol.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <utility>

#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

// Bound on cond(A) so that A_I = (A A^T)^{-1} stays under the default limit.
const double kSessionMatrixCondLimit = std::sqrt(kDefaultConditionLimit);

constexpr std::uint64_t kStreamClient = 1;
constexpr std::uint64_t kStreamServer = 2;
constexpr std::uint64_t kStreamShare = 1;
constexpr std::uint64_t kStreamA = 2;
constexpr std::uint64_t kStreamPerm = 3;

void check_bits(int bits) {
  if (bits != kRawBits && (bits < kMinBits || bits > kMaxBits)) {
    throw InvalidArgument("bits must be in [2, 32] or 64");
  }
}

const QuantizedBlock& single_vector_block(const WireMessage& msg, MessageType type, Index q) {
  if (msg.type != type) {
    throw ProtocolError(std::string("expected ") + to_string(type) + " message, got " +
                        to_string(msg.type));
  }
  if (msg.blocks.size() != 1 || msg.model) {
    throw ProtocolError(std::string(to_string(type)) + " must carry exactly one block");
  }
  const auto& b = msg.blocks.front();
  if (b.rows != q || b.cols != 1) {
    throw ProtocolError(std::string(to_string(type)) + " block is " + std::to_string(b.rows) +
                        "x" + std::to_string(b.cols) + ", expected " + std::to_string(q) + "x1");
  }
  return b;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

template <typename F>
auto run_step(const char* step, F&& fn) {
  try {
    return fn();
  } catch (const SessionError&) {
    throw;
  } catch (const Error& e) {
    throw SessionError(e.kind(), step, e.what());
  }
}

}  // namespace

std::shared_ptr<const ServerContext> make_server_context(std::shared_ptr<const MaskKey> key,
                                                         Projection projection,
                                                         const Matrix& db_x,
                                                         TrainedModel model) {
  if (!key) throw InvalidArgument("server context: missing key");
  auto ctx = std::make_shared<ServerContext>();
  ctx->key = std::move(key);
  if (projection.w.size() > 0) {
    if (projection.centered) {
      throw InvalidArgument(
          "server context: projection must be uncentered; masking transports W x only");
    }
    if (projection.q() != ctx->key->q) {
      throw InvalidArgument("server context: projection input dimension differs from key q");
    }
    if (db_x.rows() != ctx->key->q) {
      throw InvalidArgument("server context: database dimension differs from key q");
    }
    ctx->projected_db = project_columns(projection, db_x);
    const Index p = projection.p();
    const Index n = db_x.cols();
    if (const auto* svm = std::get_if<SvmModel>(&model)) {
      if (svm->p() != p || svm->n() != n || svm->coeffs.size() != n) {
        throw InvalidArgument("server context: SVM model does not match the projected database");
      }
      validate(svm->kernel);
    } else {
      const auto& nn = std::get<NnModel>(model);
      validate(nn);
      if (nn.p() != p) throw InvalidArgument("server context: NN input dimension differs from p");
    }
  }
  ctx->projection = std::move(projection);
  ctx->model = std::move(model);
  return ctx;
}

const char* to_string(ClientStage stage) {
  switch (stage) {
    case ClientStage::kInit: return "Init";
    case ClientStage::kSentEI1: return "SentEI1";
    case ClientStage::kGotEII1: return "GotEII1";
    case ClientStage::kGotEII2: return "GotEII2";
    case ClientStage::kDone: return "Done";
  }
  return "unknown";
}

const char* to_string(ServerStage stage) {
  switch (stage) {
    case ServerStage::kAwaitingEI1: return "AwaitingEI1";
    case ServerStage::kSentEII1: return "SentEII1";
    case ServerStage::kSentEII2: return "SentEII2";
  }
  return "unknown";
}

Client::Client(std::shared_ptr<const MaskKey> key, Vector signal, const PartyOptions& opts)
    : key_(std::move(key)), signal_(std::move(signal)), opts_(opts) {
  if (!key_) throw InvalidArgument("client: missing key");
  share_ = derive_share(*key_, opts_.alpha, opts_.seed);
  if (signal_.size() != key_->q) throw InvalidArgument("client: signal length differs from q");
  check_bits(opts_.bits);
}

Client::Client(std::shared_ptr<const MaskKey> key, Vector signal, const PartyOptions& opts,
               MaskShare forced_share)
    : key_(std::move(key)), signal_(std::move(signal)), opts_(opts),
      share_(std::move(forced_share)) {
  if (!key_) throw InvalidArgument("client: missing key");
  if (signal_.size() != key_->q || share_.mask.dim() != key_->q) {
    throw InvalidArgument("client: signal or share dimension differs from q");
  }
  check_bits(opts_.bits);
}

void Client::require_stage(ClientStage expected, const char* action) const {
  if (stage_ != expected) {
    throw ProtocolOrderViolation(std::string("client cannot ") + action + " in stage " +
                                 to_string(stage_) + " (requires " + to_string(expected) + ")");
  }
}

WireMessage Client::encrypt_signal() {
  require_stage(ClientStage::kInit, "send E I.1");
  WireMessage msg;
  msg.type = MessageType::kEI1;
  msg.blocks.push_back(encode_block_values(share_.mask.apply(signal_), opts_.bits));
  stage_ = ClientStage::kSentEI1;
  return msg;
}

void Client::receive_remasked(const WireMessage& msg) {
  require_stage(ClientStage::kSentEI1, "accept E II.1");
  t_star_ = dequantize(single_vector_block(msg, MessageType::kEII1, key_->q)).col(0);
  stage_ = ClientStage::kGotEII1;
}

void Client::receive_bundle(const WireMessage& msg) {
  require_stage(ClientStage::kGotEII1, "accept E II.2");
  if (msg.type != MessageType::kEII2 || msg.blocks.size() != 3 || !msg.model) {
    throw ProtocolError("malformed E II.2 bundle");
  }
  const auto& w = msg.blocks[0];
  const auto& x = msg.blocks[1];
  const auto& ai = msg.blocks[2];
  const Index p = w.rows;
  if (p == 0 || w.cols != key_->q || x.rows != p || ai.rows != p || ai.cols != p) {
    throw ProtocolError("E II.2 block dimensions are inconsistent");
  }
  if (const auto* svm = std::get_if<SvmPayload>(&*msg.model)) {
    if (svm->coeffs.size() != x.cols) {
      throw ProtocolError("SVM coefficient count differs from record count");
    }
  } else if (std::get<EncNnModel>(*msg.model).masked.p() != p) {
    throw ProtocolError("NN input dimension differs from p");
  }
  w_star_ = dequantize(w);
  x_star_ = dequantize(x);
  a_inv_gram_ = dequantize(ai);
  model_ = *msg.model;
  stage_ = ClientStage::kGotEII2;
}

Vector Client::recover_projection() const {
  if (stage_ != ClientStage::kDone) require_stage(ClientStage::kGotEII2, "recover t_W*");
  return w_star_ * share_.mask_inv.apply(t_star_);
}

Prediction Client::predict() {
  require_stage(ClientStage::kGotEII2, "predict");
  const Vector t_w_star = recover_projection();
  Prediction out;
  if (const auto* svm = std::get_if<SvmPayload>(&*model_)) {
    out.score = svm_decide_encrypted(*svm, x_star_, t_w_star, a_inv_gram_);
    out.label = svm_label(out.score);
  } else {
    const auto& nn = std::get<EncNnModel>(*model_);
    out.score = nn_forward(nn, t_w_star);
    out.label = nn_label(nn.masked, out.score);
  }
  stage_ = ClientStage::kDone;
  return out;
}

Matrix sample_session_matrix(Index p, double sigma, std::uint64_t seed) {
  if (p < 1) throw InvalidArgument("session matrix: p must be positive");
  const double s = sigma > 0.0 ? sigma : 1.0 / std::sqrt(static_cast<double>(p));
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    Matrix a = gen_gaussian(p, p, s, mix_seed(seed, static_cast<std::uint64_t>(attempt)));
    if (condition_estimate(a) <= kSessionMatrixCondLimit) return a;
  }
  throw NumericalFailure("session matrix: no well-conditioned draw after 16 attempts");
}

std::vector<Index> sample_permutation(Index n, std::uint64_t seed) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng = make_rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  return perm;
}

ServerSession::ServerSession(std::shared_ptr<const ServerContext> ctx, const PartyOptions& opts,
                             ServerOverrides overrides)
    : ctx_(std::move(ctx)), opts_(opts) {
  if (!ctx_) throw InvalidArgument("server session: missing context");
  check_bits(opts_.bits);
  share_ = overrides.share ? std::move(*overrides.share)
                           : derive_share(*ctx_->key, opts_.alpha, mix_seed(opts_.seed, kStreamShare));
  if (share_.mask.dim() != ctx_->key->q) {
    throw InvalidArgument("server session: share dimension differs from q");
  }
  const Index p = ctx_->projected_db.rows();
  const Index n = ctx_->projected_db.cols();
  if (p > 0) {
    a_ = overrides.a ? std::move(*overrides.a)
                     : sample_session_matrix(p, 0.0, mix_seed(opts_.seed, kStreamA));
    if (a_.rows() != p || a_.cols() != p) throw InvalidArgument("server session: A must be p x p");
    const Matrix a_inv = invert(a_, kSessionMatrixCondLimit);
    a_inv_gram_ = a_inv.transpose() * a_inv;  // (A A^T)^{-1}
    permutation_ = overrides.permutation ? std::move(*overrides.permutation)
                                         : sample_permutation(n, mix_seed(opts_.seed, kStreamPerm));
    std::vector<Index> sorted = permutation_;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < static_cast<Index>(sorted.size()); ++i) {
      if (sorted[i] != i || static_cast<Index>(sorted.size()) != n) {
        throw InvalidArgument("server session: permutation is not a permutation of the records");
      }
    }
    if (static_cast<Index>(permutation_.size()) != n) {
      throw InvalidArgument("server session: permutation length differs from n");
    }
  }
}

WireMessage ServerSession::remask(const WireMessage& msg) {
  if (stage_ != ServerStage::kAwaitingEI1) {
    throw ProtocolOrderViolation(std::string("server cannot accept E I.1 in stage ") +
                                 to_string(stage_));
  }
  const Vector received =
      dequantize(single_vector_block(msg, MessageType::kEI1, ctx_->key->q)).col(0);
  WireMessage out;
  out.type = MessageType::kEII1;
  out.blocks.push_back(encode_block_values(share_.mask_inv.apply(received), opts_.bits));
  stage_ = ServerStage::kSentEII1;
  return out;
}

WireMessage ServerSession::prepare_bundle() {
  if (!ctx_->projection_fitted()) {
    throw ProtocolOrderViolation("server cannot prepare E II.2: projection not fitted");
  }
  if (stage_ != ServerStage::kSentEII1) {
    throw ProtocolOrderViolation(std::string("server cannot send E II.2 in stage ") +
                                 to_string(stage_));
  }
  const Matrix& wx = ctx_->projected_db;
  const Index n = wx.cols();
  Matrix wx_perm(wx.rows(), n);
  for (Index k = 0; k < n; ++k) wx_perm.col(k) = wx.col(permutation_[k]);

  WireMessage out;
  out.type = MessageType::kEII2;
  out.blocks.push_back(
      encode_block_values(a_ * share_.mask.right_multiply(ctx_->projection.w), opts_.bits));
  out.blocks.push_back(encode_block_values(a_ * wx_perm, opts_.bits));
  out.blocks.push_back(raw_block(a_inv_gram_));
  if (const auto* svm = std::get_if<SvmModel>(&ctx_->model)) {
    SvmPayload payload{Vector(n), svm->bias, svm->kernel};
    for (Index k = 0; k < n; ++k) payload.coeffs[k] = svm->coeffs[permutation_[k]];
    out.model = std::move(payload);
  } else {
    out.model = transform_nn_weights(std::get<NnModel>(ctx_->model), a_);
  }
  stage_ = ServerStage::kSentEII2;
  return out;
}

void InMemoryDuplex::send(Side from, Bytes frame) {
  (from == Side::kClient ? to_server_ : to_client_).push_back(std::move(frame));
}

Bytes InMemoryDuplex::receive(Side at) {
  auto& queue = at == Side::kClient ? to_client_ : to_server_;
  if (queue.empty()) throw ProtocolError("channel: no message pending");
  Bytes frame = std::move(queue.front());
  queue.pop_front();
  return frame;
}

std::size_t InMemoryDuplex::pending(Side at) const {
  return (at == Side::kClient ? to_client_ : to_server_).size();
}

Prediction plaintext_prediction(const ServerContext& ctx, const Vector& signal) {
  const Vector z = project(ctx.projection, signal);
  Prediction out;
  if (const auto* svm = std::get_if<SvmModel>(&ctx.model)) {
    out.score = svm_decide_plain(*svm, z);
    out.label = svm_label(out.score);
  } else {
    const auto& nn = std::get<NnModel>(ctx.model);
    out.score = nn_forward(nn, z);
    out.label = nn_label(nn, out.score);
  }
  return out;
}

SessionReport run_session(const std::shared_ptr<const ServerContext>& ctx, const Vector& signal,
                          const SessionOptions& opts) {
  using Clock = std::chrono::steady_clock;
  using Side = InMemoryDuplex::Side;
  if (!ctx) throw InvalidArgument("run_session: missing server context");
  SessionReport report;
  InMemoryDuplex channel;
  const auto session_start = Clock::now();

  const PartyOptions client_opts{opts.bits, opts.alpha, mix_seed(opts.seed, kStreamClient)};
  const PartyOptions server_opts{opts.bits, opts.alpha, mix_seed(opts.seed, kStreamServer)};

  auto t0 = Clock::now();
  Client client = run_step("client setup", [&] { return Client(ctx->key, signal, client_opts); });
  report.timings.client_share_ms = elapsed_ms(t0);

  t0 = Clock::now();
  ServerSession server = run_step("server setup", [&] { return ServerSession(ctx, server_opts); });
  report.timings.server_setup_ms = elapsed_ms(t0);

  t0 = Clock::now();
  run_step("E I.1", [&] {
    Bytes frame = encode_message(client.encrypt_signal());
    report.bytes_ei1 = frame.size();
    channel.send(Side::kClient, std::move(frame));
    return 0;
  });
  run_step("E II.1", [&] {
    Bytes frame = encode_message(server.remask(decode_message(channel.receive(Side::kServer))));
    report.bytes_eii1 = frame.size();
    channel.send(Side::kServer, std::move(frame));
    client.receive_remasked(decode_message(channel.receive(Side::kClient)));
    return 0;
  });
  report.timings.masking_ms = elapsed_ms(t0);

  t0 = Clock::now();
  run_step("E II.2", [&] {
    Bytes frame = encode_message(server.prepare_bundle());
    report.bytes_eii2 = frame.size();
    channel.send(Side::kServer, std::move(frame));
    client.receive_bundle(decode_message(channel.receive(Side::kClient)));
    return 0;
  });
  report.timings.bundle_ms = elapsed_ms(t0);

  t0 = Clock::now();
  report.encrypted = run_step("E I.2", [&] { return client.predict(); });
  report.timings.prediction_ms = elapsed_ms(t0);
  report.timings.total_ms = elapsed_ms(session_start);

  run_step("plaintext reference", [&] {
    report.plaintext = plaintext_prediction(*ctx, signal);
    const Vector reference = server.a() * project(ctx->projection, signal);
    const double denom = reference.norm();
    const double err = (client.recover_projection() - reference).norm();
    report.central_identity_residual = denom > 0.0 ? err / denom : err;
    return 0;
  });

  const Index q = ctx->key->q;
  const Index p = ctx->projection.p();
  const Index n = ctx->projected_db.cols();
  std::size_t model_size = 0;
  if (const auto* svm = std::get_if<SvmModel>(&ctx->model)) {
    model_size = analytic_svm_model_size(svm->n());
  } else {
    model_size = analytic_nn_model_size(p, std::get<NnModel>(ctx->model).hidden());
  }
  report.analytic_ei1 = analytic_ei1_size(q, opts.bits);
  report.analytic_eii1 = analytic_eii1_size(q, opts.bits);
  report.analytic_eii2 = analytic_eii2_size(p, q, n, opts.bits, model_size);
  return report;
}

}  // namespace maskpredict
