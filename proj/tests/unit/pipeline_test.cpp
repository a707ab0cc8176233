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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "maskpredict/error.hpp"
#include "maskpredict/pipeline.hpp"

namespace maskpredict {
namespace {

SessionConfig small_config() {
  SessionConfig cfg;
  cfg.q = 32;
  cfg.p = 6;
  cfg.n = 80;
  return cfg;
}

TEST(Config, ParseOverridesDefaults) {
  const SessionConfig cfg = parse_config(
      "# comment\n"
      "q = 64\n"
      "\n"
      "p=8\n"
      "kernel=poly\n"
      "degree=3\n"
      "method=lda\n"
      "model=nn\n"
      "bits=64\n"
      "block_size=16\n"
      "shared_block=true\n"
      "lr=0.25\n");
  EXPECT_EQ(cfg.q, 64);
  EXPECT_EQ(cfg.p, 8);
  EXPECT_EQ(cfg.kernel.kind, KernelKind::kPolynomial);
  EXPECT_EQ(cfg.kernel.degree, 3);
  EXPECT_EQ(cfg.method, ProjectionMethod::kLda);
  EXPECT_EQ(cfg.model, ModelType::kNn);
  EXPECT_EQ(cfg.bits, 64);
  EXPECT_EQ(cfg.block_size, 16);
  EXPECT_TRUE(cfg.shared_block);
  EXPECT_EQ(cfg.lr, 0.25);
  EXPECT_EQ(cfg.n, SessionConfig{}.n);
}

TEST(Config, SeedSetsAllStreams) {
  const SessionConfig a = parse_config("seed=5\n");
  const SessionConfig b = parse_config("seed=6\n");
  EXPECT_NE(a.key_seed, b.key_seed);
  EXPECT_NE(a.key_seed, a.data_seed);
  EXPECT_NE(a.data_seed, a.session_seed);
  EXPECT_EQ(a.key_seed, parse_config("seed=5").key_seed);
}

TEST(Config, RejectsMalformedLines) {
  EXPECT_THROW(parse_config("q\n"), InvalidArgument);
  EXPECT_THROW(parse_config("q=abc\n"), InvalidArgument);
  EXPECT_THROW(parse_config("q=12x\n"), InvalidArgument);
  EXPECT_THROW(parse_config("colour=blue\n"), InvalidArgument);
  EXPECT_THROW(parse_config("kernel=cubic\n"), InvalidArgument);
  EXPECT_THROW(parse_config("shared_block=maybe\n"), InvalidArgument);
}

TEST(Config, FormatRoundTrips) {
  SessionConfig cfg = small_config();
  cfg.kernel = Kernel::tanh(0.3, -0.7);
  cfg.method = ProjectionMethod::kIca;
  cfg.key_seed = 123456789012345ULL;
  cfg.alpha = 2.5;
  const SessionConfig back = parse_config(format_config(cfg));
  EXPECT_EQ(format_config(back), format_config(cfg));
  EXPECT_EQ(back.kernel.kappa, 0.3);
  EXPECT_EQ(back.kernel.coef0, -0.7);
  EXPECT_EQ(back.key_seed, cfg.key_seed);
}

TEST(Config, LoadFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "maskpredict_pipeline_test.cfg";
  {
    std::ofstream os(path);
    os << "q=48\nn=60\n";
  }
  const SessionConfig cfg = load_config(path);
  EXPECT_EQ(cfg.q, 48);
  EXPECT_EQ(cfg.n, 60);
  std::filesystem::remove(path);
  EXPECT_THROW(load_config(path), IoError);
}

TEST(Config, ValidationCatchesCrossFieldErrors) {
  SessionConfig cfg = small_config();
  EXPECT_NO_THROW(validate(cfg));
  cfg.block_size = 7;  // does not divide 32
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = small_config();
  cfg.p = 40;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = small_config();
  cfg.bits = 40;
  EXPECT_THROW(validate(cfg), InvalidArgument);
  cfg = small_config();
  cfg.n = 5;
  EXPECT_THROW(validate(cfg), InvalidArgument);
}

TEST(BinaryLabel, ClassZeroIsPositive) {
  EXPECT_EQ(binary_label(0), 1);
  EXPECT_EQ(binary_label(1), -1);
  EXPECT_EQ(binary_label(3), -1);
}

TEST(ModelType, ParseAndPrint) {
  EXPECT_EQ(parse_model_type("svm"), ModelType::kSvm);
  EXPECT_EQ(parse_model_type("nn"), ModelType::kNn);
  EXPECT_STREQ(to_string(ModelType::kNn), "nn");
  EXPECT_THROW(parse_model_type("forest"), InvalidArgument);
}

TEST(Pipeline, EveryMethodAndModelRunsExactly) {
  for (auto method : {ProjectionMethod::kPca, ProjectionMethod::kLda, ProjectionMethod::kIca}) {
    for (auto model : {ModelType::kSvm, ModelType::kNn}) {
      SessionConfig cfg = small_config();
      cfg.method = method;
      cfg.model = model;
      cfg.bits = 64;
      const Pipeline pl = build_pipeline(cfg);
      EXPECT_FALSE(pl.server->projection.centered);
      const SignalDatabase tests = client_signals(cfg, 20, 9);
      for (Index i = 0; i < 5; ++i) {
        const SessionReport r = run_session(pl.server, tests.x.col(i), {64, cfg.alpha, static_cast<std::uint64_t>(40 + i)});
        EXPECT_TRUE(r.labels_match()) << to_string(method) << "/" << to_string(model);
        EXPECT_LT(std::abs(r.encrypted.score - r.plaintext.score),
                  1e-8 * std::max(1.0, std::abs(r.plaintext.score)));
      }
    }
  }
}

TEST(Pipeline, DefaultConfigClassifiesHeldOutSignals) {
  for (auto model : {ModelType::kSvm, ModelType::kNn}) {
    SessionConfig cfg;
    cfg.model = model;
    const Pipeline pl = build_pipeline(cfg);
    const SignalDatabase tests = client_signals(cfg, 100, 77);
    int correct = 0;
    for (Index i = 0; i < 100; ++i) {
      correct += plaintext_prediction(*pl.server, tests.x.col(i)).label ==
                 binary_label(tests.labels[i]);
    }
    EXPECT_GE(correct, 90) << to_string(model);
  }
}

TEST(Pipeline, ReusesAGivenKeyAndIsDeterministic) {
  const SessionConfig cfg = small_config();
  auto key = std::make_shared<const MaskKey>(make_config_key(cfg));
  const Pipeline a = build_pipeline(cfg, key);
  const Pipeline b = build_pipeline(cfg);
  EXPECT_EQ(a.key.get(), key.get());
  EXPECT_EQ(a.key->b0.to_dense(), b.key->b0.to_dense());
  EXPECT_EQ(a.server->projected_db, b.server->projected_db);
  SessionConfig other = cfg;
  other.q = 40;
  EXPECT_THROW(build_pipeline(other, key), InvalidArgument);
}

TEST(Pipeline, BlockKeyFromConfig) {
  SessionConfig cfg = small_config();
  cfg.block_size = 8;
  const MaskKey key = make_config_key(cfg);
  EXPECT_EQ(key.num_blocks(), 4u);
  cfg.shared_block = true;
  const MaskKey shared = make_config_key(cfg);
  EXPECT_EQ(shared.b0.block(0), shared.b0.block(3));
}

TEST(ClientSignals, SameFamilyDifferentDraws) {
  const SessionConfig cfg = small_config();
  const SignalDatabase a = client_signals(cfg, 20, 1);
  const SignalDatabase b = client_signals(cfg, 20, 2);
  EXPECT_EQ(a.q(), 32);
  EXPECT_NE(a.x, b.x);
  EXPECT_EQ(a.x, client_signals(cfg, 20, 1).x);
}

}  // namespace
}  // namespace maskpredict
