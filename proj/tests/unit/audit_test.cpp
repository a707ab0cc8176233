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

#include <algorithm>
#include <cmath>
#include <sstream>

#include "maskpredict/audit.hpp"
#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

Vector with_norm(Index dim, double norm, std::uint64_t seed) {
  return gen_gaussian(dim, 1, 1.0, seed).col(0).normalized() * norm;
}

TEST(Ldp, IntervalProbabilityClosedForm) {
  EXPECT_NEAR(ldp_interval_probability(1.0, 1.0, 1.0), std::erf(1.0 / std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(ldp_interval_probability(1.0, 1.0, 1.0), 0.6826894921370859, 1e-12);
  EXPECT_NEAR(ldp_analytic_ratio(1.0, 2.0, 1.0, 0.5),
              std::erf(std::sqrt(2.0)) / std::erf(1.0 / std::sqrt(2.0)), 1e-14);
}

TEST(Ldp, EqualNormsGiveUnitRatios) {
  LdpProbeConfig cfg;
  cfg.x1 = with_norm(4, 1.5, 1);
  cfg.x2 = cfg.x1;
  cfg.sigmas = {0.1, 0.5, 2.0};
  cfg.samples = 10'000;
  for (const LdpRow& row : ldp_ratio_probe(cfg)) {
    EXPECT_EQ(row.empirical_ratio, 1.0);
    EXPECT_EQ(row.analytic_ratio, 1.0);
    EXPECT_EQ(row.epsilon_analytic, 0.0);
  }
}

TEST(Ldp, AnalyticRatioTendsToOneAsSigmaShrinks) {
  double prev = std::numeric_limits<double>::infinity();
  for (double sigma : {2.0, 1.0, 0.5, 0.25, 0.1, 0.01}) {
    const double r = ldp_analytic_ratio(1.0, 2.0, 1.0, sigma);
    EXPECT_GE(r, 1.0);
    EXPECT_LT(r, prev);
    prev = r;
  }
  EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(Ldp, MonteCarloMatchesErfRatio) {
  LdpProbeConfig cfg;
  cfg.x1 = with_norm(3, 1.0, 2);
  cfg.x2 = with_norm(3, 2.0, 3);
  cfg.sigmas = {0.5};
  cfg.t = 1.0;
  cfg.samples = 1'000'000;
  cfg.seed = 4;
  const LdpRow row = ldp_ratio_probe(cfg).front();
  EXPECT_NEAR(row.r1, 1.0, 1e-12);
  EXPECT_NEAR(row.r2, 2.0, 1e-12);
  EXPECT_LT(row.abs_gap, 0.01);
  EXPECT_TRUE(row.within(3.0));
  EXPECT_NEAR(row.epsilon_analytic, std::log(row.analytic_ratio), 1e-15);
}

TEST(Ldp, StandardErrorIsCalibrated) {
  // Across independent seeds about 99.7% of gaps should sit inside 3 SE;
  // allow two misses in 40.
  LdpProbeConfig cfg;
  cfg.x1 = with_norm(3, 1.0, 5);
  cfg.x2 = with_norm(3, 1.7, 6);
  cfg.sigmas = {0.4, 1.0};
  cfg.samples = 20'000;
  int misses = 0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    cfg.seed = 100 + s;
    for (const LdpRow& row : ldp_ratio_probe(cfg)) misses += !row.within(3.0);
  }
  EXPECT_LE(misses, 2);
}

TEST(Ldp, RejectsBadConfig) {
  LdpProbeConfig cfg;
  cfg.x1 = with_norm(3, 1.0, 1);
  cfg.x2 = Vector::Zero(3);
  cfg.sigmas = {1.0};
  cfg.samples = 10'000;
  EXPECT_THROW(ldp_ratio_probe(cfg), InvalidArgument);
  cfg.x2 = with_norm(4, 1.0, 2);
  EXPECT_THROW(ldp_ratio_probe(cfg), InvalidArgument);
  cfg.x2 = with_norm(3, 1.0, 2);
  cfg.samples = 9'999;
  EXPECT_THROW(ldp_ratio_probe(cfg), InvalidArgument);
  cfg.samples = 10'000;
  cfg.t = 0.0;
  EXPECT_THROW(ldp_ratio_probe(cfg), InvalidArgument);
  cfg.t = 1.0;
  cfg.sigmas.clear();
  EXPECT_THROW(ldp_ratio_probe(cfg), InvalidArgument);
}

MaskKey dense_key(Index q, std::uint64_t seed) {
  KeygenOptions o;
  o.q = q;
  o.seed = seed;
  return keygen(o);
}

TEST(Differential, ZeroDifferenceHasZeroResidual) {
  const MaskKey key = dense_key(16, 1);
  const Vector t = with_norm(16, 1.0, 2);
  const MaskShare s = derive_share(key, kDefaultCoeffBound, 3);
  const Vector diff = s.mask.apply(t) - s.mask.apply(t);
  EXPECT_EQ(span_residual(krylov_basis(key, t), diff), 0.0);
}

TEST(Differential, ShareDifferencesLieInTheKrylovSpan) {
  const MaskKey key = dense_key(16, 4);
  const Vector t = with_norm(16, 1.0, 5);
  const DifferentialResult r = differential_probe(t, key, 100, kDefaultCoeffBound, 6);
  EXPECT_EQ(r.residuals.size(), 100u);
  EXPECT_LT(r.max_residual, 1e-8);
  EXPECT_EQ(r.span_rank, 16);
}

TEST(Differential, BlockKeySpanIsProperAndExcludesOutsideVectors) {
  KeygenOptions o;
  o.q = 16;
  o.block_size = 8;
  o.seed = 7;
  const MaskKey key = keygen(o);
  Vector t = Vector::Zero(16);
  t.head(8) = with_norm(8, 1.0, 8);
  const DifferentialResult r = differential_probe(t, key, 100, kDefaultCoeffBound, 9);
  EXPECT_LT(r.max_residual, 1e-8);
  EXPECT_EQ(r.span_rank, 8);
  const Matrix basis = krylov_basis(key, t);
  EXPECT_EQ(numerical_rank(basis), 8);
  // A generic vector has half its energy outside the span.
  EXPECT_GT(span_residual(basis, with_norm(16, 1.0, 10)), 0.1);
}

TEST(Differential, ResidualOracle) {
  Matrix basis = Matrix::Zero(3, 2);
  basis(0, 0) = 1.0;
  basis(1, 1) = 2.0;
  Vector v(3);
  v << 3.0, 4.0, 12.0;
  EXPECT_NEAR(span_residual(basis, v), 12.0 / 13.0, 1e-14);
  EXPECT_EQ(span_residual(basis, Vector::Zero(3)), 0.0);
  EXPECT_EQ(numerical_rank(basis), 2);
}

TEST(Commutator, SharesCommuteAndStrangersDoNot) {
  const MaskKey key = dense_key(12, 1);
  const MaskShare a = derive_share(key, kDefaultCoeffBound, 1);
  const MaskShare b = derive_share(key, kDefaultCoeffBound, 2);
  EXPECT_LT(commutator_ratio(a.mask.to_dense(), b.mask.to_dense()), 1e-10);
  const MaskShare c = derive_share(dense_key(12, 2), kDefaultCoeffBound, 3);
  EXPECT_GT(commutator_ratio(a.mask.to_dense(), c.mask.to_dense()), 1e-3);
}

TEST(Precision, TableShapeOnNormalizedColumns) {
  const Matrix db = normalized_gaussian_columns(50, 1000, 1);
  for (Index i = 0; i < 1000; ++i) EXPECT_NEAR(db.col(i).norm(), 1.0, 1e-12);
  const Vector t = normalized_gaussian_columns(50, 1, 2).col(0);
  const auto rows = precision_sweep({8, 12, 13, 16, 24, 32}, db, t);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_TRUE(precision_monotone(rows));
  const auto& r12 = rows[1].measures;
  EXPECT_GT(r12.abs_diff, 1e-4);
  EXPECT_LT(r12.abs_diff, 1e-2);
  EXPECT_GT(rows[0].measures.abs_diff, 10.0 * r12.abs_diff);
  const auto& r32 = rows[5].measures;
  EXPECT_LT(r32.abs_diff, 1e-6);
  EXPECT_LT(r32.euclidean, 1e-6);
  EXPECT_LT(r32.cosine, 1e-6);
}

TEST(Precision, MonotoneCheckSortsAndDetectsViolations) {
  std::vector<PrecisionRow> rows{{16, {1e-5, 1e-5, 1e-5}}, {8, {1e-2, 1e-2, 1e-2}}};
  EXPECT_TRUE(precision_monotone(rows));
  rows.push_back({24, {1e-5, 2e-5, 1e-8}});
  EXPECT_FALSE(precision_monotone(rows));
  EXPECT_THROW(precision_sweep({1}, Matrix::Ones(2, 2), Vector::Ones(2)), InvalidArgument);
}

TEST(Cost, MedianAndLineFit) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
  const LinearFit fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  EXPECT_NEAR(fit.slope, 2.0, 1e-12);
  EXPECT_NEAR(fit.intercept, 1.0, 1e-12);
  EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
}

TEST(Cost, BenchContextShapes) {
  const auto ctx = make_bench_context(200, 100, 10, 0, 1);
  EXPECT_EQ(ctx->projected_db.rows(), 10);
  EXPECT_EQ(ctx->projected_db.cols(), 200);
  const Matrix& w = ctx->projection.w;
  EXPECT_LT(max_abs_diff(w * w.transpose(), Matrix::Identity(10, 10)), 1e-12);
  EXPECT_EQ(bench_block_size(1000), 100);
  EXPECT_EQ(bench_block_size(64), 0);
  EXPECT_EQ(bench_block_size(250), 0);
}

TEST(Cost, CommBytesMatchFormulasAndScaleWithBits) {
  const auto rows = bench_comm({{200, 100, 10}, {400, 100, 10}}, {12, 24}, 1);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.matches());
  // Halving the bit width halves the packed code bytes exactly.
  const auto codes = [](const CommRow& r) {
    return r.eii2 - (6 + 3 * 17 + 10 * 10 * 8 + analytic_svm_model_size(r.point.n));
  };
  for (const auto& a : rows) {
    for (const auto& b : rows) {
      if (a.point.n == b.point.n && a.bits == 24 && b.bits == 12) {
        EXPECT_EQ(codes(a), 2 * codes(b));
        EXPECT_EQ(a.ei1 - 23, 2 * (b.ei1 - 23));
      }
    }
  }
}

TEST(Cost, TimingGrowsWithN) {
  TimingPolicy policy{1, 5};
  std::vector<double> ns, ms;
  for (Index n : {1000, 2000, 4000, 8000}) {
    const ComputeRow row = bench_compute_point({n, 64, 32, 0}, policy, 3);
    EXPECT_EQ(row.runs, 5);
    EXPECT_GE(row.median.total_ms, 0.0);
    ns.push_back(static_cast<double>(n));
    ms.push_back(row.median.bundle_ms + row.median.prediction_ms);
  }
  const LinearFit fit = fit_line(ns, ms);
  EXPECT_GT(fit.slope, 0.0);
  EXPECT_GT(fit.r_squared, 0.8);
}

TEST(Csv, HeadersAndRowCounts) {
  std::ostringstream os;
  LdpProbeConfig cfg;
  cfg.x1 = with_norm(3, 1.0, 1);
  cfg.x2 = with_norm(3, 2.0, 2);
  cfg.sigmas = {0.5, 1.0};
  cfg.samples = 10'000;
  write_ldp_csv(os, ldp_ratio_probe(cfg));
  const std::string text = os.str();
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.substr(0, 6), "sigma,");
  std::ostringstream cs;
  write_comm_csv(cs, bench_comm({{100, 50, 5}}, {12}, 1));
  const std::string comm = cs.str();
  EXPECT_EQ(std::count(comm.begin(), comm.end(), '\n'), 2);
  EXPECT_FALSE(machine_descriptor().empty());
}

}  // namespace
}  // namespace maskpredict
