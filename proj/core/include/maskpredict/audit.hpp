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
#include <functional>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "maskpredict/masking.hpp"
#include "maskpredict/protocol.hpp"

namespace maskpredict {

// ---- Gaussian-mask interval probabilities -------------------------------

// One coordinate of B x with B_ij ~ N(0, sigma^2) is N(0, sigma^2 ||x||^2),
// so P(|(Bx)_1| < t) = erf(t / (sqrt(2) ||x|| sigma)).
double ldp_interval_probability(double norm, double t, double sigma);
double ldp_analytic_ratio(double r1, double r2, double t, double sigma);

struct LdpProbeConfig {
  Vector x1;
  Vector x2;
  std::vector<double> sigmas;
  double t = 1.0;
  long samples = 1'000'000;
  std::uint64_t seed = 0;
};

struct LdpRow {
  double sigma = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double t = 0.0;
  double p1 = 0.0;  // empirical interval probabilities
  double p2 = 0.0;
  double empirical_ratio = 0.0;
  double analytic_ratio = 0.0;
  double abs_gap = 0.0;
  double std_error = 0.0;  // delta-method SE of the empirical ratio (plug-in)
  // ln of the ratio; a descriptive per-interval epsilon, not a certificate.
  double epsilon_empirical = 0.0;
  double epsilon_analytic = 0.0;

  bool within(double num_se) const { return abs_gap <= num_se * std_error; }
};

// Draws `samples` Gaussian rows b and counts |b . x1| < t and |b . x2| < t
// on the same draws. Equal inputs therefore give a ratio of exactly 1; the
// standard error carries the covariance of the two indicators.
std::vector<LdpRow> ldp_ratio_probe(const LdpProbeConfig& cfg);

// ---- differential attack span --------------------------------------------

// Columns B0^j t for j = 1..block_dim, one family per diagonal block with the
// other blocks zeroed. Differences of two encryptions of t lie in this span.
Matrix krylov_basis(const MaskKey& key, const Vector& t);

// ||v - K c*|| / ||v|| for the least-squares c*; zero for v = 0.
double span_residual(const Matrix& basis, const Vector& v);
Index numerical_rank(const Matrix& basis);

struct DifferentialResult {
  double max_residual = 0.0;
  std::vector<double> residuals;
  Index span_rank = 0;
};

// For each trial draws two independent shares, forms B^(1) t - B^(2) t and
// measures its residual against krylov_basis(key, t).
DifferentialResult differential_probe(const Vector& t, const MaskKey& key, int trials,
                                      double alpha, std::uint64_t seed);

double commutator_ratio(const Matrix& a, const Matrix& b);

// ---- bit-length precision --------------------------------------------------

struct PrecisionRow {
  int bits = 0;
  PrecisionMeasures measures;
};

std::vector<PrecisionRow> precision_sweep(const std::vector<int>& bits_list, const Matrix& db,
                                          const Vector& t);
// True when every measure is non-increasing along increasing bit width.
bool precision_monotone(std::vector<PrecisionRow> rows);

// q x n Gaussian columns scaled to unit norm.
Matrix normalized_gaussian_columns(Index rows, Index cols, std::uint64_t seed);

// ---- cost ------------------------------------------------------------------

// Server with a random orthonormal-row W, a random database and an RBF SVM
// payload with random coefficients. Cost depends only on the dimensions.
std::shared_ptr<const ServerContext> make_bench_context(Index n, Index q, Index p,
                                                        Index block_size, std::uint64_t seed);

struct ComputePoint {
  Index n = 0;
  Index q = 0;
  Index p = 0;
  Index block_size = 0;  // 0 = dense key
};

struct ComputeRow {
  ComputePoint point;
  StepTimings median;  // per-step medians over the timed runs
  int runs = 0;
};

struct TimingPolicy {
  int warmup = 1;
  int runs = 5;
};

ComputeRow bench_compute_point(const ComputePoint& point, const TimingPolicy& policy,
                               std::uint64_t seed);
std::vector<ComputeRow> bench_compute(const std::vector<ComputePoint>& grid,
                                      const TimingPolicy& policy, std::uint64_t seed);

// Wall time of derive_share on `key`, median over the policy.
double time_share_derivation(const MaskKey& key, const TimingPolicy& policy,
                             std::uint64_t seed);

double median(std::vector<double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct CommPoint {
  Index n = 0;
  Index q = 0;
  Index p = 0;
};

struct CommRow {
  CommPoint point;
  int bits = 0;
  std::size_t ei1 = 0;
  std::size_t eii1 = 0;
  std::size_t eii2 = 0;
  std::size_t analytic_ei1 = 0;
  std::size_t analytic_eii1 = 0;
  std::size_t analytic_eii2 = 0;

  std::size_t total() const { return ei1 + eii1 + eii2; }
  bool matches() const {
    return ei1 == analytic_ei1 && eii1 == analytic_eii1 && eii2 == analytic_eii2;
  }
};

// Runs one session per (point, bits) and records encoded message sizes.
std::vector<CommRow> bench_comm(const std::vector<CommPoint>& grid,
                                const std::vector<int>& bits_list, std::uint64_t seed);

// Block size used for bench keys: 100 when it divides q, else dense.
Index bench_block_size(Index q);

// CPU model and hardware thread count, for timing reports.
std::string machine_descriptor();

void write_ldp_csv(std::ostream& os, const std::vector<LdpRow>& rows);
void write_differential_csv(std::ostream& os, const DifferentialResult& result);
void write_precision_csv(std::ostream& os, const std::vector<PrecisionRow>& rows);
void write_compute_csv(std::ostream& os, const std::vector<ComputeRow>& rows);
void write_comm_csv(std::ostream& os, const std::vector<CommRow>& rows);

}  // namespace maskpredict
