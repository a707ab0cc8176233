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

#include "maskpredict/audit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <string>
#include <thread>

#include "maskpredict/error.hpp"
#include "maskpredict/quantize.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

// Columns below this (relative to the largest) count as linearly dependent.
constexpr double kRankThreshold = 1e-10;

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since)
      .count();
}

struct JointCounts {
  long in1 = 0;
  long in2 = 0;
  long both = 0;
};

// One Gaussian row b per sample, shared by both inputs.
JointCounts count_inside(const Vector& x1, const Vector& x2, double sigma, double t,
                         long samples, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, sigma);
  JointCounts c;
  for (long s = 0; s < samples; ++s) {
    double v1 = 0.0;
    double v2 = 0.0;
    for (Index j = 0; j < x1.size(); ++j) {
      const double b = normal(rng);
      v1 += b * x1[j];
      v2 += b * x2[j];
    }
    const bool i1 = std::abs(v1) < t;
    const bool i2 = std::abs(v2) < t;
    c.in1 += i1;
    c.in2 += i2;
    c.both += i1 && i2;
  }
  return c;
}

// Unit-norm columns, zero columns left as they are.
Matrix normalize_columns(Matrix basis) {
  for (Index j = 0; j < basis.cols(); ++j) {
    const double norm = basis.col(j).norm();
    if (norm > 0.0) basis.col(j) /= norm;
  }
  return basis;
}

Eigen::ColPivHouseholderQR<Matrix> basis_qr(const Matrix& basis) {
  Eigen::ColPivHouseholderQR<Matrix> qr(normalize_columns(basis));
  qr.setThreshold(kRankThreshold);
  return qr;
}

StepTimings median_timings(const std::vector<StepTimings>& runs) {
  auto field = [&](double StepTimings::*member) {
    std::vector<double> v;
    v.reserve(runs.size());
    for (const auto& r : runs) v.push_back(r.*member);
    return median(std::move(v));
  };
  StepTimings out;
  out.client_share_ms = field(&StepTimings::client_share_ms);
  out.server_setup_ms = field(&StepTimings::server_setup_ms);
  out.masking_ms = field(&StepTimings::masking_ms);
  out.bundle_ms = field(&StepTimings::bundle_ms);
  out.prediction_ms = field(&StepTimings::prediction_ms);
  out.total_ms = field(&StepTimings::total_ms);
  return out;
}

}  // namespace

double ldp_interval_probability(double norm, double t, double sigma) {
  return std::erf(t / (std::sqrt(2.0) * norm * sigma));
}

double ldp_analytic_ratio(double r1, double r2, double t, double sigma) {
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw InvalidArgument("ldp: input norms must be positive");
  if (!(t > 0.0) || !(sigma > 0.0)) throw InvalidArgument("ldp: t and sigma must be positive");
  return ldp_interval_probability(r1, t, sigma) / ldp_interval_probability(r2, t, sigma);
}

std::vector<LdpRow> ldp_ratio_probe(const LdpProbeConfig& cfg) {
  const double r1 = cfg.x1.norm();
  const double r2 = cfg.x2.norm();
  if (!(r1 > 0.0) || !(r2 > 0.0)) throw InvalidArgument("ldp: zero-norm input");
  if (cfg.x1.size() != cfg.x2.size()) throw InvalidArgument("ldp: inputs differ in length");
  if (!(cfg.t > 0.0)) throw InvalidArgument("ldp: interval bound t must be positive");
  if (cfg.samples < 10'000) throw InvalidArgument("ldp: at least 10^4 samples required");
  if (cfg.sigmas.empty()) throw InvalidArgument("ldp: empty sigma grid");

  std::vector<LdpRow> rows;
  rows.reserve(cfg.sigmas.size());
  const auto n = static_cast<double>(cfg.samples);
  for (std::size_t i = 0; i < cfg.sigmas.size(); ++i) {
    const double sigma = cfg.sigmas[i];
    if (!(sigma > 0.0)) throw InvalidArgument("ldp: sigma must be positive");
    LdpRow row;
    row.sigma = sigma;
    row.r1 = r1;
    row.r2 = r2;
    row.t = cfg.t;
    const JointCounts c =
        count_inside(cfg.x1, cfg.x2, sigma, cfg.t, cfg.samples, mix_seed(cfg.seed, i));
    row.p1 = c.in1 / n;
    row.p2 = c.in2 / n;
    const double p12 = c.both / n;
    row.analytic_ratio = ldp_analytic_ratio(r1, r2, cfg.t, sigma);
    row.empirical_ratio =
        row.p2 > 0.0 ? row.p1 / row.p2 : std::numeric_limits<double>::infinity();
    row.abs_gap = std::abs(row.empirical_ratio - row.analytic_ratio);
    // Delta method for p1/p2 with correlated indicators.
    if (row.p2 > 0.0) {
      const double v1 = row.p1 * (1.0 - row.p1);
      const double v2 = row.p2 * (1.0 - row.p2);
      const double cov = p12 - row.p1 * row.p2;
      const double r = row.empirical_ratio;
      const double var = (v1 - 2.0 * r * cov + r * r * v2) / (row.p2 * row.p2 * n);
      row.std_error = std::sqrt(std::max(var, 0.0));
    } else {
      row.std_error = std::numeric_limits<double>::infinity();
    }
    row.epsilon_empirical = std::log(row.empirical_ratio);
    row.epsilon_analytic = std::log(row.analytic_ratio);
    rows.push_back(row);
  }
  return rows;
}

Matrix krylov_basis(const MaskKey& key, const Vector& t) {
  if (t.size() != key.q) throw InvalidArgument("krylov basis: t length differs from q");
  Matrix basis = Matrix::Zero(key.q, key.q);
  Index col = 0;
  for (std::size_t i = 0; i < key.b0.num_blocks(); ++i) {
    const Matrix& b = key.b0.block(i);
    const Index off = key.b0.offset(i);
    const Index m = b.rows();
    Vector v = t.segment(off, m);
    for (Index j = 0; j < m; ++j) {
      v = b * v;
      basis.col(col++).segment(off, m) = v;
    }
  }
  return basis;
}

double span_residual(const Matrix& basis, const Vector& v) {
  if (basis.rows() != v.size()) throw InvalidArgument("span residual: dimension mismatch");
  const double norm = v.norm();
  if (norm == 0.0) return 0.0;
  const auto qr = basis_qr(basis);
  const Vector c = qr.solve(v);
  return (v - normalize_columns(basis) * c).norm() / norm;
}

Index numerical_rank(const Matrix& basis) { return basis_qr(basis).rank(); }

DifferentialResult differential_probe(const Vector& t, const MaskKey& key, int trials,
                                      double alpha, std::uint64_t seed) {
  if (trials < 1) throw InvalidArgument("differential probe: trials must be positive");
  const Matrix basis = krylov_basis(key, t);
  DifferentialResult out;
  out.span_rank = numerical_rank(basis);
  out.residuals.reserve(static_cast<std::size_t>(trials));
  for (int i = 0; i < trials; ++i) {
    const auto k = static_cast<std::uint64_t>(i);
    const MaskShare s1 = derive_share(key, alpha, mix_seed(seed, 2 * k));
    const MaskShare s2 = derive_share(key, alpha, mix_seed(seed, 2 * k + 1));
    const Vector diff = s1.mask.apply(t) - s2.mask.apply(t);
    const double r = span_residual(basis, diff);
    out.residuals.push_back(r);
    out.max_residual = std::max(out.max_residual, r);
  }
  return out;
}

double commutator_ratio(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw InvalidArgument("commutator: matrices must be square and of equal size");
  }
  const Matrix ab = a * b;
  const double denom = ab.norm();
  const double num = (ab - b * a).norm();
  return denom > 0.0 ? num / denom : num;
}

std::vector<PrecisionRow> precision_sweep(const std::vector<int>& bits_list, const Matrix& db,
                                          const Vector& t) {
  if (db.rows() != t.size()) throw InvalidArgument("precision sweep: t length differs from rows");
  std::vector<PrecisionRow> rows;
  rows.reserve(bits_list.size());
  for (int bits : bits_list) {
    if (bits < kMinBits || bits > kMaxBits) {
      throw InvalidArgument("precision sweep: bits must be in [2, 32]");
    }
    const Matrix d_tilde = dequantize(quantize(db, bits));
    const Vector t_tilde = dequantize(quantize(t, bits)).col(0);
    rows.push_back({bits, precision_measures(db, d_tilde, t, t_tilde)});
  }
  return rows;
}

bool precision_monotone(std::vector<PrecisionRow> rows) {
  std::sort(rows.begin(), rows.end(),
            [](const PrecisionRow& a, const PrecisionRow& b) { return a.bits < b.bits; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& lo = rows[i - 1].measures;
    const auto& hi = rows[i].measures;
    if (hi.abs_diff > lo.abs_diff || hi.euclidean > lo.euclidean || hi.cosine > lo.cosine) {
      return false;
    }
  }
  return true;
}

Matrix normalized_gaussian_columns(Index rows, Index cols, std::uint64_t seed) {
  return normalize_columns(gen_gaussian(rows, cols, 1.0, seed));
}

Index bench_block_size(Index q) { return (q > 100 && q % 100 == 0) ? 100 : 0; }

std::shared_ptr<const ServerContext> make_bench_context(Index n, Index q, Index p,
                                                        Index block_size, std::uint64_t seed) {
  if (p < 1 || p > q) throw InvalidArgument("bench: p must be in [1, q]");
  KeygenOptions kopts;
  kopts.q = q;
  if (block_size > 0 && block_size != q) kopts.block_size = block_size;
  kopts.seed = mix_seed(seed, 1);
  auto key = std::make_shared<const MaskKey>(keygen(kopts));

  const Matrix g = gen_gaussian(q, p, 1.0, mix_seed(seed, 2));
  Projection proj;
  proj.w = Eigen::HouseholderQR<Matrix>(g).householderQ() * Matrix::Identity(q, p);
  proj.w.transposeInPlace();
  proj.method = ProjectionMethod::kPca;
  proj.mean = Vector::Zero(q);
  proj.centered = false;

  const Matrix x = normalized_gaussian_columns(q, n, mix_seed(seed, 3));
  SvmModel svm;
  svm.kernel = Kernel::rbf(1.0);
  svm.bias = 0.1;
  svm.support_points = proj.w * x;
  svm.coeffs = Vector(n);
  Rng rng = make_rng(mix_seed(seed, 4));
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (Index i = 0; i < n; ++i) svm.coeffs[i] = unif(rng);
  return make_server_context(std::move(key), std::move(proj), x, std::move(svm));
}

double median(std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("median of an empty set");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ComputeRow bench_compute_point(const ComputePoint& point, const TimingPolicy& policy,
                               std::uint64_t seed) {
  if (policy.runs < 1 || policy.warmup < 0) throw InvalidArgument("bench: bad timing policy");
  const auto ctx = make_bench_context(point.n, point.q, point.p, point.block_size, seed);
  const Vector signal = normalized_gaussian_columns(point.q, 1, mix_seed(seed, 5)).col(0);
  std::vector<StepTimings> runs;
  for (int r = 0; r < policy.warmup + policy.runs; ++r) {
    SessionOptions opts;
    opts.seed = mix_seed(seed, 100 + static_cast<std::uint64_t>(r));
    const SessionReport rep = run_session(ctx, signal, opts);
    if (r >= policy.warmup) runs.push_back(rep.timings);
  }
  return {point, median_timings(runs), policy.runs};
}

std::vector<ComputeRow> bench_compute(const std::vector<ComputePoint>& grid,
                                      const TimingPolicy& policy, std::uint64_t seed) {
  if (grid.empty()) throw InvalidArgument("bench compute: empty grid");
  std::vector<ComputeRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    rows.push_back(bench_compute_point(grid[i], policy, mix_seed(seed, i)));
  }
  return rows;
}

double time_share_derivation(const MaskKey& key, const TimingPolicy& policy,
                             std::uint64_t seed) {
  if (policy.runs < 1 || policy.warmup < 0) throw InvalidArgument("bench: bad timing policy");
  std::vector<double> times;
  for (int r = 0; r < policy.warmup + policy.runs; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const MaskShare share =
        derive_share(key, kDefaultCoeffBound, mix_seed(seed, static_cast<std::uint64_t>(r)));
    const double ms = elapsed_ms(t0);
    if (share.mask.dim() != key.q) throw NumericalFailure("share derivation returned bad size");
    if (r >= policy.warmup) times.push_back(ms);
  }
  return median(std::move(times));
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgument("fit_line: need at least two paired points");
  }
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line: x values are all equal");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

std::vector<CommRow> bench_comm(const std::vector<CommPoint>& grid,
                                const std::vector<int>& bits_list, std::uint64_t seed) {
  if (grid.empty() || bits_list.empty()) throw InvalidArgument("bench comm: empty grid");
  std::vector<CommRow> rows;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CommPoint& pt = grid[i];
    const auto ctx =
        make_bench_context(pt.n, pt.q, pt.p, bench_block_size(pt.q), mix_seed(seed, i));
    const Vector signal = normalized_gaussian_columns(pt.q, 1, mix_seed(seed, 1000 + i)).col(0);
    for (int bits : bits_list) {
      SessionOptions opts;
      opts.bits = bits;
      opts.seed = mix_seed(seed, 2000 + i);
      const SessionReport rep = run_session(ctx, signal, opts);
      CommRow row;
      row.point = pt;
      row.bits = bits;
      row.ei1 = rep.bytes_ei1;
      row.eii1 = rep.bytes_eii1;
      row.eii2 = rep.bytes_eii2;
      row.analytic_ei1 = rep.analytic_ei1;
      row.analytic_eii1 = rep.analytic_eii1;
      row.analytic_eii2 = rep.analytic_eii2;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string machine_descriptor() {
  std::string cpu = "unknown cpu";
  std::ifstream info("/proc/cpuinfo");
  for (std::string line; std::getline(info, line);) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) cpu = line.substr(line.find_first_not_of(' ', colon + 1));
      break;
    }
  }
  return cpu + ", " + std::to_string(std::thread::hardware_concurrency()) + " hw threads";
}

void write_ldp_csv(std::ostream& os, const std::vector<LdpRow>& rows) {
  os << "sigma,r1,r2,t,p1_empirical,p2_empirical,empirical_ratio,analytic_ratio,abs_gap,"
        "std_error,epsilon_empirical,epsilon_analytic\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.sigma << ',' << r.r1 << ',' << r.r2 << ',' << r.t << ',' << r.p1 << ',' << r.p2 << ','
       << r.empirical_ratio << ',' << r.analytic_ratio << ',' << r.abs_gap << ',' << r.std_error
       << ',' << r.epsilon_empirical << ',' << r.epsilon_analytic << '\n';
  }
}

void write_differential_csv(std::ostream& os, const DifferentialResult& result) {
  os << "trial,relative_residual,span_rank\n" << std::setprecision(10);
  for (std::size_t i = 0; i < result.residuals.size(); ++i) {
    os << i << ',' << result.residuals[i] << ',' << result.span_rank << '\n';
  }
}

void write_precision_csv(std::ostream& os, const std::vector<PrecisionRow>& rows) {
  os << "bits,T_A,T_B,T_C\n" << std::setprecision(10);
  for (const auto& r : rows) {
    os << r.bits << ',' << r.measures.abs_diff << ',' << r.measures.euclidean << ','
       << r.measures.cosine << '\n';
  }
}

void write_compute_csv(std::ostream& os, const std::vector<ComputeRow>& rows) {
  os << "n,q,p,block_size,runs,client_share_ms,server_setup_ms,masking_ms,bundle_ms,"
        "prediction_ms,total_ms\n"
     << std::setprecision(6);
  for (const auto& r : rows) {
    const auto& m = r.median;
    os << r.point.n << ',' << r.point.q << ',' << r.point.p << ',' << r.point.block_size << ','
       << r.runs << ',' << m.client_share_ms << ',' << m.server_setup_ms << ',' << m.masking_ms
       << ',' << m.bundle_ms << ',' << m.prediction_ms << ',' << m.total_ms << '\n';
  }
}

void write_comm_csv(std::ostream& os, const std::vector<CommRow>& rows) {
  os << "n,q,p,bits,ei1_bytes,eii1_bytes,eii2_bytes,total_bytes,analytic_ei1,analytic_eii1,"
        "analytic_eii2,matches\n";
  for (const auto& r : rows) {
    os << r.point.n << ',' << r.point.q << ',' << r.point.p << ',' << r.bits << ',' << r.ei1 << ','
       << r.eii1 << ',' << r.eii2 << ',' << r.total() << ',' << r.analytic_ei1 << ','
       << r.analytic_eii1 << ',' << r.analytic_eii2 << ',' << (r.matches() ? 1 : 0) << '\n';
  }
}

}  // namespace maskpredict
