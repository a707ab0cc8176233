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

#include "maskpredict/reduction.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>
#include <string>

#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

constexpr char kDbMagic[] = "SIGD";
constexpr std::uint8_t kDbVersion = 1;

double log_cosh(double x) {
  const double a = std::abs(x);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

// Moments of log cosh(v) for v ~ N(0, 1), by composite Simpson on [-12, 12].
struct GaussianLogCosh {
  double mean;
  double variance;
};

GaussianLogCosh gaussian_log_cosh() {
  constexpr int kSteps = 4800;
  constexpr double kLo = -12.0;
  constexpr double kHi = 12.0;
  const double h = (kHi - kLo) / kSteps;
  double m1 = 0.0;
  double m2 = 0.0;
  for (int i = 0; i <= kSteps; ++i) {
    const double x = kLo + i * h;
    const double w = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    const double g = log_cosh(x);
    m1 += w * pdf * g;
    m2 += w * pdf * g * g;
  }
  m1 *= h / 3.0;
  m2 *= h / 3.0;
  return {m1, m2 - m1 * m1};
}

// Makes the largest-magnitude entry of every row positive.
void fix_row_signs(Matrix& w) {
  for (Index i = 0; i < w.rows(); ++i) {
    Index arg = 0;
    w.row(i).cwiseAbs().maxCoeff(&arg);
    if (w(i, arg) < 0.0) w.row(i) *= -1.0;
  }
}

Vector column_mean(const Matrix& x) { return x.rowwise().mean(); }

Matrix centered_columns(const Matrix& x, const Vector& mean) {
  return x.colwise() - mean;
}

void check_fit_args(const SignalDatabase& db, Index p, Index cap, const char* who) {
  validate(db);
  if (p < 1 || p > cap) {
    throw InvalidArgument(std::string(who) + ": p=" + std::to_string(p) +
                          " outside [1, " + std::to_string(cap) + "]");
  }
}

// (W W^T)^{-1/2} W
Matrix symmetric_decorrelate(const Matrix& w) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(w * w.transpose());
  const Vector inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose() * w;
}

}  // namespace

const char* to_string(ProjectionMethod method) {
  switch (method) {
    case ProjectionMethod::kPca: return "pca";
    case ProjectionMethod::kLda: return "lda";
    case ProjectionMethod::kIca: return "ica";
  }
  return "unknown";
}

ProjectionMethod parse_projection_method(std::string_view name) {
  if (name == "pca") return ProjectionMethod::kPca;
  if (name == "lda") return ProjectionMethod::kLda;
  if (name == "ica") return ProjectionMethod::kIca;
  throw InvalidArgument("unknown projection method '" + std::string(name) + "'");
}

void validate(const SignalDatabase& db) {
  if (db.x.rows() == 0 || db.x.cols() == 0) {
    throw InvalidArgument("signal database is empty");
  }
  require_finite(db.x, "signal database");
  if (!db.labels.empty()) {
    if (static_cast<Index>(db.labels.size()) != db.n()) {
      throw InvalidArgument("signal database: label count differs from record count");
    }
    for (int y : db.labels) {
      if (y < 0 || y >= db.num_classes) {
        throw InvalidArgument("signal database: label out of range");
      }
    }
  }
}

Projection fit_pca(const SignalDatabase& db, Index p, const FitOptions& opts) {
  check_fit_args(db, p, std::min(db.q(), db.n() - 1), "fit_pca");
  const Vector mean = column_mean(db.x);
  const Matrix xc = centered_columns(db.x, mean);
  Matrix scatter = (xc * xc.transpose()) / static_cast<double>(db.n() - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(scatter);
  if (es.info() != Eigen::Success) throw NumericalFailure("fit_pca: eigen-solver failed");

  Projection proj;
  proj.method = ProjectionMethod::kPca;
  proj.w.resize(p, db.q());
  proj.scores.resize(p);
  const Index q = db.q();
  for (Index i = 0; i < p; ++i) {
    proj.w.row(i) = es.eigenvectors().col(q - 1 - i).transpose();
    proj.scores[i] = es.eigenvalues()[q - 1 - i];
  }
  fix_row_signs(proj.w);
  proj.centered = opts.center;
  proj.mean = opts.center ? mean : Vector::Zero(q);
  return proj;
}

Projection fit_lda(const SignalDatabase& db, Index p, const LdaOptions& opts) {
  validate(db);
  if (db.labels.empty()) throw InvalidArgument("fit_lda: database has no labels");
  std::set<int> present(db.labels.begin(), db.labels.end());
  const Index classes = static_cast<Index>(present.size());
  if (classes < 2) throw InvalidArgument("fit_lda: need at least two classes");
  const Index cap = opts.strict ? std::min(db.q(), classes - 1) : db.q();
  check_fit_args(db, p, std::min(cap, db.n() - 1), "fit_lda");

  const Index q = db.q();
  const Vector mean = column_mean(db.x);
  Matrix within = Matrix::Zero(q, q);
  Matrix between = Matrix::Zero(q, q);
  for (int k : present) {
    std::vector<Index> members;
    for (Index i = 0; i < db.n(); ++i) {
      if (db.labels[i] == k) members.push_back(i);
    }
    Matrix xk(q, static_cast<Index>(members.size()));
    for (std::size_t j = 0; j < members.size(); ++j) xk.col(j) = db.x.col(members[j]);
    const Vector mk = column_mean(xk);
    const Matrix xkc = centered_columns(xk, mk);
    within.noalias() += xkc * xkc.transpose();
    const Vector d = mk - mean;
    between.noalias() += static_cast<double>(members.size()) * d * d.transpose();
  }
  double eps = 1e-6 * within.trace() / static_cast<double>(q);
  if (!(eps > 0.0)) eps = 1e-12;
  within.diagonal().array() += eps;

  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(between, within);
  if (es.info() != Eigen::Success) throw NumericalFailure("fit_lda: eigen-solver failed");

  Projection proj;
  proj.method = ProjectionMethod::kLda;
  proj.w.resize(p, q);
  proj.scores.resize(p);
  for (Index i = 0; i < p; ++i) {
    Vector v = es.eigenvectors().col(q - 1 - i);
    proj.w.row(i) = (v / v.norm()).transpose();
    proj.scores[i] = es.eigenvalues()[q - 1 - i];
  }
  fix_row_signs(proj.w);
  const double top = es.eigenvalues()[q - 1];
  if (!(top > 1e-10)) {
    proj.warnings.push_back(
        "degenerate between-class scatter: class means coincide, no discriminative direction");
  }
  proj.centered = opts.center;
  proj.mean = opts.center ? mean : Vector::Zero(q);
  return proj;
}

Projection fit_ica(const SignalDatabase& db, Index p, const IcaOptions& opts) {
  validate(db);
  if (p < 1 || p > db.q()) {
    throw InvalidArgument("fit_ica: p=" + std::to_string(p) + " outside [1, q]");
  }
  if (opts.max_iter < 1 || !(opts.tol > 0.0)) {
    throw InvalidArgument("fit_ica: max_iter and tol must be positive");
  }
  const Index q = db.q();
  const double n = static_cast<double>(db.n());
  const Vector mean = column_mean(db.x);
  const Matrix xc = centered_columns(db.x, mean);

  // Whitening: K = D^{-1/2} E^T over the leading eigen-directions.
  Eigen::SelfAdjointEigenSolver<Matrix> cov_es((xc * xc.transpose()) / n);
  if (cov_es.info() != Eigen::Success) throw NumericalFailure("fit_ica: whitening failed");
  const Vector& ev = cov_es.eigenvalues();
  const double ev_max = ev[q - 1];
  Index rank = 0;
  for (Index i = 0; i < q; ++i) rank += ev[i] > 1e-10 * ev_max ? 1 : 0;
  const Index m = opts.whiten_dim > 0 ? std::min(opts.whiten_dim, rank) : rank;
  if (p > m) {
    throw InvalidArgument("fit_ica: p=" + std::to_string(p) +
                          " exceeds whitened dimension " + std::to_string(m));
  }
  Matrix whitener(m, q);
  for (Index i = 0; i < m; ++i) {
    whitener.row(i) = cov_es.eigenvectors().col(q - 1 - i).transpose() / std::sqrt(ev[q - 1 - i]);
  }
  const Matrix z = whitener * xc;

  // Symmetric fixed-point iteration with the log-cosh contrast (g = tanh).
  Matrix w = symmetric_decorrelate(gen_gaussian(m, m, 1.0, opts.seed));
  bool converged = false;
  double last_change = 0.0;
  int iterations = 0;
  for (; iterations < opts.max_iter && !converged; ++iterations) {
    const Matrix y = w * z;
    const Matrix g = y.array().tanh().matrix();
    const Vector g_prime_mean = (1.0 - g.array().square()).rowwise().mean();
    Matrix w_next = (g * z.transpose()) / n - g_prime_mean.asDiagonal() * w;
    w_next = symmetric_decorrelate(w_next);
    last_change = ((w_next * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = std::move(w_next);
    converged = last_change < opts.tol;
  }

  const Matrix unmixing = w * whitener;
  const Matrix sources = unmixing * xc;
  static const GaussianLogCosh kGauss = gaussian_log_cosh();
  Vector score(m);
  for (Index i = 0; i < m; ++i) {
    const double e = sources.row(i).unaryExpr([](double v) { return log_cosh(v); }).mean();
    score[i] = (e - kGauss.mean) * (e - kGauss.mean);
  }
  // Negentropy indistinguishable from sampling noise of a Gaussian.
  const double gaussian_floor = 25.0 * kGauss.variance / n;
  Index near_gaussian = 0;
  for (Index i = 0; i < m; ++i) near_gaussian += score[i] < gaussian_floor ? 1 : 0;

  Projection proj;
  proj.method = ProjectionMethod::kIca;
  if (!converged) {
    if (near_gaussian == 0) {
      throw NumericalFailure("fit_ica: no convergence after " + std::to_string(iterations) +
                             " iterations (last change " + std::to_string(last_change) +
                             ", tol " + std::to_string(opts.tol) + ")");
    }
    proj.warnings.push_back("ICA did not converge after " + std::to_string(iterations) +
                            " iterations; " + std::to_string(near_gaussian) +
                            " near-Gaussian components are unidentifiable");
  } else if (near_gaussian == m) {
    proj.warnings.push_back("all components are near-Gaussian; ICA is unidentifiable");
  }

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return score[a] > score[b]; });
  proj.w.resize(p, q);
  proj.scores.resize(p);
  for (Index i = 0; i < p; ++i) {
    proj.w.row(i) = unmixing.row(order[i]);
    proj.scores[i] = score[order[i]];
  }
  fix_row_signs(proj.w);
  proj.centered = opts.center;
  proj.mean = opts.center ? mean : Vector::Zero(q);
  return proj;
}

Vector project(const Projection& proj, const Vector& x) {
  if (x.size() != proj.q()) {
    throw InvalidArgument("project: signal length " + std::to_string(x.size()) +
                          " does not match projection input " + std::to_string(proj.q()));
  }
  if (proj.centered) return proj.w * (x - proj.mean);
  return proj.w * x;
}

Matrix project_columns(const Projection& proj, const Matrix& x) {
  if (x.rows() != proj.q()) throw InvalidArgument("project_columns: dimension mismatch");
  if (proj.centered) return proj.w * (x.colwise() - proj.mean);
  return proj.w * x;
}

constexpr std::uint64_t kPrototypeSeed = 0x5167a1d5u;

SignalDatabase synth_dataset(Index n, Index q, int classes, std::uint64_t seed) {
  if (classes < 2) throw InvalidArgument("synth_dataset: need at least two classes");
  if (q < 2) throw InvalidArgument("synth_dataset: q must be at least 2");
  if (n < static_cast<Index>(classes) * 10) {
    throw InvalidArgument("synth_dataset: need n >= 10 * classes");
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  // Class prototypes do not depend on the seed, so databases and client
  // signals drawn with different seeds come from the same population.
  std::vector<double> phase(classes);
  std::vector<double> phase2(classes);
  for (int k = 0; k < classes; ++k) {
    Rng proto = make_rng(kPrototypeSeed, static_cast<std::uint64_t>(k));
    phase[k] = 2.0 * std::numbers::pi * unit(proto);
    phase2[k] = 2.0 * std::numbers::pi * unit(proto);
  }
  Rng rng = make_rng(seed);
  constexpr double kNoise = 0.6;
  constexpr double kPhaseJitter = 0.2;

  SignalDatabase db;
  db.num_classes = classes;
  db.x.resize(q, n);
  db.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    const int k = static_cast<int>(i % classes);
    db.labels[i] = k;
    const double freq = 2.0 + 3.0 * k;
    const double amp = 0.8 + 0.4 * unit(rng);
    const double jitter = kPhaseJitter * normal(rng);
    for (Index j = 0; j < q; ++j) {
      const double t = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(q);
      db.x(j, i) = amp * (std::sin(freq * t + phase[k] + jitter) +
                          0.5 * std::sin(2.0 * freq * t + phase2[k] + jitter)) +
                   kNoise * normal(rng);
    }
    db.x.col(i).normalize();
  }
  return db;
}

Bytes encode_database(const SignalDatabase& db) {
  validate(db);
  ByteWriter w;
  w.put_magic(std::string_view(kDbMagic, 4));
  w.put_u8(kDbVersion);
  w.put_u32(static_cast<std::uint32_t>(db.q()));
  w.put_u32(static_cast<std::uint32_t>(db.n()));
  w.put_u32(static_cast<std::uint32_t>(db.num_classes));
  // Unlabeled databases store label 0 for every record with class count 0.
  for (Index i = 0; i < db.n(); ++i) w.put_i32(db.labels.empty() ? 0 : db.labels[i]);
  for (Index j = 0; j < db.n(); ++j) {
    for (Index i = 0; i < db.q(); ++i) w.put_f64(db.x(i, j));
  }
  return std::move(w).take();
}

SignalDatabase decode_database(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kDbMagic, 4));
  const std::size_t version_at = r.offset();
  if (r.get_u8() != kDbVersion) throw DecodeError("unsupported database version", version_at);
  const std::size_t dims_at = r.offset();
  const Index q = r.get_u32();
  const Index n = r.get_u32();
  const int classes = static_cast<int>(r.get_u32());
  if (q == 0 || n == 0) throw DecodeError("empty database", dims_at);
  const std::size_t expected = static_cast<std::size_t>(n) * 4 + static_cast<std::size_t>(q * n) * 8;
  if (r.remaining() != expected) throw DecodeError("database body length mismatch", r.offset());
  SignalDatabase db;
  db.num_classes = classes;
  db.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) db.labels[i] = r.get_i32();
  if (classes == 0) db.labels.clear();
  db.x.resize(q, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < q; ++i) db.x(i, j) = r.get_f64();
  }
  r.expect_end();
  try {
    validate(db);
  } catch (const InvalidArgument& e) {
    throw DecodeError(e.what(), 0);
  }
  return db;
}

void save_database(const SignalDatabase& db, const std::filesystem::path& path) {
  write_file(path, encode_database(db));
}

SignalDatabase load_database(const std::filesystem::path& path) {
  return decode_database(read_file(path));
}

}  // namespace maskpredict
