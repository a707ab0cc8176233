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
#include <numbers>
#include <random>

#include "maskpredict/error.hpp"
#include "maskpredict/matcore.hpp"
#include "maskpredict/models.hpp"
#include "maskpredict/rng.hpp"
#include "oracles.hpp"

namespace maskpredict {
namespace {

const Kernel kAllKernels[] = {Kernel::linear(), Kernel::polynomial(2), Kernel::rbf(0.5),
                              Kernel::tanh(0.5, -0.2)};

// K by the textbook formulas, computed from the raw vectors.
double naive_kernel(const Kernel& k, const Vector& a, const Vector& b) {
  double inner = 0.0, sq = 0.0;
  for (Index i = 0; i < a.size(); ++i) {
    inner += a[i] * b[i];
    sq += (a[i] - b[i]) * (a[i] - b[i]);
  }
  switch (k.kind) {
    case KernelKind::kLinear: return inner;
    case KernelKind::kPolynomial: {
      double r = 1.0;
      for (int d = 0; d < k.degree; ++d) r *= inner + 1.0;
      return r;
    }
    case KernelKind::kRbf: return std::exp(-k.gamma * sq);
    case KernelKind::kTanh: return std::tanh(k.kappa * inner + k.coef0);
  }
  return 0.0;
}

double naive_decide(const SvmModel& m, const Vector& t) {
  double s = m.bias;
  for (Index i = 0; i < m.n(); ++i) {
    s += m.coeffs[i] * naive_kernel(m.kernel, t, m.support_points.col(i));
  }
  return s;
}

// Well-conditioned mask: orthogonal times a modest diagonal.
Matrix random_mask(Index p, std::uint64_t seed) {
  Eigen::HouseholderQR<Matrix> qr(gen_gaussian(p, p, 1.0, seed));
  Matrix q = qr.householderQ();
  Vector d = gen_gaussian(p, 1, 0.3, seed + 1).col(0).array().exp();
  return q * d.asDiagonal();
}

Matrix gram_inverse(const Matrix& a) { return (a * a.transpose()).inverse(); }

SvmModel random_model(Index p, Index n, const Kernel& k, std::uint64_t seed) {
  SvmModel m;
  m.kernel = k;
  m.support_points = gen_gaussian(p, n, 1.0 / std::sqrt(static_cast<double>(p)), seed);
  Rng rng = make_rng(seed + 1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  m.coeffs.resize(n);
  for (Index i = 0; i < n; ++i) m.coeffs[i] = u(rng);
  m.bias = u(rng);
  return m;
}

struct ToySet {
  Matrix z;
  std::vector<int> y;
};

ToySet concentric_circles(Index n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> noise(0.0, 0.05);
  ToySet s{Matrix(2, n), std::vector<int>(static_cast<std::size_t>(n))};
  for (Index i = 0; i < n; ++i) {
    const bool inner = i % 2 == 0;
    const double r = (inner ? 0.5 : 1.5) + noise(rng);
    const double a = angle(rng);
    s.z(0, i) = r * std::cos(a);
    s.z(1, i) = r * std::sin(a);
    s.y[i] = inner ? 1 : -1;
  }
  return s;
}

ToySet separable_blobs(Index p, Index n, double gap, std::uint64_t seed) {
  ToySet s{gen_gaussian(p, n, 0.3, seed), std::vector<int>(static_cast<std::size_t>(n))};
  for (Index i = 0; i < n; ++i) {
    s.y[i] = i % 2 == 0 ? 1 : -1;
    s.z(0, i) += s.y[i] * gap;
  }
  return s;
}

int training_correct(const SvmModel& m, const ToySet& s) {
  int c = 0;
  for (Index i = 0; i < s.z.cols(); ++i) c += svm_label(svm_decide_plain(m, s.z.col(i))) == s.y[i];
  return c;
}

// Simplified SMO (random second index, no heuristics) as an independent
// reference solver.
std::pair<Vector, double> reference_smo(const Matrix& gram, const std::vector<int>& y, double c,
                                        int sweeps, std::uint64_t seed) {
  const Index n = gram.rows();
  Vector a = Vector::Zero(n);
  double b = 0.0;
  Rng rng = make_rng(seed);
  std::uniform_int_distribution<Index> pick(0, n - 1);
  auto f = [&](Index i) {
    double s = b;
    for (Index j = 0; j < n; ++j) s += a[j] * y[j] * gram(j, i);
    return s;
  };
  const double tol = 1e-4;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    int changed = 0;
    for (Index i = 0; i < n; ++i) {
      const double ei = f(i) - y[i];
      if (!((y[i] * ei < -tol && a[i] < c) || (y[i] * ei > tol && a[i] > 0))) continue;
      Index j = pick(rng);
      if (j == i) j = (i + 1) % n;
      const double ej = f(j) - y[j];
      const double ai = a[i], aj = a[j];
      double lo, hi;
      if (y[i] != y[j]) {
        lo = std::max(0.0, aj - ai);
        hi = std::min(c, c + aj - ai);
      } else {
        lo = std::max(0.0, ai + aj - c);
        hi = std::min(c, ai + aj);
      }
      if (lo >= hi) continue;
      const double eta = 2 * gram(i, j) - gram(i, i) - gram(j, j);
      if (eta >= 0) continue;
      a[j] = std::clamp(aj - y[j] * (ei - ej) / eta, lo, hi);
      if (std::abs(a[j] - aj) < 1e-7) continue;
      a[i] = ai + y[i] * y[j] * (aj - a[j]);
      const double b1 = b - ei - y[i] * (a[i] - ai) * gram(i, i) - y[j] * (a[j] - aj) * gram(i, j);
      const double b2 = b - ej - y[i] * (a[i] - ai) * gram(i, j) - y[j] * (a[j] - aj) * gram(j, j);
      b = (a[i] > 0 && a[i] < c) ? b1 : (a[j] > 0 && a[j] < c) ? b2 : 0.5 * (b1 + b2);
      ++changed;
    }
    if (changed == 0 && sweep > 20) break;
  }
  return {a, b};
}

TEST(Kernel, ValuesMatchFormulas) {
  const Vector a = gen_gaussian(5, 1, 1.0, 1).col(0);
  const Vector b = gen_gaussian(5, 1, 1.0, 2).col(0);
  for (const Kernel& k : kAllKernels) {
    const double got = kernel_value(k, a.dot(b), (a - b).squaredNorm());
    EXPECT_NEAR(got, naive_kernel(k, a, b), 1e-12) << to_string(k.kind);
  }
}

TEST(Kernel, ValidationAndParsing) {
  EXPECT_THROW(validate(Kernel::rbf(0.0)), InvalidArgument);
  EXPECT_THROW(validate(Kernel::rbf(-1.0)), InvalidArgument);
  EXPECT_THROW(validate(Kernel::polynomial(0)), InvalidArgument);
  EXPECT_NO_THROW(validate(Kernel::polynomial(1)));
  EXPECT_EQ(parse_kernel("linear").kind, KernelKind::kLinear);
  EXPECT_EQ(parse_kernel("poly").kind, KernelKind::kPolynomial);
  EXPECT_EQ(parse_kernel("rbf").kind, KernelKind::kRbf);
  EXPECT_EQ(parse_kernel("tanh").kind, KernelKind::kTanh);
  EXPECT_THROW(parse_kernel("sigmoid2"), InvalidArgument);
}

TEST(TrainSvm, SeparableFourPoints) {
  Matrix z(2, 4);
  z << 1.0, 2.0, -1.0, -2.0, 1.0, 0.5, -1.0, -0.5;
  const std::vector<int> y{1, 1, -1, -1};
  const SvmModel m = train_svm(z, y, Kernel::linear());
  EXPECT_EQ(training_correct(m, {z, y}), 4);
  // A support point lands on its own side.
  for (Index i = 0; i < 4; ++i) EXPECT_EQ(svm_label(svm_decide_plain(m, z.col(i))), y[i]);
}

TEST(TrainSvm, DualFeasibility) {
  for (const Kernel& k : kAllKernels) {
    const ToySet s = separable_blobs(4, 120, 0.4, 9);
    SvmOptions opts;
    opts.c = 2.0;
    SvmTrainInfo info;
    const SvmModel m = train_svm(s.z, s.y, k, opts, &info);
    double balance = 0.0;
    for (Index i = 0; i < 120; ++i) {
      EXPECT_GE(info.alpha[i], 0.0);
      EXPECT_LE(info.alpha[i], opts.c);
      EXPECT_DOUBLE_EQ(m.coeffs[i], info.alpha[i] * s.y[i]);
      balance += info.alpha[i] * s.y[i];
    }
    EXPECT_LT(std::abs(balance), 1e-6) << to_string(k.kind);
  }
}

TEST(TrainSvm, RbfConcentricCircles) {
  const ToySet s = concentric_circles(300, 4);
  const SvmModel m = train_svm(s.z, s.y, Kernel::rbf(1.0));
  EXPECT_GT(training_correct(m, s), 0.95 * 300);
}

TEST(TrainSvm, AccuracyMatchesReferenceSolver) {
  for (const Kernel& k : {Kernel::linear(), Kernel::rbf(1.0)}) {
    const ToySet s = separable_blobs(3, 200, 0.25, 21);
    const SvmModel m = train_svm(s.z, s.y, k);
    Matrix gram(200, 200);
    for (Index i = 0; i < 200; ++i) {
      for (Index j = 0; j < 200; ++j) gram(i, j) = naive_kernel(k, s.z.col(i), s.z.col(j));
    }
    const auto [alpha, bias] = reference_smo(gram, s.y, 1.0, 400, 3);
    int ref_correct = 0;
    for (Index i = 0; i < 200; ++i) {
      double f = bias;
      for (Index j = 0; j < 200; ++j) f += alpha[j] * s.y[j] * gram(j, i);
      ref_correct += svm_label(f) == s.y[i];
    }
    EXPECT_GE(training_correct(m, s), ref_correct - 2) << to_string(k.kind);
  }
}

TEST(TrainSvm, CachedRowsAgreeWithFullGram) {
  const ToySet s = separable_blobs(3, 150, 0.3, 5);
  SvmOptions small;
  small.cache_bytes = 150 * sizeof(double) * 8;  // eight rows
  const Kernel k = Kernel::rbf(0.7);
  const SvmModel full = train_svm(s.z, s.y, k);
  const SvmModel cached = train_svm(s.z, s.y, k, small);
  // Rounding differs between the two paths, so compare the dual objective
  // (sum alpha - 1/2 c^T K c) and the decisions rather than coefficients.
  auto dual = [&](const SvmModel& m) {
    double quad = 0.0, lin = 0.0;
    for (Index i = 0; i < 150; ++i) {
      lin += m.coeffs[i] * s.y[i];
      for (Index j = 0; j < 150; ++j) {
        quad += m.coeffs[i] * m.coeffs[j] * naive_kernel(k, s.z.col(i), s.z.col(j));
      }
    }
    return lin - 0.5 * quad;
  };
  EXPECT_NEAR(dual(full), dual(cached), 1e-3 * std::abs(dual(full)));
  EXPECT_EQ(training_correct(full, s), training_correct(cached, s));
}

TEST(TrainSvm, RejectsBadInput) {
  const Matrix z = gen_gaussian(2, 4, 1.0, 1);
  EXPECT_THROW(train_svm(z, std::vector<int>{1, 1, 1, 1}, Kernel::linear()), InvalidArgument);
  EXPECT_THROW(train_svm(z, std::vector<int>{1, -1, 1}, Kernel::linear()), InvalidArgument);
  EXPECT_THROW(train_svm(z, std::vector<int>{1, -1, 0, 1}, Kernel::linear()), InvalidArgument);
  EXPECT_THROW(train_svm(z.leftCols(1), std::vector<int>{1}, Kernel::linear()), InvalidArgument);
  EXPECT_THROW(train_svm(z, std::vector<int>{1, -1, 1, -1}, Kernel::rbf(0.0)), InvalidArgument);
}

TEST(SvmDecidePlain, NaiveOracleAndZeroCoefficients) {
  for (const Kernel& k : kAllKernels) {
    const SvmModel m = random_model(6, 40, k, 3);
    const Vector t = gen_gaussian(6, 1, 0.4, 4).col(0);
    EXPECT_NEAR(svm_decide_plain(m, t), naive_decide(m, t), 1e-12) << to_string(k.kind);
    SvmModel zero = m;
    zero.coeffs.setZero();
    EXPECT_EQ(svm_decide_plain(zero, t), m.bias);
  }
  const SvmModel m = random_model(6, 10, Kernel::linear(), 1);
  EXPECT_THROW(svm_decide_plain(m, Vector::Zero(5)), InvalidArgument);
}

TEST(EncInnerProduct, IdentityMaskIsDotProduct) {
  const Vector a = gen_gaussian(7, 1, 1.0, 1).col(0);
  const Vector b = gen_gaussian(7, 1, 1.0, 2).col(0);
  EXPECT_NEAR(enc_inner_product(a, b, Matrix::Identity(7, 7)), a.dot(b), 1e-14);
  EXPECT_THROW(enc_inner_product(a, b.head(6), Matrix::Identity(7, 7)), InvalidArgument);
}

TEST(EncInnerProduct, SelfProductIsSquaredNorm) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix a = random_mask(50, 1000 + seed);
    const Matrix ai = gram_inverse(a);
    const Vector t = gen_gaussian(50, 1, 1.0, seed).col(0);
    const Vector ts = a * t;
    EXPECT_LT(testing::rel_err(enc_inner_product(ts, ts, ai), t.squaredNorm()), 1e-9);
  }
}

TEST(EncInnerProduct, OrthogonalPairGivesZero) {
  const Matrix a = random_mask(50, 8);
  const Matrix ai = gram_inverse(a);
  Vector t = gen_gaussian(50, 1, 1.0, 1).col(0);
  Vector x = gen_gaussian(50, 1, 1.0, 2).col(0);
  x -= x.dot(t) / t.squaredNorm() * t;
  EXPECT_LT(std::abs(enc_inner_product(a * t, a * x, ai)), 1e-9 * t.norm() * x.norm());
}

TEST(EncDistance, Identities) {
  const Vector t = gen_gaussian(50, 1, 1.0, 1).col(0);
  const Vector x = gen_gaussian(50, 1, 1.0, 2).col(0);
  const Matrix a = random_mask(50, 3);
  const Matrix ai = gram_inverse(a);
  EXPECT_EQ(enc_distance(a * t, a * t, ai), 0.0);
  EXPECT_NEAR(enc_distance(t, x, Matrix::Identity(50, 50)), (t - x).norm(), 1e-12);
  EXPECT_LT(testing::rel_err(enc_distance(a * t, a * x, ai), (t - x).norm()), 1e-9);
  EXPECT_GE(enc_distance(a * t, a * t + Vector::Constant(50, 1e-17), ai), 0.0);
  EXPECT_THROW(enc_distance(t, x, Matrix::Identity(49, 49)), InvalidArgument);
}

TEST(SvmDecideEncrypted, IdentityMaskIsExact) {
  for (const Kernel& k : kAllKernels) {
    const SvmModel m = random_model(5, 30, k, 6);
    const Vector t = gen_gaussian(5, 1, 0.4, 7).col(0);
    const SvmPayload payload{m.coeffs, m.bias, m.kernel};
    EXPECT_NEAR(svm_decide_encrypted(payload, m.support_points, t, Matrix::Identity(5, 5)),
                svm_decide_plain(m, t), 1e-13);
  }
}

TEST(SvmDecideEncrypted, RandomSessionsMatchPlaintext) {
  // 500 sessions: fresh mask and test point each time, kernels in rotation.
  const Index p = 50, n = 1000;
  std::vector<SvmModel> models;
  for (int k = 0; k < 4; ++k) models.push_back(random_model(p, n, kAllKernels[k], 100 + k));
  double worst = 0.0;
  int disagreements = 0;
  for (int s = 0; s < 500; ++s) {
    const SvmModel& m = models[s % 4];
    const Matrix a = random_mask(p, 5000 + s);
    const Matrix ai = gram_inverse(a);
    const Vector t = gen_gaussian(p, 1, 1.0 / std::sqrt(50.0), 9000 + s).col(0);
    const double plain = svm_decide_plain(m, t);
    const double enc = svm_decide_encrypted({m.coeffs, m.bias, m.kernel}, a * m.support_points,
                                            a * t, ai);
    worst = std::max(worst, std::abs(enc - plain) / std::max(1.0, std::abs(plain)));
    disagreements += svm_label(enc) != svm_label(plain);
  }
  EXPECT_LT(worst, 1e-8);
  EXPECT_EQ(disagreements, 0);
}

TEST(SvmDecideEncrypted, ConsistentPermutationLeavesScore) {
  const SvmModel m = random_model(8, 60, Kernel::rbf(0.8), 2);
  const Vector t = gen_gaussian(8, 1, 0.3, 3).col(0);
  std::vector<Index> perm(60);
  for (Index i = 0; i < 60; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), make_rng(4));
  SvmPayload payload{Vector(60), m.bias, m.kernel};
  Matrix xp(8, 60);
  for (Index k = 0; k < 60; ++k) {
    xp.col(k) = m.support_points.col(perm[k]);
    payload.coeffs[k] = m.coeffs[perm[k]];
  }
  EXPECT_NEAR(svm_decide_encrypted(payload, xp, t, Matrix::Identity(8, 8)),
              svm_decide_plain(m, t), 1e-12);
}

TEST(SvmDecideEncrypted, InvariantUnderOrthogonalRotationOfMask) {
  const SvmModel m = random_model(10, 50, Kernel::tanh(0.5, 0.1), 5);
  const Vector t = gen_gaussian(10, 1, 0.3, 6).col(0);
  const Matrix a = random_mask(10, 7);
  Eigen::HouseholderQR<Matrix> qr(gen_gaussian(10, 10, 1.0, 8));
  const Matrix ap = a * Matrix(qr.householderQ());
  const SvmPayload payload{m.coeffs, m.bias, m.kernel};
  const double s1 = svm_decide_encrypted(payload, a * m.support_points, a * t, gram_inverse(a));
  // A P A^T P^T... the client sees A P x; A_I for AP is the same matrix.
  const double s2 =
      svm_decide_encrypted(payload, ap * m.support_points, ap * t, gram_inverse(ap));
  EXPECT_LT(testing::rel_err(gram_inverse(a), gram_inverse(ap)), 1e-10);
  EXPECT_NEAR(s1, s2, 1e-10);
}

TEST(SvmDecideEncrypted, RejectsBadShapes) {
  const SvmModel m = random_model(4, 10, Kernel::linear(), 1);
  const SvmPayload payload{m.coeffs, m.bias, m.kernel};
  const Matrix id = Matrix::Identity(4, 4);
  EXPECT_THROW(svm_decide_encrypted(payload, m.support_points.leftCols(9), Vector::Zero(4), id),
               InvalidArgument);
  EXPECT_THROW(svm_decide_encrypted(payload, m.support_points, Vector::Zero(3), id),
               InvalidArgument);
  SvmPayload bad = payload;
  bad.kernel = Kernel::rbf(-1.0);
  EXPECT_THROW(svm_decide_encrypted(bad, m.support_points, Vector::Zero(4), id), InvalidArgument);
}

double naive_forward(const NnModel& m, const Vector& x) {
  double out = m.out_b;
  for (Index i = 0; i < m.hidden(); ++i) {
    double v = m.hidden_b[i];
    for (Index j = 0; j < m.p(); ++j) v += m.hidden_w(i, j) * x[j];
    out += m.out_w[i] / (1.0 + std::exp(-v));
  }
  return m.output == OutputActivation::kLogistic ? 1.0 / (1.0 + std::exp(-out)) : out;
}

NnModel random_nn(Index p, Index m, std::uint64_t seed) {
  NnModel nn = init_nn(p, m, seed);
  nn.hidden_b = gen_gaussian(m, 1, 0.5, seed + 7).col(0);
  nn.out_b = 0.3;
  return nn;
}

TEST(NnForward, ZeroWeightsGiveHalf) {
  NnModel m = init_nn(3, 4, 1);
  m.hidden_w.setZero();
  m.out_w.setZero();
  EXPECT_DOUBLE_EQ(nn_forward(m, gen_gaussian(3, 1, 1.0, 2).col(0)), 0.5);
}

TEST(NnForward, HandComputedSingleNeuron) {
  NnModel m;
  m.hidden_w = Matrix{{1.0, 0.0}};
  m.hidden_b = Vector::Zero(1);
  m.out_w = Vector::Ones(1);
  m.out_b = 0.0;
  Vector x(2);
  x << 2.0, -3.0;
  const double z = 1.0 / (1.0 + std::exp(-2.0));
  EXPECT_NEAR(nn_forward(m, x), 1.0 / (1.0 + std::exp(-z)), 1e-15);
  m.output = OutputActivation::kIdentity;
  EXPECT_NEAR(nn_forward(m, x), z, 1e-15);
  EXPECT_THROW(nn_forward(m, Vector::Zero(3)), InvalidArgument);
}

TEST(NnForward, MatchesNaiveLoops) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const NnModel m = random_nn(9, 5, s);
    const Vector x = gen_gaussian(9, 1, 1.0, 100 + s).col(0);
    EXPECT_NEAR(nn_forward(m, x), naive_forward(m, x), 1e-12);
  }
}

TEST(TrainNn, ZeroEpochsReturnsInitialWeights) {
  const ToySet s = separable_blobs(3, 20, 1.0, 1);
  NnOptions opts;
  opts.epochs = 0;
  opts.seed = 42;
  const NnModel trained = train_nn(s.z, s.y, opts);
  const NnModel init = init_nn(3, opts.hidden, 42);
  EXPECT_EQ(trained.hidden_w, init.hidden_w);
  EXPECT_EQ(trained.out_w, init.out_w);
  EXPECT_EQ(trained.hidden_b, init.hidden_b);
  EXPECT_EQ(trained.out_b, init.out_b);
}

TEST(TrainNn, DeterministicAndLossNonIncreasing) {
  const ToySet s = separable_blobs(4, 80, 0.5, 2);
  NnOptions opts;
  opts.seed = 5;
  std::vector<double> history;
  const NnModel a = train_nn(s.z, s.y, opts, &history);
  const NnModel b = train_nn(s.z, s.y, opts);
  EXPECT_EQ(a.hidden_w, b.hidden_w);
  ASSERT_EQ(history.size(), static_cast<std::size_t>(opts.epochs) + 1);
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LE(history[i], history[i - 1] + 1e-12);
  EXPECT_NEAR(history.back(), nn_loss(a, s.z, s.y), 1e-12);
}

TEST(TrainNn, TwoHiddenUnitsFitSeparableData) {
  const ToySet s = separable_blobs(2, 60, 1.0, 3);
  NnOptions opts;
  opts.hidden = 2;
  opts.epochs = 2000;
  opts.lr = 0.5;
  opts.seed = 1;
  const NnModel m = train_nn(s.z, s.y, opts);
  int correct = 0;
  for (Index i = 0; i < 60; ++i) correct += nn_label(m, nn_forward(m, s.z.col(i))) == s.y[i];
  EXPECT_EQ(correct, 60);
}

TEST(TrainNn, GradientMatchesFiniteDifferences) {
  const ToySet s = separable_blobs(3, 5, 0.5, 4);
  const NnModel m = random_nn(3, 4, 9);
  NnGradient g;
  nn_loss_and_gradient(m, s.z, s.y, g);
  const double h = 1e-6;
  auto check = [&](double analytic, auto&& perturb) {
    NnModel plus = m, minus = m;
    perturb(plus, h);
    perturb(minus, -h);
    const double numeric = (nn_loss(plus, s.z, s.y) - nn_loss(minus, s.z, s.y)) / (2 * h);
    EXPECT_NEAR(analytic, numeric, 1e-5 * std::max(1e-3, std::abs(numeric)));
  };
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 3; ++j) {
      check(g.hidden_w(i, j), [&](NnModel& x, double d) { x.hidden_w(i, j) += d; });
    }
    check(g.hidden_b[i], [&](NnModel& x, double d) { x.hidden_b[i] += d; });
    check(g.out_w[i], [&](NnModel& x, double d) { x.out_w[i] += d; });
  }
  check(g.out_b, [&](NnModel& x, double d) { x.out_b += d; });
}

TEST(TransformNnWeights, IdentityLeavesWeights) {
  const NnModel m = random_nn(4, 3, 1);
  const EncNnModel e = transform_nn_weights(m, Matrix::Identity(4, 4));
  EXPECT_LT(max_abs_diff(e.masked.hidden_w, m.hidden_w), 1e-15);
  EXPECT_EQ(e.masked.hidden_b, m.hidden_b);
  EXPECT_EQ(e.masked.out_w, m.out_w);
}

TEST(TransformNnWeights, MaskedForwardMatchesPlain) {
  const NnModel m = random_nn(50, 8, 2);
  const Matrix a = random_mask(50, 3);
  const EncNnModel e = transform_nn_weights(m, a);
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Vector x = gen_gaussian(50, 1, 1.0, 200 + s).col(0);
    worst = std::max(worst, testing::rel_err(nn_forward(e, Vector(a * x)), nn_forward(m, x)));
  }
  EXPECT_LT(worst, 1e-9);
}

TEST(TransformNnWeights, RoundTripAndSingular) {
  const NnModel m = random_nn(6, 3, 4);
  const Matrix a = random_mask(6, 5);
  const EncNnModel there = transform_nn_weights(m, a);
  const EncNnModel back = transform_nn_weights(there.masked, a.inverse());
  EXPECT_LT(testing::rel_err(back.masked.hidden_w, m.hidden_w), 1e-9);
  Matrix singular = a;
  singular.col(2).setZero();
  EXPECT_THROW(transform_nn_weights(m, singular), IllConditioned);
}

TEST(ModelFiles, SvmRoundTrip) {
  SvmModel m = random_model(3, 7, Kernel::tanh(0.4, -0.1), 1);
  const Bytes bytes = encode_svm_model(m);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "SVMM");
  EXPECT_EQ(bytes[4], 1);
  const SvmModel back = decode_svm_model(bytes);
  EXPECT_EQ(back.coeffs, m.coeffs);
  EXPECT_EQ(back.bias, m.bias);
  EXPECT_EQ(back.kernel.kind, m.kernel.kind);
  EXPECT_EQ(back.kernel.kappa, m.kernel.kappa);
  EXPECT_EQ(back.kernel.coef0, m.kernel.coef0);
  EXPECT_EQ(back.support_points, m.support_points);
  Bytes bad = bytes;
  bad[0] = 'X';
  EXPECT_THROW(decode_svm_model(bad), DecodeError);
  bad = bytes;
  bad.pop_back();
  EXPECT_THROW(decode_svm_model(bad), DecodeError);
}

TEST(ModelFiles, NnRoundTrip) {
  const NnModel m = random_nn(5, 4, 2);
  const Bytes bytes = encode_nn_model(m);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "NNM1");
  const NnModel back = decode_nn_model(bytes);
  EXPECT_EQ(back.hidden_w, m.hidden_w);
  EXPECT_EQ(back.hidden_b, m.hidden_b);
  EXPECT_EQ(back.out_w, m.out_w);
  EXPECT_EQ(back.out_b, m.out_b);
  Bytes bad = bytes;
  bad[4] = 9;
  EXPECT_THROW(decode_nn_model(bad), DecodeError);
}

TEST(ModelFiles, PayloadSizesMatchWriters) {
  const SvmModel m = random_model(3, 11, Kernel::rbf(1.0), 1);
  ByteWriter w;
  write_svm_payload(w, {m.coeffs, m.bias, m.kernel});
  EXPECT_EQ(w.size(), svm_payload_size(11));
  const NnModel nn = random_nn(5, 4, 2);
  ByteWriter w2;
  write_nn_payload(w2, nn);
  EXPECT_EQ(w2.size(), nn_payload_size(5, 4));
}

}  // namespace
}  // namespace maskpredict
