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

#include "maskpredict/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <string>
#include <unordered_map>

#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

constexpr char kSvmMagic[] = "SVMM";
constexpr char kNnMagic[] = "NNM1";
constexpr std::uint8_t kModelVersion = 1;
constexpr double kTau = 1e-12;

double logistic(double v) {
  if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

double softplus(double v) { return std::max(v, 0.0) + std::log1p(std::exp(-std::abs(v))); }

// Kernel rows K(i, :) over the training columns. Small problems get the
// whole Gram matrix up front; large ones an LRU row cache.
class KernelRows {
 public:
  KernelRows(const Matrix& z, const Kernel& kernel, std::size_t cache_bytes)
      : z_(z), kernel_(kernel), n_(z.cols()) {
    sq_norms_ = z.colwise().squaredNorm().transpose();
    const std::size_t row_bytes = static_cast<std::size_t>(n_) * sizeof(double);
    if (static_cast<std::size_t>(n_) * row_bytes <= cache_bytes) {
      full_ = true;
      gram_.resize(n_, n_);
      const Matrix inner = z.transpose() * z;
      for (Index j = 0; j < n_; ++j) {
        for (Index i = 0; i < n_; ++i) gram_(i, j) = value(inner(i, j), i, j);
      }
    } else {
      capacity_ = std::max<std::size_t>(2, cache_bytes / row_bytes);
    }
    diag_.resize(n_);
    for (Index i = 0; i < n_; ++i) diag_[i] = value(sq_norms_[i], i, i);
  }

  double diag(Index i) const { return diag_[i]; }

  // The returned reference stays valid until two further distinct rows are
  // requested.
  const double* row(Index i) {
    if (full_) return gram_.col(i).data();
    auto it = cache_.find(i);
    if (it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first.data();
    }
    if (cache_.size() >= capacity_) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
    Vector r = z_.transpose() * z_.col(i);
    for (Index j = 0; j < n_; ++j) r[j] = value(r[j], i, j);
    lru_.push_front(i);
    auto [pos, inserted] = cache_.emplace(i, std::make_pair(std::move(r), lru_.begin()));
    return pos->second.first.data();
  }

 private:
  double value(double inner, Index i, Index j) const {
    const double sq = std::max(0.0, sq_norms_[i] + sq_norms_[j] - 2.0 * inner);
    return kernel_value(kernel_, inner, sq);
  }

  const Matrix& z_;
  Kernel kernel_;
  Index n_;
  Vector sq_norms_;
  Vector diag_;
  bool full_ = false;
  Matrix gram_;
  std::size_t capacity_ = 0;
  std::list<Index> lru_;
  std::unordered_map<Index, std::pair<Vector, std::list<Index>::iterator>> cache_;
};

Vector kernel_column(const Kernel& kernel, const Matrix& x, const Vector& t) {
  const Vector inner = x.transpose() * t;
  const Vector sq = (x.colwise() - t).colwise().squaredNorm().transpose();
  Vector k(x.cols());
  for (Index i = 0; i < x.cols(); ++i) k[i] = kernel_value(kernel, inner[i], sq[i]);
  return k;
}

void check_labels(std::span<const int> y, Index n, const char* who) {
  if (static_cast<Index>(y.size()) != n) {
    throw InvalidArgument(std::string(who) + ": label count differs from sample count");
  }
  bool pos = false;
  bool neg = false;
  for (int v : y) {
    if (v == 1) {
      pos = true;
    } else if (v == -1) {
      neg = true;
    } else {
      throw InvalidArgument(std::string(who) + ": labels must be +1 or -1");
    }
  }
  if (!(pos && neg)) throw InvalidArgument(std::string(who) + ": need both classes");
}

void write_kernel(ByteWriter& w, const Kernel& k) {
  w.put_u8(static_cast<std::uint8_t>(k.kind));
  w.put_u32(static_cast<std::uint32_t>(k.degree));
}

Kernel read_kernel(ByteReader& r) {
  const std::size_t at = r.offset();
  Kernel k;
  const std::uint8_t kind = r.get_u8();
  if (kind < 1 || kind > 4) throw DecodeError("unknown kernel kind", at);
  k.kind = static_cast<KernelKind>(kind);
  k.degree = static_cast<int>(r.get_u32());
  return k;
}

}  // namespace

const char* to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kPolynomial: return "poly";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kTanh: return "tanh";
  }
  return "unknown";
}

Kernel parse_kernel(std::string_view name) {
  if (name == "linear") return Kernel::linear();
  if (name == "poly" || name == "polynomial") return Kernel::polynomial(3);
  if (name == "rbf") return Kernel::rbf(1.0);
  if (name == "tanh") return Kernel::tanh(0.5, 0.0);
  throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
}

void validate(const Kernel& kernel) {
  switch (kernel.kind) {
    case KernelKind::kLinear:
      return;
    case KernelKind::kPolynomial:
      if (kernel.degree < 1) throw InvalidArgument("polynomial kernel needs degree >= 1");
      return;
    case KernelKind::kRbf:
      if (!(kernel.gamma > 0.0) || !std::isfinite(kernel.gamma)) {
        throw InvalidArgument("rbf kernel needs gamma > 0");
      }
      return;
    case KernelKind::kTanh:
      if (!std::isfinite(kernel.kappa) || !std::isfinite(kernel.coef0)) {
        throw InvalidArgument("tanh kernel parameters must be finite");
      }
      return;
  }
  throw InvalidArgument("unknown kernel kind");
}

double kernel_value(const Kernel& kernel, double inner, double squared_distance) {
  switch (kernel.kind) {
    case KernelKind::kLinear: return inner;
    case KernelKind::kPolynomial: return std::pow(inner + 1.0, kernel.degree);
    case KernelKind::kRbf: return std::exp(-kernel.gamma * squared_distance);
    case KernelKind::kTanh: return std::tanh(kernel.kappa * inner + kernel.coef0);
  }
  return 0.0;
}

SvmModel train_svm(const Matrix& z, std::span<const int> y, const Kernel& kernel,
                   const SvmOptions& opts, SvmTrainInfo* info) {
  validate(kernel);
  const Index n = z.cols();
  if (n < 2) throw InvalidArgument("train_svm: need at least two samples");
  require_finite(z, "train_svm input");
  check_labels(y, n, "train_svm");
  if (!(opts.c > 0.0) || !(opts.tol > 0.0)) {
    throw InvalidArgument("train_svm: C and tol must be positive");
  }
  const double c = opts.c;
  Vector yd(n);
  for (Index i = 0; i < n; ++i) yd[i] = y[i];

  KernelRows rows(z, kernel, opts.cache_bytes);
  Vector alpha = Vector::Zero(n);
  Vector grad = Vector::Constant(n, -1.0);  // Q alpha - e
  auto at_upper = [&](Index t) { return alpha[t] >= c; };
  auto at_lower = [&](Index t) { return alpha[t] <= 0.0; };

  long iter = 0;
  double gap = std::numeric_limits<double>::infinity();
  for (; iter < opts.max_iter; ++iter) {
    double gmax = -std::numeric_limits<double>::infinity();
    Index i = -1;
    for (Index t = 0; t < n; ++t) {
      if (yd[t] > 0) {
        if (!at_upper(t) && -grad[t] >= gmax) { gmax = -grad[t]; i = t; }
      } else {
        if (!at_lower(t) && grad[t] >= gmax) { gmax = grad[t]; i = t; }
      }
    }
    if (i < 0) { gap = 0.0; break; }
    const double* ki = rows.row(i);
    double gmax2 = -std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    Index j = -1;
    for (Index t = 0; t < n; ++t) {
      double grad_diff;
      if (yd[t] > 0) {
        if (at_lower(t)) continue;
        gmax2 = std::max(gmax2, grad[t]);
        grad_diff = gmax + grad[t];
      } else {
        if (at_upper(t)) continue;
        gmax2 = std::max(gmax2, -grad[t]);
        grad_diff = gmax - grad[t];
      }
      if (grad_diff > 0.0) {
        double quad = rows.diag(i) + rows.diag(t) - 2.0 * ki[t];
        if (quad <= 0.0) quad = kTau;
        const double obj = -(grad_diff * grad_diff) / quad;
        if (obj <= best) { best = obj; j = t; }
      }
    }
    gap = gmax + gmax2;
    if (gap < opts.tol || j < 0) break;

    const double* kj = rows.row(j);
    ki = rows.row(i);
    const double kij = ki[j];
    const double old_ai = alpha[i];
    const double old_aj = alpha[j];
    double quad = rows.diag(i) + rows.diag(j) - 2.0 * kij;
    if (quad <= 0.0) quad = kTau;
    if (yd[i] != yd[j]) {
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }
    const double dai = alpha[i] - old_ai;
    const double daj = alpha[j] - old_aj;
    for (Index t = 0; t < n; ++t) {
      grad[t] += yd[t] * (yd[i] * ki[t] * dai + yd[j] * kj[t] * daj);
    }
  }

  // Offset from free support vectors, else the midpoint of the feasible range.
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  double sum_free = 0.0;
  Index nr_free = 0;
  for (Index t = 0; t < n; ++t) {
    const double yg = yd[t] * grad[t];
    if (at_upper(t)) {
      if (yd[t] < 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (at_lower(t)) {
      if (yd[t] > 0) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++nr_free;
      sum_free += yg;
    }
  }
  const double rho = nr_free > 0 ? sum_free / static_cast<double>(nr_free) : 0.5 * (ub + lb);

  SvmModel model;
  model.coeffs = alpha.cwiseProduct(yd);
  model.bias = -rho;
  model.kernel = kernel;
  model.support_points = z;
  if (info) {
    info->iterations = iter;
    info->final_gap = gap;
    info->alpha = alpha;
  }
  return model;
}

double svm_decide_plain(const SvmModel& model, const Vector& t) {
  if (t.size() != model.p()) {
    throw InvalidArgument("svm_decide_plain: input has dimension " + std::to_string(t.size()) +
                          ", model expects " + std::to_string(model.p()));
  }
  return model.coeffs.dot(kernel_column(model.kernel, model.support_points, t)) + model.bias;
}

double enc_inner_product(const Vector& t_star, const Vector& x_star, const Matrix& a_inv_gram) {
  if (t_star.size() != x_star.size() || a_inv_gram.rows() != t_star.size() ||
      a_inv_gram.cols() != t_star.size()) {
    throw InvalidArgument("enc_inner_product: dimension mismatch");
  }
  return t_star.dot(a_inv_gram * x_star);
}

double enc_distance(const Vector& t_star, const Vector& x_star, const Matrix& a_inv_gram) {
  if (t_star.size() != x_star.size() || a_inv_gram.rows() != t_star.size() ||
      a_inv_gram.cols() != t_star.size()) {
    throw InvalidArgument("enc_distance: dimension mismatch");
  }
  const Vector d = x_star - t_star;
  return std::sqrt(std::max(0.0, d.dot(a_inv_gram * d)));
}

double svm_decide_encrypted(const SvmPayload& model, const Matrix& x_star,
                            const Vector& t_star, const Matrix& a_inv_gram) {
  validate(model.kernel);
  const Index p = x_star.rows();
  if (t_star.size() != p || a_inv_gram.rows() != p || a_inv_gram.cols() != p) {
    throw InvalidArgument("svm_decide_encrypted: dimension mismatch");
  }
  if (model.coeffs.size() != x_star.cols()) {
    throw InvalidArgument("svm_decide_encrypted: coefficient count differs from record count");
  }
  const Index n = x_star.cols();
  Vector k(n);
  if (model.kernel.kind == KernelKind::kRbf) {
    const Matrix d = x_star.colwise() - t_star;
    const Matrix md = a_inv_gram * d;
    const Vector sq = d.cwiseProduct(md).colwise().sum().transpose();
    for (Index i = 0; i < n; ++i) k[i] = kernel_value(model.kernel, 0.0, std::max(0.0, sq[i]));
  } else {
    const Vector inner = x_star.transpose() * (a_inv_gram * t_star);
    for (Index i = 0; i < n; ++i) k[i] = kernel_value(model.kernel, inner[i], 0.0);
  }
  return model.coeffs.dot(k) + model.bias;
}

void validate(const NnModel& model) {
  const Index m = model.hidden();
  if (m < 1 || model.p() < 1) throw InvalidArgument("nn model: empty layer");
  if (model.hidden_b.size() != m || model.out_w.size() != m) {
    throw InvalidArgument("nn model: layer sizes disagree");
  }
  if (!model.hidden_w.allFinite() || !model.hidden_b.allFinite() || !model.out_w.allFinite() ||
      !std::isfinite(model.out_b)) {
    throw InvalidArgument("nn model: non-finite parameter");
  }
}

NnModel init_nn(Index p, Index hidden, std::uint64_t seed) {
  if (p < 1 || hidden < 1) throw InvalidArgument("init_nn: dimensions must be positive");
  NnModel model;
  model.hidden_w = gen_gaussian(hidden, p, 1.0 / std::sqrt(static_cast<double>(p)), seed);
  model.hidden_b = Vector::Zero(hidden);
  model.out_w = gen_gaussian(hidden, 1, 1.0 / std::sqrt(static_cast<double>(hidden)),
                             mix_seed(seed, 1));
  model.out_b = 0.0;
  return model;
}

double nn_forward(const NnModel& model, const Vector& x) {
  if (x.size() != model.p()) {
    throw InvalidArgument("nn_forward: input has dimension " + std::to_string(x.size()) +
                          ", model expects " + std::to_string(model.p()));
  }
  Vector h = model.hidden_w * x + model.hidden_b;
  h = h.unaryExpr([](double v) { return logistic(v); });
  const double u = model.out_b + model.out_w.dot(h);
  return model.output == OutputActivation::kLogistic ? logistic(u) : u;
}

double nn_forward(const EncNnModel& model, const Vector& x_star) {
  return nn_forward(model.masked, x_star);
}

int nn_label(const NnModel& model, double score) {
  const double threshold = model.output == OutputActivation::kLogistic ? 0.5 : 0.0;
  return score >= threshold ? 1 : -1;
}

double nn_loss_and_gradient(const NnModel& model, const Matrix& z, std::span<const int> y,
                            NnGradient& grad) {
  const Index n = z.cols();
  if (z.rows() != model.p()) throw InvalidArgument("nn loss: dimension mismatch");
  if (static_cast<Index>(y.size()) != n || n == 0) {
    throw InvalidArgument("nn loss: label count differs from sample count");
  }
  if (model.output != OutputActivation::kLogistic) {
    throw InvalidArgument("nn loss: training supports the logistic output only");
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix h = (model.hidden_w * z).colwise() + model.hidden_b;
  h = h.unaryExpr([](double v) { return logistic(v); });
  const Vector u = (h.transpose() * model.out_w).array() + model.out_b;
  double loss = 0.0;
  Vector du(n);
  for (Index i = 0; i < n; ++i) {
    const double target = y[i] > 0 ? 1.0 : 0.0;
    loss += softplus(u[i]) - target * u[i];
    du[i] = (logistic(u[i]) - target) * inv_n;
  }
  grad.out_w = h * du;
  grad.out_b = du.sum();
  const Matrix dpre =
      ((model.out_w * du.transpose()).array() * h.array() * (1.0 - h.array())).matrix();
  grad.hidden_w = dpre * z.transpose();
  grad.hidden_b = dpre.rowwise().sum();
  return loss * inv_n;
}

double nn_loss(const NnModel& model, const Matrix& z, std::span<const int> y) {
  NnGradient unused;
  return nn_loss_and_gradient(model, z, y, unused);
}

NnModel train_nn(const Matrix& z, std::span<const int> y, const NnOptions& opts,
                 std::vector<double>* loss_history) {
  if (opts.hidden < 1) throw InvalidArgument("train_nn: need at least one hidden neuron");
  if (opts.epochs < 0 || !(opts.lr > 0.0)) {
    throw InvalidArgument("train_nn: epochs must be nonnegative and lr positive");
  }
  require_finite(z, "train_nn input");
  check_labels(y, z.cols(), "train_nn");
  NnModel model = init_nn(z.rows(), opts.hidden, opts.seed);
  NnGradient g;
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    const double loss = nn_loss_and_gradient(model, z, y, g);
    if (!std::isfinite(loss)) {
      throw NumericalFailure("train_nn: loss diverged at epoch " + std::to_string(epoch));
    }
    if (loss_history) loss_history->push_back(loss);
    model.hidden_w -= opts.lr * g.hidden_w;
    model.hidden_b -= opts.lr * g.hidden_b;
    model.out_w -= opts.lr * g.out_w;
    model.out_b -= opts.lr * g.out_b;
  }
  if (loss_history && opts.epochs > 0) {
    const double final_loss = nn_loss(model, z, y);
    if (!std::isfinite(final_loss)) throw NumericalFailure("train_nn: loss diverged");
    loss_history->push_back(final_loss);
  }
  return model;
}

EncNnModel transform_nn_weights(const NnModel& model, const Matrix& a) {
  validate(model);
  if (a.rows() != model.p() || a.cols() != model.p()) {
    throw InvalidArgument("transform_nn_weights: A must be p x p");
  }
  const Matrix a_inv = invert(a, kDefaultConditionLimit);
  EncNnModel out{model};
  // Row alpha_i^T becomes alpha_i^T A^{-1}, i.e. ((A^{-1})^T alpha_i)^T.
  out.masked.hidden_w = model.hidden_w * a_inv;
  return out;
}

void write_svm_payload(ByteWriter& w, const SvmPayload& payload) {
  write_kernel(w, payload.kernel);
  w.put_u32(static_cast<std::uint32_t>(payload.coeffs.size()));
  w.put_f64(payload.kernel.gamma);
  w.put_f64(payload.kernel.kappa);
  w.put_f64(payload.kernel.coef0);
  w.put_f64(payload.bias);
  for (Index i = 0; i < payload.coeffs.size(); ++i) w.put_f64(payload.coeffs[i]);
}

SvmPayload read_svm_payload(ByteReader& r) {
  SvmPayload payload;
  payload.kernel = read_kernel(r);
  const Index n = r.get_u32();
  payload.kernel.gamma = r.get_f64();
  payload.kernel.kappa = r.get_f64();
  payload.kernel.coef0 = r.get_f64();
  payload.bias = r.get_f64();
  if (r.remaining() < static_cast<std::size_t>(n) * 8) {
    throw DecodeError("truncated SVM coefficients", r.offset());
  }
  payload.coeffs.resize(n);
  for (Index i = 0; i < n; ++i) payload.coeffs[i] = r.get_f64();
  return payload;
}

std::size_t svm_payload_size(Index n) {
  return 1 + 4 + 4 + 8 * (4 + static_cast<std::size_t>(n));
}

void write_nn_payload(ByteWriter& w, const NnModel& model) {
  w.put_u8(static_cast<std::uint8_t>(model.output));
  w.put_u32(static_cast<std::uint32_t>(model.p()));
  w.put_u32(static_cast<std::uint32_t>(model.hidden()));
  for (Index i = 0; i < model.hidden(); ++i) {
    for (Index j = 0; j < model.p(); ++j) w.put_f64(model.hidden_w(i, j));
  }
  for (Index i = 0; i < model.hidden(); ++i) w.put_f64(model.hidden_b[i]);
  for (Index i = 0; i < model.hidden(); ++i) w.put_f64(model.out_w[i]);
  w.put_f64(model.out_b);
}

NnModel read_nn_payload(ByteReader& r) {
  const std::size_t at = r.offset();
  const std::uint8_t act = r.get_u8();
  if (act != 1 && act != 2) throw DecodeError("unknown output activation", at);
  NnModel model;
  model.output = static_cast<OutputActivation>(act);
  const Index p = r.get_u32();
  const Index m = r.get_u32();
  if (p == 0 || m == 0) throw DecodeError("empty network layer", at);
  const std::size_t floats = static_cast<std::size_t>(m * p + 2 * m + 1);
  if (r.remaining() < floats * 8) throw DecodeError("truncated network weights", r.offset());
  model.hidden_w.resize(m, p);
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < p; ++j) model.hidden_w(i, j) = r.get_f64();
  }
  model.hidden_b.resize(m);
  for (Index i = 0; i < m; ++i) model.hidden_b[i] = r.get_f64();
  model.out_w.resize(m);
  for (Index i = 0; i < m; ++i) model.out_w[i] = r.get_f64();
  model.out_b = r.get_f64();
  return model;
}

std::size_t nn_payload_size(Index p, Index hidden) {
  return 1 + 4 + 4 + 8 * static_cast<std::size_t>(hidden * p + 2 * hidden + 1);
}

Bytes encode_svm_model(const SvmModel& model) {
  validate(model.kernel);
  if (model.coeffs.size() != model.n()) throw InvalidArgument("svm model: size mismatch");
  ByteWriter w;
  w.put_magic(std::string_view(kSvmMagic, 4));
  w.put_u8(kModelVersion);
  write_svm_payload(w, SvmPayload{model.coeffs, model.bias, model.kernel});
  w.put_u32(static_cast<std::uint32_t>(model.p()));
  for (Index j = 0; j < model.n(); ++j) {
    for (Index i = 0; i < model.p(); ++i) w.put_f64(model.support_points(i, j));
  }
  return std::move(w).take();
}

SvmModel decode_svm_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kSvmMagic, 4));
  const std::size_t version_at = r.offset();
  if (r.get_u8() != kModelVersion) throw DecodeError("unsupported SVM model version", version_at);
  SvmPayload payload = read_svm_payload(r);
  const Index p = r.get_u32();
  const Index n = payload.coeffs.size();
  if (r.remaining() != static_cast<std::size_t>(p * n) * 8) {
    throw DecodeError("support-point block length mismatch", r.offset());
  }
  SvmModel model;
  model.coeffs = std::move(payload.coeffs);
  model.bias = payload.bias;
  model.kernel = payload.kernel;
  model.support_points.resize(p, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < p; ++i) model.support_points(i, j) = r.get_f64();
  }
  r.expect_end();
  return model;
}

Bytes encode_nn_model(const NnModel& model) {
  validate(model);
  ByteWriter w;
  w.put_magic(std::string_view(kNnMagic, 4));
  w.put_u8(kModelVersion);
  write_nn_payload(w, model);
  return std::move(w).take();
}

NnModel decode_nn_model(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  r.expect_magic(std::string_view(kNnMagic, 4));
  const std::size_t version_at = r.offset();
  if (r.get_u8() != kModelVersion) throw DecodeError("unsupported NN model version", version_at);
  NnModel model = read_nn_payload(r);
  r.expect_end();
  return model;
}

}  // namespace maskpredict
