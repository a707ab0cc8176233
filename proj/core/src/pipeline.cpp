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

#include "maskpredict/pipeline.hpp"

#include <charconv>
#include <cmath>
#include <sstream>
#include <string>

#include "maskpredict/byte_io.hpp"
#include "maskpredict/error.hpp"
#include "maskpredict/rng.hpp"

namespace maskpredict {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw InvalidArgument("config: bad value '" + std::string(value) + "' for " +
                          std::string(key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw InvalidArgument("config: bad boolean '" + std::string(value) + "' for " +
                        std::string(key));
}

std::string kernel_name(const Kernel& k) {
  switch (k.kind) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kPolynomial: return "poly";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kTanh: return "tanh";
  }
  return "linear";
}

}  // namespace

const char* to_string(ModelType type) { return type == ModelType::kNn ? "nn" : "svm"; }

ModelType parse_model_type(std::string_view name) {
  if (name == "svm") return ModelType::kSvm;
  if (name == "nn") return ModelType::kNn;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (expected svm or nn)");
}

void apply_config_value(SessionConfig& cfg, std::string_view key, std::string_view value) {
  key = trim(key);
  value = trim(value);
  if (key == "q") cfg.q = parse_number<Index>(key, value);
  else if (key == "p") cfg.p = parse_number<Index>(key, value);
  else if (key == "n") cfg.n = parse_number<Index>(key, value);
  else if (key == "classes") cfg.classes = parse_number<int>(key, value);
  else if (key == "bits") cfg.bits = parse_number<int>(key, value);
  else if (key == "kernel") {
    const Kernel k = parse_kernel(value);
    // Keep tuned parameters when only the kind is restated.
    if (k.kind != cfg.kernel.kind) cfg.kernel = k;
  }
  else if (key == "degree") cfg.kernel.degree = parse_number<int>(key, value);
  else if (key == "gamma") cfg.kernel.gamma = parse_number<double>(key, value);
  else if (key == "kappa") cfg.kernel.kappa = parse_number<double>(key, value);
  else if (key == "coef0") cfg.kernel.coef0 = parse_number<double>(key, value);
  else if (key == "method") cfg.method = parse_projection_method(value);
  else if (key == "model") cfg.model = parse_model_type(value);
  else if (key == "block_size") cfg.block_size = parse_number<Index>(key, value);
  else if (key == "shared_block") cfg.shared_block = parse_bool(key, value);
  else if (key == "alpha") cfg.alpha = parse_number<double>(key, value);
  else if (key == "key_sigma") cfg.key_sigma = parse_number<double>(key, value);
  else if (key == "seed") {
    const auto s = parse_number<std::uint64_t>(key, value);
    cfg.key_seed = mix_seed(s, 1);
    cfg.data_seed = mix_seed(s, 2);
    cfg.session_seed = mix_seed(s, 3);
  }
  else if (key == "key_seed") cfg.key_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "data_seed") cfg.data_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "session_seed") cfg.session_seed = parse_number<std::uint64_t>(key, value);
  else if (key == "hidden") cfg.hidden = parse_number<Index>(key, value);
  else if (key == "epochs") cfg.epochs = parse_number<int>(key, value);
  else if (key == "lr") cfg.lr = parse_number<double>(key, value);
  else if (key == "svm_c") cfg.svm_c = parse_number<double>(key, value);
  else throw InvalidArgument("config: unknown key '" + std::string(key) + "'");
}

SessionConfig parse_config(std::string_view text, SessionConfig base) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw InvalidArgument("config line " + std::to_string(line_no) + ": expected key=value");
    }
    apply_config_value(base, line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

SessionConfig load_config(const std::filesystem::path& path, SessionConfig base) {
  const Bytes raw = read_file(path);
  return parse_config(std::string_view(reinterpret_cast<const char*>(raw.data()), raw.size()),
                      std::move(base));
}

std::string format_config(const SessionConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  os << "q=" << cfg.q << "\np=" << cfg.p << "\nn=" << cfg.n << "\nclasses=" << cfg.classes
     << "\nbits=" << cfg.bits << "\nkernel=" << kernel_name(cfg.kernel)
     << "\ndegree=" << cfg.kernel.degree << "\ngamma=" << cfg.kernel.gamma
     << "\nkappa=" << cfg.kernel.kappa << "\ncoef0=" << cfg.kernel.coef0
     << "\nmethod=" << to_string(cfg.method) << "\nmodel=" << to_string(cfg.model)
     << "\nblock_size=" << cfg.block_size << "\nshared_block=" << (cfg.shared_block ? 1 : 0)
     << "\nalpha=" << cfg.alpha << "\nkey_sigma=" << cfg.key_sigma
     << "\nkey_seed=" << cfg.key_seed << "\ndata_seed=" << cfg.data_seed
     << "\nsession_seed=" << cfg.session_seed << "\nhidden=" << cfg.hidden
     << "\nepochs=" << cfg.epochs << "\nlr=" << cfg.lr << "\nsvm_c=" << cfg.svm_c << "\n";
  return os.str();
}

void validate(const SessionConfig& cfg) {
  if (cfg.q < 2) throw InvalidArgument("q must be at least 2");
  if (cfg.p < 1 || cfg.p > cfg.q) throw InvalidArgument("p must be in [1, q]");
  if (cfg.n < 2) throw InvalidArgument("n must be at least 2");
  if (cfg.classes < 2) throw InvalidArgument("classes must be at least 2");
  // The synthetic generator wants ten records per class.
  if (cfg.n < 10 * static_cast<Index>(cfg.classes)) {
    throw InvalidArgument("n must be at least 10 * classes");
  }
  if (cfg.p >= cfg.n) throw InvalidArgument("p must be below n");
  if (cfg.bits != kRawBits && (cfg.bits < kMinBits || cfg.bits > kMaxBits)) {
    throw InvalidArgument("bits must be in [2, 32] or 64");
  }
  validate(cfg.kernel);
  if (cfg.block_size < 0 || (cfg.block_size > 0 && cfg.q % cfg.block_size != 0)) {
    throw InvalidArgument("block_size " + std::to_string(cfg.block_size) + " does not divide q " +
                          std::to_string(cfg.q));
  }
  if (cfg.block_size == 1) throw InvalidArgument("block_size must be at least 2");
  if (!(cfg.alpha > 0.0) || !std::isfinite(cfg.alpha)) {
    throw InvalidArgument("alpha must be positive");
  }
  if (!std::isfinite(cfg.key_sigma)) throw InvalidArgument("key_sigma must be finite");
  if (cfg.model == ModelType::kNn) {
    if (cfg.hidden < 1) throw InvalidArgument("hidden must be positive");
    if (cfg.epochs < 1) throw InvalidArgument("epochs must be positive");
    if (!(cfg.lr > 0.0)) throw InvalidArgument("lr must be positive");
  }
  if (cfg.model == ModelType::kSvm && !(cfg.svm_c > 0.0)) {
    throw InvalidArgument("svm_c must be positive");
  }
}

int binary_label(int class_index) { return class_index == 0 ? 1 : -1; }

MaskKey make_config_key(const SessionConfig& cfg) {
  KeygenOptions opts;
  opts.q = cfg.q;
  opts.sigma = cfg.key_sigma;
  if (cfg.block_size > 0 && cfg.block_size != cfg.q) opts.block_size = cfg.block_size;
  opts.shared_block = cfg.shared_block;
  opts.seed = cfg.key_seed;
  return keygen(opts);
}

Projection fit_config_projection(const SessionConfig& cfg, const SignalDatabase& db) {
  switch (cfg.method) {
    case ProjectionMethod::kPca:
      return fit_pca(db, cfg.p, FitOptions{false});
    case ProjectionMethod::kLda: {
      LdaOptions opts;
      opts.center = false;
      opts.strict = cfg.p <= cfg.classes - 1;
      return fit_lda(db, cfg.p, opts);
    }
    case ProjectionMethod::kIca: {
      IcaOptions opts;
      opts.center = false;
      opts.whiten_dim = cfg.p;
      opts.seed = mix_seed(cfg.data_seed, 7);
      return fit_ica(db, cfg.p, opts);
    }
  }
  throw InvalidArgument("unknown projection method");
}

TrainedModel train_config_model(const SessionConfig& cfg, const Matrix& z,
                                const std::vector<int>& labels) {
  std::vector<int> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) y[i] = binary_label(labels[i]);
  if (cfg.model == ModelType::kSvm) {
    SvmOptions opts;
    opts.c = cfg.svm_c;
    return train_svm(z, y, cfg.kernel, opts);
  }
  NnOptions opts;
  opts.hidden = cfg.hidden;
  opts.epochs = cfg.epochs;
  opts.lr = cfg.lr;
  opts.seed = mix_seed(cfg.data_seed, 11);
  return train_nn(z, y, opts);
}

Pipeline build_pipeline(const SessionConfig& cfg, std::shared_ptr<const MaskKey> key) {
  validate(cfg);
  Pipeline out;
  out.config = cfg;
  if (key) {
    if (key->q != cfg.q) throw InvalidArgument("key dimension differs from config q");
    out.key = std::move(key);
  } else {
    out.key = std::make_shared<const MaskKey>(make_config_key(cfg));
  }
  out.db = synth_dataset(cfg.n, cfg.q, cfg.classes, cfg.data_seed);
  Projection proj = fit_config_projection(cfg, out.db);
  const Matrix z = project_columns(proj, out.db.x);
  TrainedModel model = train_config_model(cfg, z, out.db.labels);
  out.server = make_server_context(out.key, std::move(proj), out.db.x, std::move(model));
  return out;
}

SignalDatabase client_signals(const SessionConfig& cfg, Index count, std::uint64_t seed) {
  return synth_dataset(count, cfg.q, cfg.classes, seed);
}

}  // namespace maskpredict
