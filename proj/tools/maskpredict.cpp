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

// maskpredict: key provisioning, synthetic data, training, end-to-end
// sessions, privacy probes and cost benchmarks from one binary.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "maskpredict/audit.hpp"
#include "maskpredict/error.hpp"
#include "maskpredict/pipeline.hpp"
#include "maskpredict/rng.hpp"

namespace mp = maskpredict;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

// Session bound used when reporting full-scale timings.
constexpr int kSessionBoundMs = 5000;
constexpr std::size_t kOneMegabyte = 1'000'000;
constexpr double kLdpSeBand = 3.0;
constexpr double kSpanTolerance = 1e-8;

int exit_code(mp::ErrorKind kind) {
  switch (kind) {
    case mp::ErrorKind::kInvalidArgument: return kExitUsage;
    case mp::ErrorKind::kIo:
    case mp::ErrorKind::kDecode: return kExitIo;
    default: return kExitNumerical;
  }
}

std::uint64_t parse_seed(const std::string& text) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw mp::InvalidArgument("seed must be an unsigned integer, got '" + text + "'");
  }
  return v;
}

std::optional<std::string> env_seed() {
  if (const char* s = std::getenv("MASKPREDICT_SEED"); s && *s) return std::string(s);
  return std::nullopt;
}

// Flags that map onto SessionConfig keys. Precedence: built-in defaults,
// MASKPREDICT_SEED, --config file, then flags.
struct ConfigFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<std::string> seed;

  void add_key(CLI::App* cmd, const std::string& flag, const std::string& key,
               const std::string& help) {
    cmd->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { overrides.emplace_back(key, v); }, help);
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--config", config_path, "key=value session config file");
    add_key(cmd, "--q", "q", "signal dimension");
    add_key(cmd, "--p", "p", "projected dimension");
    add_key(cmd, "--n", "n", "database records");
    add_key(cmd, "--bits", "bits", "wire bit width (2..32, or 64 for raw)");
    add_key(cmd, "--kernel", "kernel", "linear, poly, rbf or tanh");
    add_key(cmd, "--method", "method", "pca, lda or ica");
    add_key(cmd, "--model", "model", "svm or nn");
    add_key(cmd, "--block-size", "block_size", "key block size q* (0 = dense)");
    add_key(cmd, "--classes", "classes", "number of classes in the synthetic data");
    cmd->add_option("--seed", seed, "root seed (default: MASKPREDICT_SEED)");
  }

  bool has(const std::string& key) const {
    return std::any_of(overrides.begin(), overrides.end(),
                       [&](const auto& kv) { return kv.first == key; });
  }

  mp::SessionConfig resolve() const {
    mp::SessionConfig cfg;
    if (auto s = env_seed()) mp::apply_config_value(cfg, "seed", *s);
    if (!config_path.empty()) cfg = mp::load_config(config_path, cfg);
    if (seed) mp::apply_config_value(cfg, "seed", *seed);
    for (const auto& [k, v] : overrides) mp::apply_config_value(cfg, k, v);
    return cfg;
  }
};

std::uint64_t plain_seed(const std::optional<std::string>& flag) {
  if (flag) return parse_seed(*flag);
  if (auto s = env_seed()) return parse_seed(*s);
  return 0;
}

void precision_warning(int bits) {
  if (bits != mp::kRawBits && bits <= 8) {
    std::cerr << "warning: bits=" << bits
              << " gives coarse quantization (max elementwise error around 1e-2 on unit-norm"
                 " data); encrypted labels may differ from plaintext near the boundary\n";
  }
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw mp::IoError("cannot open '" + path + "' for writing");
  return os;
}

std::string describe(const mp::SessionConfig& c) {
  std::ostringstream os;
  os << "q=" << c.q << " p=" << c.p << " n=" << c.n << " bits=" << c.bits
     << " kernel=" << mp::to_string(c.kernel.kind) << " method=" << mp::to_string(c.method)
     << " model=" << mp::to_string(c.model);
  if (c.block_size > 0) os << " block=" << c.block_size;
  return os.str();
}

void print_certificate(const mp::MaskKey& key) {
  std::cout << "block  min_eig_gap   spectral_radius  cond         distinct\n";
  const std::size_t shown = std::min<std::size_t>(key.num_blocks(), 12);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& e = key.eig_reports[i];
    std::cout << std::setw(5) << i << "  " << std::scientific << std::setprecision(3)
              << std::setw(12) << e.min_pairwise_gap << "  " << std::setw(15)
              << e.spectral_radius << "  " << std::setw(11) << key.block_conditions[i] << "  "
              << (e.distinct ? "yes" : "no") << "\n";
  }
  if (shown < key.num_blocks()) std::cout << "  ... " << key.num_blocks() - shown << " more\n";
  std::cout.unsetf(std::ios::floatfield);
  std::size_t distinct = 0;
  for (const auto& e : key.eig_reports) distinct += e.distinct;
  std::cout << "certificate: " << distinct << "/" << key.num_blocks()
            << " blocks have distinct eigenvalues\n";
}

// ---- keygen ------------------------------------------------------------------

struct KeygenArgs {
  ConfigFlags flags;
  double sigma = 0.0;
  bool shared_block = false;
  std::string out;
};

int run_keygen(const KeygenArgs& a) {
  mp::SessionConfig cfg = a.flags.resolve();
  cfg.key_sigma = a.sigma;
  cfg.shared_block = a.shared_block;
  if (cfg.q < 2) throw mp::InvalidArgument("q must be at least 2");
  if (cfg.block_size < 0 || (cfg.block_size > 0 && cfg.q % cfg.block_size != 0)) {
    throw mp::InvalidArgument("block size " + std::to_string(cfg.block_size) +
                              " does not divide q=" + std::to_string(cfg.q));
  }
  const mp::MaskKey key = mp::make_config_key(cfg);
  mp::save_key(key, a.out);
  std::cout << "wrote " << a.out << " (q=" << key.q << ", ";
  if (key.block_size == 0) {
    std::cout << "dense";
  } else {
    std::cout << key.num_blocks() << " blocks of " << key.block_size;
  }
  std::cout << ", sigma=" << key.sigma << ")\n";
  print_certificate(key);
  return kExitOk;
}

// ---- synth -------------------------------------------------------------------

struct SynthArgs {
  ConfigFlags flags;
  std::string out;
};

int run_synth(const SynthArgs& a) {
  const mp::SessionConfig cfg = a.flags.resolve();
  const mp::SignalDatabase db = mp::synth_dataset(cfg.n, cfg.q, cfg.classes, cfg.data_seed);
  mp::save_database(db, a.out);
  std::cout << "wrote " << a.out << " (" << db.n() << " records, q=" << db.q() << ", "
            << db.num_classes << " classes)\n";
  return kExitOk;
}

// ---- train -------------------------------------------------------------------

struct TrainArgs {
  ConfigFlags flags;
  std::string data;
  std::string out;
};

int run_train(const TrainArgs& a) {
  mp::SessionConfig cfg = a.flags.resolve();
  mp::SignalDatabase db;
  if (a.data.empty()) {
    mp::validate(cfg);
    db = mp::synth_dataset(cfg.n, cfg.q, cfg.classes, cfg.data_seed);
  } else {
    db = mp::load_database(a.data);
    cfg.q = db.q();
    cfg.n = db.n();
    cfg.classes = db.num_classes;
  }
  const mp::Projection proj = mp::fit_config_projection(cfg, db);
  for (const auto& w : proj.warnings) std::cerr << "warning: " << w << "\n";
  const mp::Matrix z = mp::project_columns(proj, db.x);
  const mp::TrainedModel model = mp::train_config_model(cfg, z, db.labels);
  int correct = 0;
  for (mp::Index i = 0; i < db.n(); ++i) {
    const int want = mp::binary_label(db.labels[i]);
    int got = 0;
    if (const auto* svm = std::get_if<mp::SvmModel>(&model)) {
      got = mp::svm_label(mp::svm_decide_plain(*svm, z.col(i)));
    } else {
      const auto& nn = std::get<mp::NnModel>(model);
      got = mp::nn_label(nn, mp::nn_forward(nn, z.col(i)));
    }
    correct += got == want;
  }
  const mp::Bytes bytes = std::holds_alternative<mp::SvmModel>(model)
                              ? mp::encode_svm_model(std::get<mp::SvmModel>(model))
                              : mp::encode_nn_model(std::get<mp::NnModel>(model));
  if (!a.out.empty()) mp::write_file(a.out, bytes);
  std::cout << "trained " << mp::to_string(cfg.model) << " on " << mp::to_string(cfg.method)
            << " projection (" << describe(cfg) << ")\n"
            << "training accuracy " << correct << "/" << db.n() << "\n";
  if (!a.out.empty()) std::cout << "wrote " << a.out << " (" << bytes.size() << " bytes)\n";
  return kExitOk;
}

// ---- demo --------------------------------------------------------------------

struct DemoArgs {
  ConfigFlags flags;
  std::string key_path;
  int sessions = 1;
  std::string csv;
};

int run_demo(const DemoArgs& a) {
  mp::SessionConfig cfg = a.flags.resolve();
  std::shared_ptr<const mp::MaskKey> key;
  if (!a.key_path.empty()) {
    key = std::make_shared<const mp::MaskKey>(mp::load_key(a.key_path));
    if (a.flags.has("q") && cfg.q != key->q) {
      throw mp::InvalidArgument("--q " + std::to_string(cfg.q) + " differs from key q=" +
                                std::to_string(key->q));
    }
    cfg.q = key->q;
    cfg.block_size = key->block_size;
  }
  if (a.sessions < 1) throw mp::InvalidArgument("--sessions must be positive");
  mp::validate(cfg);
  precision_warning(cfg.bits);

  const mp::Pipeline pl = mp::build_pipeline(cfg, key);
  for (const auto& w : pl.server->projection.warnings) std::cerr << "warning: " << w << "\n";
  const mp::Index count = std::max<mp::Index>(a.sessions, 10 * cfg.classes);
  const mp::SignalDatabase signals =
      mp::client_signals(cfg, count, mp::mix_seed(cfg.session_seed, 99));

  std::cout << "config: " << describe(cfg) << "\n";
  std::ofstream csv;
  if (!a.csv.empty()) {
    csv = open_csv(a.csv);
    csv << "session,encrypted_score,plaintext_score,encrypted_label,plaintext_label,"
           "bytes_ei1,bytes_eii1,bytes_eii2,total_ms\n";
  }
  int matched = 0;
  std::cout << std::setprecision(10);
  for (int s = 0; s < a.sessions; ++s) {
    mp::SessionOptions opts{cfg.bits, cfg.alpha, mp::mix_seed(cfg.session_seed, s)};
    const mp::SessionReport r = mp::run_session(pl.server, signals.x.col(s), opts);
    matched += r.labels_match();
    if (s < 5 || !r.labels_match()) {
      std::cout << "session " << s << ": encrypted " << r.encrypted.score << " (label "
                << std::showpos << r.encrypted.label << std::noshowpos << ")  plaintext "
                << r.plaintext.score << " (label " << std::showpos << r.plaintext.label
                << std::noshowpos << ")  " << (r.labels_match() ? "match" : "MISMATCH") << "\n";
    }
    if (s == 0) {
      std::cout << "bytes: EI1 " << r.bytes_ei1 << "  EII1 " << r.bytes_eii1 << "  EII2 "
                << r.bytes_eii2 << "  total " << r.total_bytes() << "\n"
                << std::fixed << std::setprecision(3) << "timings ms: share "
                << r.timings.client_share_ms << "  server setup " << r.timings.server_setup_ms
                << "  masking " << r.timings.masking_ms << "  bundle " << r.timings.bundle_ms
                << "  prediction " << r.timings.prediction_ms << "  total "
                << r.timings.total_ms << "\n";
      std::cout.unsetf(std::ios::floatfield);
      std::cout << std::setprecision(10);
    }
    if (csv) {
      csv << s << "," << std::setprecision(17) << r.encrypted.score << "," << r.plaintext.score
          << "," << r.encrypted.label << "," << r.plaintext.label << "," << r.bytes_ei1 << ","
          << r.bytes_eii1 << "," << r.bytes_eii2 << "," << r.timings.total_ms << "\n";
    }
  }
  std::cout << "labels matched " << matched << "/" << a.sessions << "\n";
  return matched == a.sessions ? kExitOk : kExitNumerical;
}

// ---- audit -------------------------------------------------------------------

struct LdpArgs {
  std::vector<double> sigmas{2.0, 1.0, 0.5, 0.25};
  double r1 = 1.0;
  double r2 = 2.0;
  double t = 1.0;
  long samples = 1'000'000;
  mp::Index dim = 8;
  std::optional<std::string> seed;
  std::string csv;
};

int run_audit_ldp(const LdpArgs& a) {
  if (!(a.r1 > 0.0) || !(a.r2 > 0.0)) throw mp::InvalidArgument("norms must be positive");
  if (a.dim < 1) throw mp::InvalidArgument("--dim must be positive");
  const std::uint64_t seed = plain_seed(a.seed);
  mp::LdpProbeConfig cfg;
  cfg.x1 = mp::gen_gaussian(a.dim, 1, 1.0, mp::mix_seed(seed, 1)).col(0).normalized() * a.r1;
  cfg.x2 = mp::gen_gaussian(a.dim, 1, 1.0, mp::mix_seed(seed, 2)).col(0).normalized() * a.r2;
  cfg.sigmas = a.sigmas;
  cfg.t = a.t;
  cfg.samples = a.samples;
  cfg.seed = mp::mix_seed(seed, 3);
  const auto rows = mp::ldp_ratio_probe(cfg);
  std::cout << "sigma      empirical  analytic   gap        se         eps_emp    eps_analytic\n";
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << std::scientific << std::setprecision(3) << r.sigma << "  " << r.empirical_ratio
              << "  " << r.analytic_ratio << "  " << r.abs_gap << "  " << r.std_error << "  "
              << r.epsilon_empirical << "  " << r.epsilon_analytic
              << (r.within(kLdpSeBand) ? "" : "  outside 3 SE") << "\n";
    ok = ok && r.within(kLdpSeBand);
  }
  std::cout.unsetf(std::ios::floatfield);
  std::cout << "note: ln(ratio) describes one interval event under the mask distribution; it is"
               " not a per-session epsilon guarantee\n";
  if (!a.csv.empty()) {
    auto os = open_csv(a.csv);
    mp::write_ldp_csv(os, rows);
  }
  std::cout << (ok ? "all gaps within 3 standard errors\n" : "probe invariant violated\n");
  return ok ? kExitOk : kExitNumerical;
}

struct DiffArgs {
  mp::Index q = 16;
  mp::Index block_size = 0;
  int trials = 100;
  double alpha = mp::kDefaultCoeffBound;
  std::optional<std::string> seed;
  std::string csv;
};

int run_audit_diff(const DiffArgs& a) {
  if (a.trials < 1) throw mp::InvalidArgument("--trials must be positive");
  const std::uint64_t seed = plain_seed(a.seed);
  mp::KeygenOptions ko;
  ko.q = a.q;
  ko.seed = mp::mix_seed(seed, 1);
  if (a.block_size > 0) ko.block_size = a.block_size;
  const mp::MaskKey key = mp::keygen(ko);
  const mp::Vector t = mp::gen_gaussian(a.q, 1, 1.0, mp::mix_seed(seed, 2)).col(0).normalized();
  const mp::DifferentialResult r = mp::differential_probe(t, key, a.trials, a.alpha,
                                                          mp::mix_seed(seed, 3));
  std::cout << "trials " << a.trials << "  span rank " << r.span_rank << "/" << a.q
            << "  max relative residual " << std::scientific << std::setprecision(3)
            << r.max_residual << "\n";
  std::cout.unsetf(std::ios::floatfield);
  if (!a.csv.empty()) {
    auto os = open_csv(a.csv);
    mp::write_differential_csv(os, r);
  }
  const bool ok = r.max_residual <= kSpanTolerance;
  std::cout << (ok ? "every difference lies in the Krylov span\n" : "probe invariant violated\n");
  return ok ? kExitOk : kExitNumerical;
}

struct PrecisionArgs {
  mp::Index rows = 50;
  mp::Index cols = 1000;
  std::vector<int> bits{8, 12, 13, 16, 24, 32};
  std::optional<std::string> seed;
  std::string csv;
};

int run_audit_precision(const PrecisionArgs& a) {
  const std::uint64_t seed = plain_seed(a.seed);
  const mp::Matrix db = mp::normalized_gaussian_columns(a.rows, a.cols, mp::mix_seed(seed, 1));
  const mp::Vector t = mp::normalized_gaussian_columns(a.rows, 1, mp::mix_seed(seed, 2)).col(0);
  const auto rows = mp::precision_sweep(a.bits, db, t);
  std::cout << "bits  T_A        T_B        T_C\n";
  for (const auto& r : rows) {
    std::cout << std::setw(4) << r.bits << "  " << std::scientific << std::setprecision(3)
              << r.measures.abs_diff << "  " << r.measures.euclidean << "  "
              << r.measures.cosine << "\n";
    std::cout.unsetf(std::ios::floatfield);
  }
  if (!a.csv.empty()) {
    auto os = open_csv(a.csv);
    mp::write_precision_csv(os, rows);
  }
  const bool ok = mp::precision_monotone(rows);
  std::cout << (ok ? "measures non-increasing in bit width\n" : "probe invariant violated\n");
  return ok ? kExitOk : kExitNumerical;
}

// ---- bench -------------------------------------------------------------------

struct ComputeArgs {
  std::vector<mp::Index> n{10000};
  mp::Index q = 1000;
  mp::Index p = 50;
  std::optional<mp::Index> block_size;
  int runs = 5;
  int warmup = 1;
  std::optional<std::string> seed;
  std::string csv;
};

int run_bench_compute(const ComputeArgs& a) {
  if (a.runs < 1 || a.warmup < 0) throw mp::InvalidArgument("--runs must be positive");
  const mp::Index block = a.block_size ? *a.block_size : mp::bench_block_size(a.q);
  std::vector<mp::ComputePoint> grid;
  for (mp::Index n : a.n) grid.push_back({n, a.q, a.p, block});
  std::cout << "machine: " << mp::machine_descriptor() << "\n";
  const auto rows = mp::bench_compute(grid, {a.warmup, a.runs}, plain_seed(a.seed));
  std::cout << "n       q     p    block  share_ms  setup_ms  mask_ms  bundle_ms  pred_ms  total_ms\n"
            << std::fixed << std::setprecision(2);
  bool within = true;
  for (const auto& r : rows) {
    const auto& m = r.median;
    std::cout << std::setw(6) << r.point.n << "  " << std::setw(4) << r.point.q << "  "
              << std::setw(3) << r.point.p << "  " << std::setw(5) << r.point.block_size << "  "
              << std::setw(8) << m.client_share_ms << "  " << std::setw(8) << m.server_setup_ms
              << "  " << std::setw(7) << m.masking_ms << "  " << std::setw(9) << m.bundle_ms
              << "  " << std::setw(7) << m.prediction_ms << "  " << std::setw(8) << m.total_ms
              << "\n";
    within = within && m.total_ms <= kSessionBoundMs;
  }
  if (rows.size() >= 3) {
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
      xs.push_back(static_cast<double>(r.point.n));
      ys.push_back(r.median.total_ms);
    }
    const mp::LinearFit fit = mp::fit_line(xs, ys);
    std::cout << "linear fit in n: " << std::setprecision(5) << fit.slope << " ms/record, r^2 "
              << std::setprecision(4) << fit.r_squared << "\n";
  }
  std::cout.unsetf(std::ios::floatfield);
  std::cout << "median session time " << (within ? "within" : "above") << " the "
            << kSessionBoundMs << " ms acceptance bound (reference figure 850 ms at n=10000,"
               " q=1000, p=50)\n";
  if (!a.csv.empty()) {
    auto os = open_csv(a.csv);
    mp::write_compute_csv(os, rows);
  }
  return kExitOk;
}

struct CommArgs {
  std::vector<mp::Index> n{10000};
  mp::Index q = 1000;
  mp::Index p = 50;
  std::vector<int> bits{12};
  std::optional<std::string> seed;
  std::string csv;
};

int run_bench_comm(const CommArgs& a) {
  std::vector<mp::CommPoint> grid;
  for (mp::Index n : a.n) grid.push_back({n, a.q, a.p});
  const auto rows = mp::bench_comm(grid, a.bits, plain_seed(a.seed));
  std::cout << "n       q     p    bits  EI1      EII1     EII2       total      analytic\n";
  bool ok = true;
  for (const auto& r : rows) {
    std::cout << std::setw(6) << r.point.n << "  " << std::setw(4) << r.point.q << "  "
              << std::setw(3) << r.point.p << "  " << std::setw(4) << r.bits << "  "
              << std::setw(7) << r.ei1 << "  " << std::setw(7) << r.eii1 << "  " << std::setw(9)
              << r.eii2 << "  " << std::setw(9) << r.total() << "  "
              << (r.matches() ? "match" : "MISMATCH") << "  "
              << (r.total() < kOneMegabyte ? "<1 MB" : ">=1 MB") << "\n";
    ok = ok && r.matches();
  }
  if (!a.csv.empty()) {
    auto os = open_csv(a.csv);
    mp::write_comm_csv(os, rows);
  }
  return ok ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Matrix-masking private prediction: keys, sessions, probes and benchmarks"};
  app.require_subcommand(1);

  KeygenArgs keygen;
  auto* kg = app.add_subcommand("keygen", "generate a shared mask key B0");
  keygen.flags.attach(kg);
  kg->add_option("--sigma", keygen.sigma, "entry scale (default 0.5/sqrt(block dim))");
  kg->add_flag("--shared-block", keygen.shared_block, "reuse one block for every slot");
  kg->add_option("--out", keygen.out, "key file")->required();

  SynthArgs synth;
  auto* sy = app.add_subcommand("synth", "write a synthetic signal database");
  synth.flags.attach(sy);
  sy->add_option("--out", synth.out, "database file")->required();

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "fit a projection and train a model");
  train.flags.attach(tr);
  tr->add_option("--data", train.data, "database file (default: synthetic)");
  tr->add_option("--out", train.out, "model file");

  DemoArgs demo;
  auto* de = app.add_subcommand("demo", "run end-to-end sessions against a synthetic server");
  demo.flags.attach(de);
  de->add_option("--key", demo.key_path, "key file (default: generate from the seed)");
  de->add_option("--sessions", demo.sessions, "number of client sessions");
  de->add_option("--csv", demo.csv, "per-session CSV report");

  auto* audit = app.add_subcommand("audit", "privacy and precision probes");
  audit->require_subcommand(1);
  LdpArgs ldp;
  auto* al = audit->add_subcommand("ldp", "interval-probability ratio under Gaussian masks");
  al->add_option("--sigmas", ldp.sigmas, "sigma grid")->delimiter(',');
  al->add_option("--r1", ldp.r1, "norm of the first input");
  al->add_option("--r2", ldp.r2, "norm of the second input");
  al->add_option("--t", ldp.t, "interval half-width");
  al->add_option("--samples", ldp.samples, "Monte Carlo draws per sigma");
  al->add_option("--dim", ldp.dim, "input dimension");
  al->add_option("--seed", ldp.seed, "seed (default: MASKPREDICT_SEED)");
  al->add_option("--csv", ldp.csv, "CSV output");
  DiffArgs diff;
  auto* ad = audit->add_subcommand("diff", "differential-attack span membership");
  ad->add_option("--q", diff.q, "signal dimension");
  ad->add_option("--block-size", diff.block_size, "key block size (0 = dense)");
  ad->add_option("--trials", diff.trials, "share pairs");
  ad->add_option("--seed", diff.seed, "seed (default: MASKPREDICT_SEED)");
  ad->add_option("--csv", diff.csv, "CSV output");
  PrecisionArgs prec;
  auto* ap = audit->add_subcommand("precision", "quantization error against bit width");
  ap->add_option("--p", prec.rows, "rows of the database");
  ap->add_option("--n", prec.cols, "records");
  ap->add_option("--bits", prec.bits, "bit widths")->delimiter(',');
  ap->add_option("--seed", prec.seed, "seed (default: MASKPREDICT_SEED)");
  ap->add_option("--csv", prec.csv, "CSV output");

  auto* bench = app.add_subcommand("bench", "computation and communication cost");
  bench->require_subcommand(1);
  ComputeArgs compute;
  auto* bc = bench->add_subcommand("compute", "per-step wall time, median of runs");
  bc->add_option("--n", compute.n, "records (comma list for a sweep)")->delimiter(',');
  bc->add_option("--q", compute.q, "signal dimension");
  bc->add_option("--p", compute.p, "projected dimension");
  bc->add_option("--block-size", compute.block_size, "key block size (default 100 if it divides q)");
  bc->add_option("--runs", compute.runs, "timed runs");
  bc->add_option("--warmup", compute.warmup, "warm-up runs");
  bc->add_option("--seed", compute.seed, "seed (default: MASKPREDICT_SEED)");
  bc->add_option("--csv", compute.csv, "CSV output");
  CommArgs comm;
  auto* bm = bench->add_subcommand("comm", "encoded message sizes");
  bm->add_option("--n", comm.n, "records (comma list)")->delimiter(',');
  bm->add_option("--q", comm.q, "signal dimension");
  bm->add_option("--p", comm.p, "projected dimension");
  bm->add_option("--bits", comm.bits, "bit widths (comma list)")->delimiter(',');
  bm->add_option("--seed", comm.seed, "seed (default: MASKPREDICT_SEED)");
  bm->add_option("--csv", comm.csv, "CSV output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (kg->parsed()) return run_keygen(keygen);
    if (sy->parsed()) return run_synth(synth);
    if (tr->parsed()) return run_train(train);
    if (de->parsed()) return run_demo(demo);
    if (al->parsed()) return run_audit_ldp(ldp);
    if (ad->parsed()) return run_audit_diff(diff);
    if (ap->parsed()) return run_audit_precision(prec);
    if (bc->parsed()) return run_bench_compute(compute);
    if (bm->parsed()) return run_bench_comm(comm);
  } catch (const mp::SessionError& e) {
    std::cerr << "error in step " << e.step() << ": " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const mp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    if (e.kind() == mp::ErrorKind::kInvalidArgument) std::cerr << "run with --help for usage\n";
    return exit_code(e.kind());
  } catch (const std::bad_alloc&) {
    std::cerr << "error: out of memory\n";
    return kExitNumerical;
  }
  return kExitUsage;
}
