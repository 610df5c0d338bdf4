#include "scss/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>

#include "scss/bench.hpp"
#include "scss/bounds.hpp"
#include "scss/config.hpp"
#include "scss/covariance.hpp"
#include "scss/mixture.hpp"

namespace scss {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Provenance = std::vector<std::pair<std::string, std::string>>;

/// Reads settings from the merged config and remembers every resolved value,
/// so the output header records the full effective configuration.
class Resolver {
  void record(const std::string& key, const std::string& value) {
    known_.insert(key);
    used_.emplace_back(key, value);
  }
  template <class Fn>
  auto guarded_silent(const std::string& key, Fn fn) {
    try {
      return fn();
    } catch (const std::invalid_argument& e) {
      throw UsageError("bad value for '" + key + "': " + e.what());
    }
  }
  template <class Fn, class Fmt>
  auto guarded(const std::string& key, Fn fn, Fmt fmt) {
    auto v = guarded_silent(key, fn);
    record(key, fmt(v));
    return v;
  }

 public:
  explicit Resolver(Config cfg) : cfg_(std::move(cfg)) {}

  std::string str(const std::string& key, const std::string& fallback) {
    const std::string v = cfg_.get(key, fallback);
    record(key, v);
    return v;
  }
  std::optional<std::string> optional_str(const std::string& key) {
    if (!cfg_.has(key)) {
      known_.insert(key);
      return std::nullopt;
    }
    return str(key, "");
  }
  double number(const std::string& key, double fallback) {
    return guarded(key, [&] { return cfg_.get_double(key, fallback); }, format_number);
  }
  long long integer(const std::string& key, long long fallback) {
    return guarded(key, [&] { return cfg_.get_int(key, fallback); },
                   [](long long v) { return std::to_string(v); });
  }
  std::vector<double> grid(const std::string& key, const std::string& fallback) {
    return guarded(key, [&] { return parse_grid(cfg_.get(key, fallback)); },
                   [](const std::vector<double>& v) {
                     std::string s;
                     for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_number(v[i]);
                     return s;
                   });
  }
  std::vector<int> int_grid(const std::string& key, const std::string& fallback) {
    const std::vector<double> g = grid(key, fallback);
    std::vector<int> out;
    for (double v : g) {
      if (v != static_cast<double>(static_cast<int>(v))) {
        throw UsageError("'" + key + "' must hold integers");
      }
      out.push_back(static_cast<int>(v));
    }
    return out;
  }
  std::vector<std::string> list(const std::string& key, const std::string& fallback) {
    std::vector<std::string> out;
    for (const auto& item : Config::parse(key + "=" + cfg_.get(key, fallback)).get_list(key, {})) {
      out.push_back(item);
    }
    std::string joined;
    for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? "," : "") + out[i];
    record(key, joined);
    return out;
  }
  /// Output location; like the worker count it is kept out of the provenance
  /// so that outputs compare equal wherever they are written.
  std::string output_path() {
    known_.insert("out");
    return cfg_.get("out", "");
  }
  int workers() {
    known_.insert("workers");
    const long long w = guarded_silent("workers", [&] { return cfg_.get_int("workers", 1); });
    if (w < 0) throw UsageError("workers must be >= 0");
    return static_cast<int>(w);
  }

  /// Rejects config keys that no setting consumed.
  void check_unused() const {
    for (const auto& [key, value] : cfg_.items()) {
      if (!known_.count(key)) throw UsageError("unknown setting '" + key + "'");
    }
  }
  const Provenance& provenance() const { return used_; }

 private:
  Config cfg_;
  Provenance used_;
  std::set<std::string> known_;
};

struct Command {
  CLI::App* app = nullptr;
  std::string config_path;
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  std::function<int(Resolver&, std::ostream&)> run;
};

void add_setting(Command& c, const std::string& key, const std::string& help) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  CLI::Option* o = c.app->add_option(flag, c.values[key], help);
  o->allow_extra_args(false);
  c.options.emplace_back(key, o);
}

Config merged_config(const Command& c) {
  Config cfg;
  if (!c.config_path.empty()) {
    try {
      cfg = Config::load(c.config_path);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  for (const auto& [key, opt] : c.options) {
    if (opt->count() > 0) cfg.set(key, c.values.at(key));
  }
  return cfg;
}

Alphabet alphabet_setting(Resolver& r, const std::string& key, const std::string& fallback) {
  const std::string name = r.str(key, fallback);
  try {
    return alphabet_from_string(name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

std::vector<Method> method_setting(Resolver& r, const std::string& fallback) {
  std::vector<Method> out;
  for (const auto& name : r.list("methods", fallback)) {
    try {
      out.push_back(method_from_string(name));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return out;
}

std::uint64_t seed_setting(Resolver& r) {
  const long long s = r.integer("seed", 1);
  if (s < 0) throw UsageError("seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

/// Opens `path` for binary writing, or returns nullptr for stdout ("" or "-").
std::unique_ptr<std::ofstream> open_output(const std::string& path) {
  if (path.empty() || path == "-") return nullptr;
  auto f = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*f) throw std::runtime_error("cannot open output file: " + path);
  return f;
}

void emit_csv(SweepResult result, const Provenance& resolved, const std::string& path,
              std::ostream& out) {
  // The resolved settings replace the library's summary of the same run.
  result.provenance.erase(
      std::remove_if(result.provenance.begin(), result.provenance.end(),
                     [](const auto& kv) { return kv.first != "command"; }),
      result.provenance.end());
  for (const auto& kv : resolved) result.provenance.push_back(kv);
  auto file = open_output(path);
  std::ostream& os = file ? *file : out;
  write_csv(result, os);
  if (file && !file->good()) throw std::runtime_error("write failed: " + path);
}

SweepConfig sweep_settings(Resolver& r, const std::string& sir, const std::string& snr,
                           const std::string& n, std::int64_t trials, const std::string& soi,
                           const std::string& interference, const std::string& methods) {
  SweepConfig c;
  c.seed = seed_setting(r);
  c.sir_db = r.grid("sir", sir);
  c.snr_db = r.grid("snr", snr);
  c.n_values = r.int_grid("n", n);
  c.trials = r.integer("trials", trials);
  c.methods = methods.empty() ? std::vector<Method>{} : method_setting(r, methods);
  c.qpsk.alphabet = alphabet_setting(r, "soi_alphabet", soi);
  c.ofdm.alphabet = alphabet_setting(r, "interference_alphabet", interference);
  c.epsilon_scale = r.number("epsilon_scale", kDefaultEpsilonScale);
  c.workers = r.workers();
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return c;
}

int cmd_gen(Resolver& r, std::ostream&) {
  const std::string path = r.output_path();
  if (path.empty() || path == "-") throw UsageError("gen: --out is required");
  MixtureParams p;
  p.n_samples = r.integer("n", 640);
  p.sir_db = r.number("sir", 0.0);
  p.snr_db = r.number("snr", 20.0);
  const std::string ks = r.str("k_s_mode", "fixed-zero");
  if (ks == "fixed-zero") {
    p.k_s_mode = ShiftMode::FixedZero;
  } else if (ks == "uniform") {
    p.k_s_mode = ShiftMode::Uniform;
  } else {
    throw UsageError("k_s_mode must be fixed-zero or uniform");
  }
  if (const auto kb = r.optional_str("k_b"); kb && *kb != "uniform") {
    p.k_b_mode = ShiftMode::Fixed;
    try {
      p.k_b_fixed = std::stoi(*kb);
    } catch (const std::exception&) {
      throw UsageError("k_b must be 'uniform' or a shift index");
    }
  }
  QpskSpec qpsk;
  OfdmSpec ofdm;
  qpsk.alphabet = alphabet_setting(r, "soi_alphabet", "qpsk");
  ofdm.alphabet = alphabet_setting(r, "interference_alphabet", "qam16");
  p.K_s = qpsk.period();
  p.K_b = ofdm.period();
  const long long count = r.integer("count", 1000);
  std::uint32_t flags = 0;
  for (const auto& item : r.list("store", "components,bits")) {
    if (item == "components") {
      flags |= kFlagComponents;
    } else if (item == "bits") {
      flags |= kFlagBits;
    } else if (item != "none") {
      throw UsageError("store accepts components, bits or none");
    }
  }
  const std::uint64_t seed = seed_setting(r);
  const int workers = r.workers();
  r.check_unused();
  if (count < 1) throw UsageError("count must be >= 1");
  const Dataset d = gen_dataset(qpsk, ofdm, p, count, seed, workers);
  write_dataset(d, path, flags);
  return 0;
}

int cmd_cov(Resolver& r, std::ostream&) {
  const std::string path = r.output_path();
  if (path.empty() || path == "-") throw UsageError("cov: --out is required");
  const int L = static_cast<int>(r.integer("n", 320));
  const double eps = r.number("epsilon_scale", kDefaultEpsilonScale);
  const auto dataset = r.optional_str("dataset");
  const int workers = r.workers();
  // Accepted like everywhere else; no step here draws random numbers.
  r.integer("seed", 1);
  CovBank bank;
  if (dataset) {
    const Dataset d = read_dataset(*dataset);
    const double sir = r.number("sir", d.header.sir_db);
    const double snr = r.number("snr", d.header.snr_db);
    r.check_unused();
    bank = estimate_bank(d, L, sir, snr, eps, workers);
  } else {
    const double sir = r.number("sir", 0.0);
    const double snr = r.number("snr", 20.0);
    r.check_unused();
    bank = build_analytic_bank(QpskSpec{}, OfdmSpec{}, L, sir, snr, eps, workers);
  }
  write_bank(bank, path);
  return 0;
}

int cmd_sweep_mse(Resolver& r, std::ostream& out) {
  const SweepConfig c = sweep_settings(r, "-18,-12,-6,0", "20", "320", 1000, "gaussian", "gaussian",
                                       "lmmse,map-qlmmse,psi-qlmmse,mmse");
  const std::string path = r.output_path();
  r.check_unused();
  emit_csv(run_mse_sweep(c), r.provenance(), path, out);
  return 0;
}

int cmd_sweep_ber(Resolver& r, std::ostream& out) {
  SweepConfig c = sweep_settings(r, "-12:0:2", "inf", "10240", 1, "qpsk", "qam16",
                                 "mf,lmmse,map-qlmmse");
  c.block_len = static_cast<int>(r.integer("block_len", 320));
  c.sync_window = static_cast<int>(r.integer("sync_window", 640));
  c.min_bits = r.integer("min_bits", 200000);
  const std::string path = r.output_path();
  r.check_unused();
  emit_csv(run_ber_sweep(c), r.provenance(), path, out);
  return 0;
}

int cmd_theorem1(Resolver& r, std::ostream& out) {
  const SweepConfig c =
      sweep_settings(r, "0", "20", "40,80,160,320", 2000, "gaussian", "gaussian", "");
  const std::string path = r.output_path();
  r.check_unused();
  emit_csv(run_theorem1_check(c), r.provenance(), path, out);
  return 0;
}

int cmd_sync_eval(Resolver& r, std::ostream& out) {
  const auto dataset = r.optional_str("dataset");
  if (!dataset) throw UsageError("sync-eval: --dataset is required");
  const auto predictions = r.optional_str("predictions");
  SyncEvalConfig c;
  c.methods.clear();
  for (const auto& name : r.list("methods", "map,psi")) {
    if (name == "map" || name == "map-qlmmse") {
      c.methods.push_back(Method::MapQlmmse);
    } else if (name == "psi" || name == "psi-qlmmse") {
      c.methods.push_back(Method::PsiQlmmse);
    } else if (name != "none") {
      throw UsageError("sync-eval methods are map, psi or none");
    }
  }
  if (const auto n = r.optional_str("n")) {
    for (double v : parse_grid(*n)) c.n_values.push_back(static_cast<int>(v));
  }
  c.epsilon_scale = r.number("epsilon_scale", kDefaultEpsilonScale);
  c.workers = r.workers();
  const std::string path = r.output_path();
  r.check_unused();
  const Dataset d = read_dataset(*dataset);
  std::optional<PredictionSet> p;
  if (predictions) p = read_predictions(*predictions);
  emit_csv(run_sync_eval(c, d, p ? &*p : nullptr), r.provenance(), path, out);
  return 0;
}

int cmd_bounds_check(Resolver& r, std::ostream& out) {
  DecayConfig c;
  c.seed = seed_setting(r);
  c.n_values = r.int_grid("n", "80,160,320,640");
  c.trials = r.integer("trials", 10000);
  c.sir_db = r.number("sir", 0.0);
  c.snr_db = r.number("snr", 20.0);
  c.eps = r.number("eps", 0.1);
  c.qpsk.alphabet = alphabet_setting(r, "soi_alphabet", "gaussian");
  c.ofdm.alphabet = alphabet_setting(r, "interference_alphabet", "gaussian");
  const double eps_scale = r.number("epsilon_scale", kDefaultEpsilonScale);
  c.workers = r.workers();
  const std::string path = r.output_path();
  r.check_unused();
  if (c.trials < 1) throw UsageError("trials must be >= 1");
  if (!(c.eps > 0.0 && c.eps < 0.5)) throw UsageError("eps must lie in (0, 0.5)");
  const DecayCurve curve = sync_decay_experiment(
      [&](int n) {
        return build_analytic_bank(c.qpsk, c.ofdm, n, c.sir_db, c.snr_db, eps_scale, c.workers);
      },
      c);
  auto file = open_output(path);
  std::ostream& os = file ? *file : out;
  os << "# command=bounds-check\n";
  for (const auto& [key, value] : r.provenance()) os << "# " << key << '=' << value << '\n';
  os << "n,err_prob,conf_lo,conf_hi,log10_b1_star,log10_b2_star,psi_err_prob,psi_conf_lo,"
        "psi_conf_hi\n";
  for (std::size_t i = 0; i < curve.n_values.size(); ++i) {
    os << curve.n_values[i] << ',' << format_number(curve.err_prob[i]) << ','
       << format_number(curve.conf_lo[i]) << ',' << format_number(curve.conf_hi[i]) << ','
       << format_number(curve.log10_b1_star[i]) << ',' << format_number(curve.log10_b2_star[i])
       << ',' << format_number(curve.psi_err_prob[i]) << ',' << format_number(curve.psi_conf_lo[i])
       << ',' << format_number(curve.psi_conf_hi[i]) << '\n';
  }
  if (file && !file->good()) throw std::runtime_error("write failed: " + path);
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Single-channel source separation of cyclostationary signals"};
  app.name("scss");
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::vector<std::unique_ptr<Command>> commands;
  auto make = [&](const std::string& name, const std::string& help,
                  std::vector<std::pair<std::string, std::string>> settings,
                  std::function<int(Resolver&, std::ostream&)> run) {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    c->app->add_option("--config", c->config_path, "Flat key=value settings file");
    settings.emplace_back("seed", "Master seed");
    settings.emplace_back("workers", "Worker threads (0 = all cores); never affects output");
    settings.emplace_back("out", "Output path");
    for (const auto& [key, h] : settings) add_setting(*c, key, h);
    c->run = std::move(run);
    commands.push_back(std::move(c));
  };
  const std::vector<std::pair<std::string, std::string>> sweep_keys{
      {"sir", "SIR grid in dB, e.g. -10:-2:2,inf"},
      {"snr", "SNR grid in dB"},
      {"n", "Window lengths"},
      {"methods", "Comma list of mf, lmmse, mmse, map-qlmmse, psi-qlmmse"},
      {"trials", "Trials per grid point"},
      {"soi_alphabet", "qpsk, qam16 or gaussian"},
      {"interference_alphabet", "qpsk, qam16 or gaussian"},
      {"epsilon_scale", "Covariance regularization scale"}};

  make("gen", "Generate a labelled mixture dataset",
       {{"n", "Samples per record"},
        {"count", "Number of records"},
        {"sir", "SIR in dB"},
        {"snr", "SNR in dB (inf for noiseless)"},
        {"k_s_mode", "fixed-zero or uniform"},
        {"k_b", "uniform or a fixed shift index"},
        {"store", "Payloads to store: components, bits, none"},
        {"soi_alphabet", "qpsk, qam16 or gaussian"},
        {"interference_alphabet", "qpsk, qam16 or gaussian"}},
       cmd_gen);
  make("cov", "Build a covariance bank cache (SCOV)",
       {{"n", "Block length L"},
        {"sir", "SIR in dB"},
        {"snr", "SNR in dB"},
        {"dataset", "Estimate from this dataset instead of the waveform models"},
        {"epsilon_scale", "Covariance regularization scale"}},
       cmd_cov);
  make("sweep-mse", "MSE of the estimator family over a SIR/SNR/N grid", sweep_keys, cmd_sweep_mse);
  auto ber_keys = sweep_keys;
  ber_keys.emplace_back("block_len", "Separation block length");
  ber_keys.emplace_back("sync_window", "Synchronization window");
  ber_keys.emplace_back("min_bits", "Minimum reference bits per grid point");
  make("sweep-ber", "BER of the demodulation chain over a SIR/SNR grid", ber_keys, cmd_sweep_ber);
  make("theorem1", "MMSE versus MAP-QLMMSE ratio and regret over N", sweep_keys, cmd_theorem1);
  make("sync-eval", "Score synchronizers against dataset labels",
       {{"dataset", "Labelled dataset"},
        {"predictions", "Prediction file from an external synchronizer"},
        {"methods", "map, psi or none"},
        {"n", "Window lengths (default: full records)"},
        {"epsilon_scale", "Covariance regularization scale"}},
       cmd_sync_eval);
  make("bounds-check", "Synchronization error decay and Chernoff bounds",
       {{"n", "Window lengths"},
        {"trials", "Trials per window length"},
        {"sir", "SIR in dB"},
        {"snr", "SNR in dB"},
        {"eps", "Threshold exponent a = N^-(0.5 - eps)"},
        {"soi_alphabet", "qpsk, qam16 or gaussian"},
        {"interference_alphabet", "qpsk, qam16 or gaussian"},
        {"epsilon_scale", "Covariance regularization scale"}},
       cmd_bounds_check);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  for (const auto& c : commands) {
    if (!c->app->parsed()) continue;
    try {
      Resolver resolver(merged_config(*c));
      return c->run(resolver, out);
    } catch (const UsageError& e) {
      err << "error: " << e.what() << "\n\n" << c->app->help();
      return 2;
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}

}  // namespace scss
