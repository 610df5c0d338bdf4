#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "scss/bench.hpp"
#include "scss/config.hpp"
#include "scss/covariance.hpp"
#include "scss/demod.hpp"
#include "scss/parallel.hpp"

namespace scss {
namespace {

constexpr int kChunk = 64;

struct MeanErr {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanErr mean_err(const std::vector<double>& x) {
  const auto n = static_cast<double>(x.size());
  if (x.empty()) return {};
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / n;
  if (x.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b, double ma, double mb) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / (static_cast<double>(a.size()) - 1.0);
}

std::string join_grid(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_number(v[i]);
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

std::string join_methods(const std::vector<Method>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += std::string(i ? "," : "") + to_string(v[i]);
  return out;
}

void base_provenance(SweepResult& r, const std::string& command, const SweepConfig& c,
                     const std::vector<Method>& methods) {
  r.provenance = {{"command", command},
                  {"seed", std::to_string(c.seed)},
                  {"sir_db", join_grid(c.sir_db)},
                  {"snr_db", join_grid(c.snr_db)},
                  {"n", join_ints(c.n_values)},
                  {"methods", join_methods(methods)},
                  {"trials", std::to_string(c.trials)},
                  {"soi_alphabet", to_string(c.qpsk.alphabet)},
                  {"interference_alphabet", to_string(c.ofdm.alphabet)},
                  {"epsilon_scale", format_number(c.epsilon_scale)}};
}

void check_methods(const std::vector<Method>& methods, const std::vector<Method>& allowed,
                   const char* what) {
  for (Method m : methods) {
    if (std::find(allowed.begin(), allowed.end(), m) == allowed.end()) {
      throw std::invalid_argument(std::string(what) + ": unsupported method " + to_string(m));
    }
  }
}

double sq_err(const CMatrix& est, const CMatrix& ref, int col) {
  return (est.col(col) - ref.col(col)).squaredNorm() / static_cast<double>(ref.rows());
}

int circular_distance(int a, int b, int period) {
  const int d = std::abs(a - b) % period;
  return std::min(d, period - d);
}

}  // namespace

void SweepConfig::validate() const {
  if (sir_db.empty() || snr_db.empty() || n_values.empty()) {
    throw std::invalid_argument("sweep: empty grid");
  }
  if (trials < 1) throw std::invalid_argument("sweep: trials must be >= 1");
  for (int n : n_values) {
    if (n < 1) throw std::invalid_argument("sweep: window lengths must be positive");
  }
  for (double v : sir_db) {
    if (std::isnan(v) || v == -kInf) throw std::invalid_argument("sweep: bad SIR value");
  }
  for (double v : snr_db) {
    if (std::isnan(v) || v == -kInf) throw std::invalid_argument("sweep: bad SNR value");
  }
  if (block_len < 1 || sync_window < 0) throw std::invalid_argument("sweep: bad block length");
  if (min_bits < 0) throw std::invalid_argument("sweep: min_bits must be >= 0");
}

const SweepRow* SweepResult::find(double sir_db, const std::string& method,
                                  const std::string& metric, std::optional<int> n) const {
  for (const auto& row : rows) {
    if (row.sir_db == sir_db && row.method == method && row.metric == metric &&
        (!n || row.n == *n)) {
      return &row;
    }
  }
  return nullptr;
}

SweepResult run_mse_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<Method> methods =
      config.methods.empty()
          ? std::vector<Method>{Method::LMMSE, Method::MapQlmmse, Method::PsiQlmmse, Method::MMSE}
          : config.methods;
  SweepResult result;
  base_provenance(result, "sweep-mse", config, methods);
  const PulseShape pulse =
      rrc_taps(config.qpsk.rolloff, config.qpsk.span_symbols, config.qpsk.oversampling);
  const auto T = static_cast<std::size_t>(config.trials);
  const auto chunks = (T + kChunk - 1) / kChunk;

  for (double snr : config.snr_db) {
    for (double sir : config.sir_db) {
      for (int n : config.n_values) {
        const CovBank bank = build_analytic_bank(config.qpsk, config.ofdm, n, sir, snr,
                                                 config.epsilon_scale, config.workers);
        std::vector<std::vector<double>> err(methods.size(), std::vector<double>(T));
        std::vector<double> map_miss(T);
        std::vector<double> psi_miss(T);
        parallel_for(chunks, config.workers, [&](std::size_t c) {
          const auto first = static_cast<std::int64_t>(c * kChunk);
          const int count = static_cast<int>(std::min<std::size_t>(kChunk, T - c * kChunk));
          const MixtureBatch batch = draw_mixture_batch(config.qpsk, pulse, config.ofdm, n, sir, snr,
                                                        first, count, config.seed,
                                                        static_cast<std::uint64_t>(n));
          const BatchEstimates est = estimate_batch(bank, batch.y);
          for (int j = 0; j < count; ++j) {
            const auto t = static_cast<std::size_t>(first + j);
            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
              const CMatrix* e = nullptr;
              switch (methods[mi]) {
                case Method::MFOnly: e = &batch.y; break;
                case Method::LMMSE: e = &est.lmmse; break;
                case Method::MMSE: e = &est.mmse; break;
                case Method::MapQlmmse: e = &est.map_qlmmse; break;
                case Method::PsiQlmmse: e = &est.psi_qlmmse; break;
              }
              err[mi][t] = sq_err(*e, batch.s, j);
            }
            const int truth = batch.k_b[static_cast<std::size_t>(j)];
            map_miss[t] = est.map_shift[static_cast<std::size_t>(j)] != truth;
            psi_miss[t] = est.psi_shift[static_cast<std::size_t>(j)] != truth;
          }
        });
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          const MeanErr me = mean_err(err[mi]);
          result.rows.push_back({sir, snr, n, to_string(methods[mi]), "mse", me.mean, me.std_err,
                                 config.trials});
          if (methods[mi] == Method::MapQlmmse || methods[mi] == Method::PsiQlmmse) {
            const MeanErr se = mean_err(methods[mi] == Method::MapQlmmse ? map_miss : psi_miss);
            result.rows.push_back({sir, snr, n, to_string(methods[mi]), "sync_error", se.mean,
                                   se.std_err, config.trials});
          }
        }
      }
    }
  }
  return result;
}

SweepResult run_ber_sweep(const SweepConfig& config) {
  config.validate();
  const std::vector<Method> methods =
      config.methods.empty() ? std::vector<Method>{Method::MFOnly, Method::LMMSE, Method::MapQlmmse}
                             : config.methods;
  const std::int64_t N = config.n_values.front();
  if (config.sync_window > N) throw std::invalid_argument("sweep-ber: sync window exceeds N");
  if (config.qpsk.alphabet == Alphabet::GaussianIID) {
    throw std::invalid_argument("sweep-ber: the SOI alphabet must be discrete");
  }
  const PulseShape pulse =
      rrc_taps(config.qpsk.rolloff, config.qpsk.span_symbols, config.qpsk.oversampling);
  const std::int64_t bits_per_record =
      soi_timing(pulse, N, 0).num_symbols * bits_per_symbol(config.qpsk.alphabet);
  if (bits_per_record < 1) throw std::invalid_argument("sweep-ber: N too short for any symbol");
  const std::int64_t records =
      std::max(config.trials, (config.min_bits + bits_per_record - 1) / bits_per_record);

  SweepResult result;
  base_provenance(result, "sweep-ber", config, methods);
  result.provenance.emplace_back("block_len", std::to_string(config.block_len));
  result.provenance.emplace_back("sync_window", std::to_string(config.sync_window));
  result.provenance.emplace_back("records_per_point", std::to_string(records));

  const auto R = static_cast<std::size_t>(records);
  for (double snr : config.snr_db) {
    for (double sir : config.sir_db) {
      const CovBank bank = build_analytic_bank(config.qpsk, config.ofdm, config.block_len, sir,
                                               snr, config.epsilon_scale, config.workers);
      MixtureParams params;
      params.n_samples = N;
      params.sir_db = sir;
      params.snr_db = snr;
      params.K_s = config.qpsk.period();
      params.K_b = config.ofdm.period();
      std::vector<std::vector<double>> ber_rec(methods.size(), std::vector<double>(R));
      std::vector<std::vector<double>> miss(methods.size(), std::vector<double>(R, 0.0));
      parallel_for(R, config.workers, [&](std::size_t r) {
        Rng rng = make_rng(config.seed, r, static_cast<std::uint64_t>(N));
        const MixtureRecord rec = gen_record(config.qpsk, pulse, config.ofdm, params, rng);
        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
          LongOptions opt;
          opt.method = methods[mi];
          opt.sync_window = config.sync_window;
          const SeparationResult sep = separate_long(rec.y, bank, opt);
          const DemodResult d = demodulate(sep.s_hat, pulse, config.qpsk.alphabet);
          ber_rec[mi][r] = ber(d.bits, rec.bits);
          if (sep.k_b_hat) miss[mi][r] = *sep.k_b_hat != rec.k_b;
        }
      });
      for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        const MeanErr me = mean_err(ber_rec[mi]);
        result.rows.push_back({sir, snr, static_cast<int>(N), to_string(methods[mi]), "ber",
                               me.mean, me.std_err, records});
        if (methods[mi] != Method::MFOnly && methods[mi] != Method::LMMSE) {
          const MeanErr se = mean_err(miss[mi]);
          result.rows.push_back({sir, snr, static_cast<int>(N), to_string(methods[mi]),
                                 "sync_error", se.mean, se.std_err, records});
        }
      }
    }
  }
  return result;
}

SweepResult run_theorem1_check(const SweepConfig& config) {
  config.validate();
  if (!std::is_sorted(config.n_values.begin(), config.n_values.end())) {
    throw std::invalid_argument("theorem1: N list must be ascending");
  }
  SweepResult result;
  base_provenance(result, "theorem1", config, {Method::MMSE, Method::MapQlmmse});
  const PulseShape pulse =
      rrc_taps(config.qpsk.rolloff, config.qpsk.span_symbols, config.qpsk.oversampling);
  const auto T = static_cast<std::size_t>(config.trials);
  const auto chunks = (T + kChunk - 1) / kChunk;

  for (double snr : config.snr_db) {
    for (double sir : config.sir_db) {
      for (int n : config.n_values) {
        const CovBank bank = build_analytic_bank(config.qpsk, config.ofdm, n, sir, snr,
                                                 config.epsilon_scale, config.workers);
        std::vector<double> e_mmse(T), e_q(T), regret(T), resid(T);
        parallel_for(chunks, config.workers, [&](std::size_t c) {
          const auto first = static_cast<std::int64_t>(c * kChunk);
          const int count = static_cast<int>(std::min<std::size_t>(kChunk, T - c * kChunk));
          const MixtureBatch batch = draw_mixture_batch(config.qpsk, pulse, config.ofdm, n, sir, snr,
                                                        first, count, config.seed,
                                                        static_cast<std::uint64_t>(n));
          const BatchEstimates est = estimate_batch(bank, batch.y);
          for (int j = 0; j < count; ++j) {
            const auto t = static_cast<std::size_t>(first + j);
            e_mmse[t] = sq_err(est.mmse, batch.s, j);
            e_q[t] = sq_err(est.map_qlmmse, batch.s, j);
            regret[t] = sq_err(est.mmse, est.map_qlmmse, j);
            resid[t] = e_q[t] - e_mmse[t] - regret[t];
          }
        });
        const MeanErr a = mean_err(e_mmse);
        const MeanErr b = mean_err(e_q);
        const double ratio = a.mean / b.mean;
        double ratio_err = 0.0;
        if (T > 1) {
          const double va = sample_cov(e_mmse, e_mmse, a.mean, a.mean);
          const double vb = sample_cov(e_q, e_q, b.mean, b.mean);
          const double cab = sample_cov(e_mmse, e_q, a.mean, b.mean);
          const double var = (va - 2.0 * ratio * cab + ratio * ratio * vb) / (b.mean * b.mean);
          ratio_err = std::sqrt(std::max(0.0, var) / static_cast<double>(T));
        }
        const MeanErr rg = mean_err(regret);
        const MeanErr rs = mean_err(resid);
        result.rows.push_back({sir, snr, n, "mmse", "mse", a.mean, a.std_err, config.trials});
        result.rows.push_back({sir, snr, n, "map-qlmmse", "mse", b.mean, b.std_err, config.trials});
        result.rows.push_back({sir, snr, n, "theorem1", "ratio", ratio, ratio_err, config.trials});
        result.rows.push_back({sir, snr, n, "theorem1", "regret", rg.mean, rg.std_err, config.trials});
        result.rows.push_back(
            {sir, snr, n, "theorem1", "identity_residual", rs.mean, rs.std_err, config.trials});
      }
    }
  }
  return result;
}

SweepResult run_sync_eval(const SyncEvalConfig& config, const Dataset& data,
                          const PredictionSet* predictions) {
  const DatasetHeader& h = data.header;
  const std::size_t count = data.records.size();
  if (count == 0) throw std::invalid_argument("sync-eval: dataset has no records");
  SweepResult result;
  result.provenance = {{"command", "sync-eval"},
                       {"records", std::to_string(count)},
                       {"n", join_ints(config.n_values)},
                       {"methods", join_methods(config.methods)},
                       {"external", predictions ? "yes" : "no"}};
  auto add_shift_rows = [&](int n, const std::string& name, const std::vector<int>& k_hat) {
    std::vector<double> hit(count), miss(count), offset(count);
    for (std::size_t i = 0; i < count; ++i) {
      const int truth = data.records[i].k_b;
      hit[i] = k_hat[i] == truth;
      miss[i] = 1.0 - hit[i];
      offset[i] = circular_distance(k_hat[i], truth, h.k_b_period);
    }
    const auto tr = static_cast<std::int64_t>(count);
    const MeanErr a = mean_err(hit);
    const MeanErr e = mean_err(miss);
    const MeanErr o = mean_err(offset);
    result.rows.push_back({h.sir_db, h.snr_db, n, name, "accuracy", a.mean, a.std_err, tr});
    result.rows.push_back({h.sir_db, h.snr_db, n, name, "error_rate", e.mean, e.std_err, tr});
    result.rows.push_back({h.sir_db, h.snr_db, n, name, "mean_abs_offset", o.mean, o.std_err, tr});
  };

  if (!config.methods.empty()) {
    check_methods(config.methods, {Method::MapQlmmse, Method::PsiQlmmse}, "sync-eval");
    const QpskSpec qpsk;
    const OfdmSpec ofdm;
    if (h.k_b_period != ofdm.period() || h.k_s_period != qpsk.period()) {
      throw std::invalid_argument("sync-eval: dataset periods do not match the waveform models");
    }
    for (const auto& rec : data.records) {
      if (rec.k_s != 0) throw std::invalid_argument("sync-eval: internal synchronizers assume k_s = 0");
    }
    std::vector<int> lengths = config.n_values;
    if (lengths.empty()) lengths.push_back(static_cast<int>(h.n));
    for (int n : lengths) {
      if (n < 1 || n > static_cast<int>(h.n)) {
        throw std::invalid_argument("sync-eval: window length outside the record length");
      }
      const CovBank bank = build_analytic_bank(qpsk, ofdm, n, h.sir_db, h.snr_db,
                                               config.epsilon_scale, config.workers);
      std::vector<int> k_map(count), k_psi(count);
      const auto chunks = (count + kChunk - 1) / kChunk;
      parallel_for(chunks, config.workers, [&](std::size_t c) {
        const std::size_t first = c * kChunk;
        const int cols = static_cast<int>(std::min<std::size_t>(kChunk, count - first));
        CMatrix Y(n, cols);
        for (int j = 0; j < cols; ++j) {
          Y.col(j) = as_vector(data.records[first + static_cast<std::size_t>(j)].y.samples).head(n);
        }
        const Eigen::MatrixXd energy = whitened_energies(bank, Y);
        for (int j = 0; j < cols; ++j) {
          RVector ll = -energy.col(j);
          for (int m = 0; m < bank.K_b; ++m) ll[m] -= bank.c_yy[static_cast<std::size_t>(m)].logdet();
          k_map[first + static_cast<std::size_t>(j)] = argmax_lowest(ll);
          k_psi[first + static_cast<std::size_t>(j)] =
              argmin_abs_lowest(energy.col(j).array() / n - 1.0);
        }
      });
      for (Method m : config.methods) {
        add_shift_rows(n, m == Method::MapQlmmse ? "map" : "psi",
                       m == Method::MapQlmmse ? k_map : k_psi);
      }
    }
  }

  if (predictions) {
    const auto& ph = predictions->header;
    if (predictions->predictions.size() != count || ph.count != count) {
      throw std::invalid_argument("sync-eval: prediction count does not match the dataset");
    }
    if (ph.n != h.n || ph.k_b_period != h.k_b_period || ph.k_s_period != h.k_s_period) {
      throw std::invalid_argument("sync-eval: prediction header does not match the dataset");
    }
    const auto& preds = predictions->predictions;
    const auto with_shift = std::count_if(preds.begin(), preds.end(),
                                          [](const Prediction& p) { return p.k_b_hat.has_value(); });
    if (with_shift != 0 && static_cast<std::size_t>(with_shift) != count) {
      throw std::invalid_argument("sync-eval: some predictions lack a shift");
    }
    if (with_shift != 0) {
      std::vector<int> k_hat(count);
      for (std::size_t i = 0; i < count; ++i) k_hat[i] = *preds[i].k_b_hat;
      add_shift_rows(static_cast<int>(h.n), "external", k_hat);
    }
    const bool has_signals = !preds.front().s_hat.empty();
    const bool has_truth = !data.records.front().s.samples.empty();
    if (has_signals && has_truth) {
      std::vector<double> err(count);
      for (std::size_t i = 0; i < count; ++i) {
        const auto& s = data.records[i].s.samples;
        if (preds[i].s_hat.size() != s.size()) {
          throw std::invalid_argument("sync-eval: separated signal length mismatch");
        }
        err[i] = (as_vector(preds[i].s_hat) - as_vector(s)).squaredNorm() /
                 static_cast<double>(s.size());
      }
      const MeanErr me = mean_err(err);
      result.rows.push_back({h.sir_db, h.snr_db, static_cast<int>(h.n), "external", "mse", me.mean,
                             me.std_err, static_cast<std::int64_t>(count)});
    }
  }
  if (result.rows.empty()) throw std::invalid_argument("sync-eval: nothing to score");
  return result;
}

void write_csv(const SweepResult& result, std::ostream& out) {
  for (const auto& [key, value] : result.provenance) out << "# " << key << '=' << value << '\n';
  out << "sir_db,snr_db,n,method,metric,value,stderr,trials\n";
  for (const auto& r : result.rows) {
    out << format_number(r.sir_db) << ',' << format_number(r.snr_db) << ',' << r.n << ','
        << r.method << ',' << r.metric << ',' << format_number(r.value) << ','
        << format_number(r.std_err) << ',' << r.trials << '\n';
  }
}

std::optional<double> sir_at_level(const SweepResult& result, const std::string& method,
                                   const std::string& metric, double target, double floor) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : result.rows) {
    if (r.method == method && r.metric == metric && std::isfinite(r.sir_db)) {
      pts.emplace_back(r.sir_db, std::log10(std::max(r.value, floor)));
    }
  }
  std::sort(pts.begin(), pts.end());
  const double lt = std::log10(target);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double d0 = pts[i].second - lt;
    const double d1 = pts[i + 1].second - lt;
    if (d0 == 0.0) return pts[i].first;
    if (d0 * d1 < 0.0) {
      return pts[i].first + (pts[i + 1].first - pts[i].first) * d0 / (d0 - d1);
    }
  }
  if (!pts.empty() && pts.back().second == lt) return pts.back().first;
  return std::nullopt;
}

}  // namespace scss
