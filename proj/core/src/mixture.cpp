#include "scss/mixture.hpp"

#include <stdexcept>

#include "scss/parallel.hpp"

namespace scss {
namespace {

int draw_shift(ShiftMode mode, int fixed, int period, Rng& rng) {
  switch (mode) {
    case ShiftMode::FixedZero: return 0;
    case ShiftMode::Fixed:
      if (fixed < 0 || fixed >= period) throw std::out_of_range("fixed shift out of range");
      return fixed;
    case ShiftMode::Uniform: return uniform_index(rng, period);
  }
  return 0;
}

}  // namespace

ComplexSignal apply_shift(const ComplexSignal& x, std::int64_t k, std::int64_t n_out) {
  if (k < 0 || n_out < 0) throw std::invalid_argument("apply_shift: negative argument");
  if (static_cast<std::int64_t>(x.size()) < k + n_out) {
    throw std::length_error("apply_shift: signal shorter than shift + window");
  }
  ComplexSignal out;
  out.origin = x.origin;
  out.samples.assign(x.samples.begin() + k, x.samples.begin() + k + n_out);
  return out;
}

ComplexSignal mix(const ComplexSignal& s, const ComplexSignal& b, const ComplexSignal& w,
                  double sir_db, double snr_db) {
  const bool noisy = snr_db != kInf;
  if (s.size() != b.size() || (noisy && w.size() != s.size())) {
    throw std::invalid_argument("mix: component lengths differ");
  }
  const double gb = db_to_amplitude(sir_db);
  const double gw = db_to_amplitude(snr_db);
  ComplexSignal y;
  y.origin = "mixture";
  y.timing = s.timing;
  y.samples.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    y.samples[i] = s.samples[i] + gb * b.samples[i];
    if (noisy) y.samples[i] += gw * w.samples[i];
  }
  return y;
}

ComplexSignal white_noise(std::int64_t n, Rng& rng) {
  ComplexSignal w;
  w.origin = "noise";
  w.samples.resize(static_cast<std::size_t>(n));
  for (auto& v : w.samples) v = complex_normal(rng);
  return w;
}

ComplexSignal interference_window(const OfdmSpec& spec, std::int64_t n, int shift, Rng& rng) {
  const std::int64_t p = spec.symbol_length();
  if (shift < 0 || shift >= p) throw std::out_of_range("interference_window: shift out of range");
  const std::int64_t num = (shift + n + p - 1) / p;
  return apply_shift(gen_ofdm(spec, num, rng), shift, n);
}

MixtureRecord gen_record(const QpskSpec& qpsk, const PulseShape& pulse, const OfdmSpec& ofdm,
                         const MixtureParams& params, Rng& rng, bool keep_noise) {
  MixtureRecord r;
  r.k_s = draw_shift(params.k_s_mode, params.k_s_fixed, params.K_s, rng);
  r.k_b = draw_shift(params.k_b_mode, params.k_b_fixed, params.K_b, rng);
  auto soi = gen_soi_window(qpsk, pulse, params.n_samples, r.k_s, rng);
  r.s = std::move(soi.signal);
  r.bits = std::move(soi.bits);
  r.b = interference_window(ofdm, params.n_samples, r.k_b, rng);
  ComplexSignal w;
  if (params.snr_db != kInf) w = white_noise(params.n_samples, rng);
  r.y = mix(r.s, r.b, w, params.sir_db, params.snr_db);
  if (keep_noise) r.w = std::move(w);
  return r;
}

Dataset gen_dataset(const QpskSpec& qpsk, const OfdmSpec& ofdm, const MixtureParams& params,
                    std::int64_t count, std::uint64_t master_seed, int workers) {
  if (count < 1) throw std::invalid_argument("gen_dataset: count must be >= 1");
  if (params.K_s != qpsk.period() || params.K_b != ofdm.period()) {
    throw std::invalid_argument("gen_dataset: shift periods disagree with waveform specs");
  }
  const PulseShape pulse = rrc_taps(qpsk.rolloff, qpsk.span_symbols, qpsk.oversampling);
  Dataset d;
  d.header.n = static_cast<std::uint32_t>(params.n_samples);
  d.header.k_s_period = static_cast<std::uint16_t>(params.K_s);
  d.header.k_b_period = static_cast<std::uint16_t>(params.K_b);
  d.header.count = static_cast<std::uint32_t>(count);
  d.header.sir_db = params.sir_db;
  d.header.snr_db = params.snr_db;
  d.header.flags = kFlagComponents | (bits_per_symbol(qpsk.alphabet) > 0 ? kFlagBits : 0U);
  d.records.resize(static_cast<std::size_t>(count));
  parallel_for(d.records.size(), workers, [&](std::size_t i) {
    Rng rng = make_rng(master_seed, i);
    d.records[i] = gen_record(qpsk, pulse, ofdm, params, rng);
  });
  return d;
}

MixtureBatch draw_mixture_batch(const QpskSpec& qpsk, const PulseShape& pulse,
                                const OfdmSpec& ofdm, int n, double sir_db, double snr_db,
                                std::int64_t first, int count, std::uint64_t seed,
                                std::uint64_t tag) {
  MixtureParams params;
  params.n_samples = n;
  params.sir_db = sir_db;
  params.snr_db = snr_db;
  params.K_s = qpsk.period();
  params.K_b = ofdm.period();
  MixtureBatch batch;
  batch.y.resize(n, count);
  batch.s.resize(n, count);
  batch.k_b.resize(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    Rng rng = make_rng(seed, static_cast<std::uint64_t>(first + c), tag);
    const MixtureRecord rec = gen_record(qpsk, pulse, ofdm, params, rng);
    batch.y.col(c) = as_vector(rec.y.samples);
    batch.s.col(c) = as_vector(rec.s.samples);
    batch.k_b[static_cast<std::size_t>(c)] = rec.k_b;
  }
  return batch;
}

}  // namespace scss
