#include "scss/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

namespace scss {
namespace {

constexpr double kPi = std::numbers::pi;

// Continuous-time RRC impulse response at x = t / T (symbol periods).
double rrc_value(double x, double beta) {
  if (std::abs(x) < 1e-12) {
    return 1.0 - beta + 4.0 * beta / kPi;
  }
  const double edge = 1.0 / (4.0 * beta);
  if (std::abs(std::abs(x) - edge) < 1e-9) {
    const double a = kPi / (4.0 * beta);
    return beta / std::numbers::sqrt2 *
           ((1.0 + 2.0 / kPi) * std::sin(a) + (1.0 - 2.0 / kPi) * std::cos(a));
  }
  const double num = std::sin(kPi * x * (1.0 - beta)) +
                     4.0 * beta * x * std::cos(kPi * x * (1.0 + beta));
  const double den = kPi * x * (1.0 - (4.0 * beta * x) * (4.0 * beta * x));
  return num / den;
}

// Per-axis Gray levels for 16-QAM: 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3.
double qam16_level(std::uint8_t b0, std::uint8_t b1) {
  const double magnitude = b1 ? 1.0 : 3.0;
  return b0 ? -magnitude : magnitude;
}

}  // namespace

const char* to_string(Alphabet a) {
  switch (a) {
    case Alphabet::QPSK: return "qpsk";
    case Alphabet::QAM16: return "qam16";
    case Alphabet::GaussianIID: return "gaussian";
  }
  return "?";
}

Alphabet alphabet_from_string(const std::string& name) {
  if (name == "qpsk") return Alphabet::QPSK;
  if (name == "qam16") return Alphabet::QAM16;
  if (name == "gaussian") return Alphabet::GaussianIID;
  throw std::invalid_argument("unknown alphabet: " + name);
}

int bits_per_symbol(Alphabet a) {
  switch (a) {
    case Alphabet::QPSK: return 2;
    case Alphabet::QAM16: return 4;
    case Alphabet::GaussianIID: return 0;
  }
  return 0;
}

PulseShape rrc_taps(double rolloff, int span_symbols, int oversampling) {
  if (!(rolloff > 0.0 && rolloff <= 1.0)) {
    throw std::domain_error("rrc_taps: rolloff must lie in (0, 1]");
  }
  if (span_symbols < 1 || oversampling < 1) {
    throw std::invalid_argument("rrc_taps: span and oversampling must be >= 1");
  }
  PulseShape p;
  p.oversampling = oversampling;
  p.span_symbols = span_symbols;
  const int len = span_symbols * oversampling + 1;
  const double center = 0.5 * (len - 1);
  p.taps.resize(static_cast<std::size_t>(len));
  double energy = 0.0;
  for (int i = 0; i < len; ++i) {
    const double x = (i - center) / oversampling;
    p.taps[static_cast<std::size_t>(i)] = rrc_value(x, rolloff);
  }
  // Enforce exact symmetry before normalization.
  for (int i = 0; i < len / 2; ++i) {
    auto& lo = p.taps[static_cast<std::size_t>(i)];
    auto& hi = p.taps[static_cast<std::size_t>(len - 1 - i)];
    lo = hi = 0.5 * (lo + hi);
  }
  for (double t : p.taps) energy += t * t;
  const double scale = 1.0 / std::sqrt(energy);
  for (double& t : p.taps) t *= scale;
  return p;
}

std::vector<Complex> map_bits(Alphabet alphabet, const Bits& bits) {
  const int bps = bits_per_symbol(alphabet);
  if (bps == 0) throw std::invalid_argument("map_bits: alphabet carries no bits");
  if (bits.size() % static_cast<std::size_t>(bps) != 0) {
    throw std::invalid_argument("map_bits: bit count not a multiple of bits per symbol");
  }
  std::vector<Complex> out;
  out.reserve(bits.size() / static_cast<std::size_t>(bps));
  for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(bps)) {
    if (alphabet == Alphabet::QPSK) {
      const double a = 1.0 / std::numbers::sqrt2;
      out.emplace_back(bits[i] ? -a : a, bits[i + 1] ? -a : a);
    } else {
      const double a = 1.0 / std::sqrt(10.0);
      out.emplace_back(a * qam16_level(bits[i], bits[i + 1]),
                       a * qam16_level(bits[i + 2], bits[i + 3]));
    }
  }
  return out;
}

SymbolDraw gen_symbols_with_bits(Alphabet alphabet, std::int64_t count, Rng& rng) {
  if (count < 0) throw std::invalid_argument("gen_symbols: negative count");
  SymbolDraw draw;
  const auto n = static_cast<std::size_t>(count);
  if (alphabet == Alphabet::GaussianIID) {
    draw.symbols.reserve(n);
    for (std::size_t i = 0; i < n; ++i) draw.symbols.push_back(complex_normal(rng));
    return draw;
  }
  const auto bps = static_cast<std::size_t>(bits_per_symbol(alphabet));
  draw.bits.resize(n * bps);
  // One 64-bit draw feeds up to 64 bits.
  std::uint64_t word = 0;
  int left = 0;
  for (auto& b : draw.bits) {
    if (left == 0) {
      word = rng();
      left = 64;
    }
    b = static_cast<std::uint8_t>(word & 1U);
    word >>= 1;
    --left;
  }
  draw.symbols = map_bits(alphabet, draw.bits);
  return draw;
}

std::vector<Complex> gen_symbols(Alphabet alphabet, std::int64_t count, Rng& rng) {
  return gen_symbols_with_bits(alphabet, count, rng).symbols;
}

ComplexSignal pulse_shape(const std::vector<Complex>& symbols, const PulseShape& pulse) {
  if (symbols.empty()) throw std::invalid_argument("pulse_shape: no symbols");
  const std::size_t os = static_cast<std::size_t>(pulse.oversampling);
  const std::size_t len = pulse.taps.size();
  ComplexSignal out;
  out.origin = "pulse_shape";
  out.samples.assign(symbols.size() * os + len - 1, Complex{});
  for (std::size_t j = 0; j < symbols.size(); ++j) {
    Complex* dst = out.samples.data() + j * os;
    for (std::size_t i = 0; i < len; ++i) dst[i] += symbols[j] * pulse.taps[i];
  }
  SymbolTiming timing;
  timing.samples_per_symbol = pulse.oversampling;
  timing.group_delay = pulse.group_delay();
  timing.first_peak = timing.group_delay;
  timing.num_symbols = static_cast<std::int64_t>(symbols.size());
  out.timing = timing;
  return out;
}

ComplexSignal gen_ofdm(const OfdmSpec& spec, std::int64_t num_symbols, Rng& rng) {
  if (num_symbols < 1) throw std::invalid_argument("gen_ofdm: num_symbols must be >= 1");
  if (spec.fft_size < 1 || spec.cp_len < 0 || spec.cp_len > spec.fft_size) {
    throw std::invalid_argument("gen_ofdm: invalid fft_size/cp_len");
  }
  const int m = spec.fft_size;
  const int cp = spec.cp_len;
  // Eigen's inverse FFT scales by 1/M; rescale to the unitary 1/sqrt(M).
  const double scale = std::sqrt(static_cast<double>(m));
  Eigen::FFT<double> fft;

  ComplexSignal out;
  out.origin = "ofdm";
  out.samples.reserve(static_cast<std::size_t>(num_symbols * (m + cp)));
  std::vector<Complex> body;
  for (std::int64_t q = 0; q < num_symbols; ++q) {
    const auto carriers = gen_symbols(spec.alphabet, m, rng);
    fft.inv(body, carriers);
    for (auto& v : body) v *= scale;
    out.samples.insert(out.samples.end(), body.end() - cp, body.end());
    out.samples.insert(out.samples.end(), body.begin(), body.end());
  }
  return out;
}

SymbolTiming soi_timing(const PulseShape& pulse, std::int64_t n, int shift) {
  const std::int64_t os = pulse.oversampling;
  const std::int64_t gd = pulse.group_delay();
  // Symbol j peaks at window index j*os - gd - shift; count those whose
  // whole pulse [peak - gd, peak + gd] lies in [0, n).
  const std::int64_t need = 2 * gd + shift;
  const std::int64_t j_first = (need + os - 1) / os;
  SymbolTiming t;
  t.samples_per_symbol = pulse.oversampling;
  t.group_delay = pulse.group_delay();
  t.first_peak = j_first * os - gd - shift;
  const std::int64_t last_ok = n - 1 - gd;
  t.num_symbols = last_ok >= t.first_peak ? (last_ok - t.first_peak) / os + 1 : 0;
  return t;
}

SoiWindow gen_soi_window(const QpskSpec& spec, const PulseShape& pulse, std::int64_t n,
                         int shift, Rng& rng) {
  if (n < 1) throw std::invalid_argument("gen_soi_window: n must be >= 1");
  const std::int64_t os = pulse.oversampling;
  if (shift < 0 || shift >= os) throw std::out_of_range("gen_soi_window: shift out of range");
  const std::int64_t start = soi_warmup(pulse) + shift;
  const std::int64_t num_sym = (start + n - 1) / os + 1;
  auto draw = gen_symbols_with_bits(spec.alphabet, num_sym, rng);

  const double amp = std::sqrt(static_cast<double>(os));
  const std::int64_t len = pulse.length();
  SoiWindow w;
  w.signal.origin = "soi";
  w.signal.samples.assign(static_cast<std::size_t>(n), Complex{});
  for (std::int64_t j = 0; j < num_sym; ++j) {
    const Complex a = amp * draw.symbols[static_cast<std::size_t>(j)];
    // out[t] += a * taps[t - j*os] for t in window.
    const std::int64_t t_lo = std::max(j * os, start);
    const std::int64_t t_hi = std::min(j * os + len, start + n);
    for (std::int64_t t = t_lo; t < t_hi; ++t) {
      w.signal.samples[static_cast<std::size_t>(t - start)] +=
          a * pulse.taps[static_cast<std::size_t>(t - j * os)];
    }
  }

  SymbolTiming timing = soi_timing(pulse, n, shift);
  timing.symbol_amplitude = amp;
  w.signal.timing = timing;
  const std::int64_t gd = pulse.group_delay();
  const std::int64_t j_first = (timing.first_peak + gd + shift) / os;
  const auto bps = static_cast<std::size_t>(bits_per_symbol(spec.alphabet));
  for (std::int64_t i = 0; i < timing.num_symbols; ++i) {
    const auto j = static_cast<std::size_t>(j_first + i);
    w.counted_symbols.push_back(draw.symbols[j]);
    if (bps > 0) {
      w.bits.insert(w.bits.end(), draw.bits.begin() + static_cast<std::ptrdiff_t>(j * bps),
                    draw.bits.begin() + static_cast<std::ptrdiff_t>((j + 1) * bps));
    }
  }
  return w;
}

}  // namespace scss
