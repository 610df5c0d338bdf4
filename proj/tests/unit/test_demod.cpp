#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "scss/demod.hpp"
#include "scss/mixture.hpp"
#include "scss/rng.hpp"

namespace scss {
namespace {

const PulseShape& default_pulse() {
  static const PulseShape p = rrc_taps(0.5, 8, 16);
  return p;
}

// Sum over k != 0 of |r(k os)|, r the tap autocorrelation: worst-case ISI for
// unit-modulus symbols after the matched filter.
double isi_bound(const PulseShape& p) {
  double total = 0.0;
  for (int lag = p.oversampling; lag < p.length(); lag += p.oversampling) {
    double r = 0.0;
    for (int t = 0; t + lag < p.length(); ++t) r += p.taps[t] * p.taps[t + lag];
    total += 2.0 * std::abs(r);
  }
  return total;
}

TEST(MatchedFilter, SingleSymbolPeak) {
  const ComplexSignal x = pulse_shape({Complex(1.0, 0.0)}, default_pulse());
  const std::vector<Complex> y = matched_filter(x, default_pulse());
  ASSERT_EQ(y.size(), 1U);
  EXPECT_NEAR(y[0].real(), 1.0, 1e-12);
  EXPECT_NEAR(y[0].imag(), 0.0, 1e-15);
}

TEST(MatchedFilter, ZeroSignal) {
  QpskSpec q;
  Rng rng = make_rng(1, 0);
  SoiWindow w = gen_soi_window(q, default_pulse(), 640, 0, rng);
  std::fill(w.signal.samples.begin(), w.signal.samples.end(), Complex{});
  for (const Complex& z : matched_filter(w.signal, default_pulse())) EXPECT_EQ(z, Complex{});
}

TEST(MatchedFilter, TooShort) {
  ComplexSignal x;
  x.samples.assign(50, 1.0);
  EXPECT_THROW(matched_filter(x, default_pulse()), std::invalid_argument);
}

TEST(MatchedFilter, LoopbackWithinIsiFloor) {
  QpskSpec q;
  const std::int64_t n = 16 * 50000 + 256;
  for (int shift : {0, 9}) {
    Rng rng = make_rng(2, static_cast<std::uint64_t>(shift));
    const SoiWindow w = gen_soi_window(q, default_pulse(), n, shift, rng);
    const DemodResult r = demodulate(w.signal, default_pulse(), Alphabet::QPSK);
    ASSERT_EQ(r.symbols.size(), w.counted_symbols.size());
    ASSERT_GE(r.bits.size(), 100000U);
    EXPECT_EQ(r.delay_used, 64);
    const double bound = isi_bound(default_pulse());
    double worst = 0.0;
    for (std::size_t i = 0; i < r.symbols.size(); ++i) {
      worst = std::max(worst, std::abs(r.symbols[i] - w.counted_symbols[i]));
    }
    EXPECT_LE(worst, bound);
    EXPECT_EQ(r.bits, w.bits);
    EXPECT_EQ(ber(r.bits, w.bits), 0.0);
  }
}

TEST(HardDecision, QpskQuadrant) {
  EXPECT_EQ(hard_decision({Complex(0.9, 0.8)}, Alphabet::QPSK), (Bits{0, 0}));
  EXPECT_EQ(hard_decision({Complex(-0.9, 0.8)}, Alphabet::QPSK), (Bits{1, 0}));
  EXPECT_EQ(hard_decision({Complex(0.1, -3.0)}, Alphabet::QPSK), (Bits{0, 1}));
  // Ties toward the smallest bit pattern.
  EXPECT_EQ(hard_decision({Complex(0.0, 0.0)}, Alphabet::QPSK), (Bits{0, 0}));
  EXPECT_EQ(hard_decision(map_bits(Alphabet::QPSK, {0, 0}), Alphabet::QPSK), (Bits{0, 0}));
}

TEST(HardDecision, ExactRoundTrip) {
  for (Alphabet a : {Alphabet::QPSK, Alphabet::QAM16}) {
    const int bps = bits_per_symbol(a);
    Bits all;
    for (int v = 0; v < (1 << bps); ++v) {
      for (int b = bps - 1; b >= 0; --b) all.push_back(static_cast<std::uint8_t>((v >> b) & 1));
    }
    EXPECT_EQ(hard_decision(map_bits(a, all), a), all) << to_string(a);
  }
  EXPECT_THROW(hard_decision({Complex{}}, Alphabet::GaussianIID), std::invalid_argument);
}

TEST(HardDecision, NearestPointQam16) {
  Rng rng = make_rng(3, 0);
  const SymbolDraw d = gen_symbols_with_bits(Alphabet::QAM16, 2000, rng);
  // Perturb by less than half the minimum distance 2 / sqrt(10).
  std::vector<Complex> noisy = d.symbols;
  const double r = 0.9 / std::sqrt(10.0);
  for (auto& z : noisy) z += std::polar(r, 2.0 * std::numbers::pi * uniform01(rng));
  EXPECT_EQ(hard_decision(noisy, Alphabet::QAM16), d.bits);
}

TEST(HardDecision, AwgnSymbolsMatchQFunction) {
  // Es/N0 = 10 dB for unit-power QPSK: Eb/N0 = 7 dB.
  constexpr std::int64_t kSymbols = 400000;
  Rng rng = make_rng(4, 0);
  const SymbolDraw d = gen_symbols_with_bits(Alphabet::QPSK, kSymbols, rng);
  const double sigma = std::sqrt(std::pow(10.0, -1.0));
  std::vector<Complex> noisy = d.symbols;
  for (auto& z : noisy) z += sigma * complex_normal(rng);
  const double measured = ber(hard_decision(noisy, Alphabet::QPSK), d.bits);
  const double expected = qpsk_awgn_ber(10.0 - 10.0 * std::log10(2.0));
  const double sd = std::sqrt(expected * (1.0 - expected) / (2.0 * kSymbols));
  EXPECT_NEAR(measured, expected, 3.0 * sd);
}

TEST(HardDecision, AwgnWaveformMatchesQFunction) {
  // Sample-level noise: the unit-energy matched filter leaves N0 = var / os.
  QpskSpec q;
  const double ebn0_db = 4.0;
  const double var = 16.0 / (2.0 * std::pow(10.0, ebn0_db / 10.0));
  Rng rng = make_rng(5, 0);
  const SoiWindow w = gen_soi_window(q, default_pulse(), 16 * 60000, 0, rng);
  ComplexSignal y = w.signal;
  const double sd_w = std::sqrt(var);
  for (auto& z : y.samples) z += sd_w * complex_normal(rng);
  const double measured = ber(demodulate(y, default_pulse(), Alphabet::QPSK).bits, w.bits);
  const double expected = qpsk_awgn_ber(ebn0_db);
  const double sd = std::sqrt(expected * (1.0 - expected) / static_cast<double>(w.bits.size()));
  EXPECT_NEAR(measured, expected, 3.0 * sd);
}

TEST(Ber, Examples) {
  const Bits a{0, 1, 1, 0};
  EXPECT_EQ(ber(a, a), 0.0);
  EXPECT_EQ(ber(a, Bits{1, 0, 0, 1}), 1.0);
  Bits many(1000, 0);
  Bits flipped = many;
  flipped[417] = 1;
  EXPECT_DOUBLE_EQ(ber(flipped, many), 0.001);
  EXPECT_THROW(ber(a, Bits{0}), std::invalid_argument);
  EXPECT_EQ(ber({}, {}), 0.0);
}

TEST(Qfunc, KnownValues) {
  EXPECT_DOUBLE_EQ(qfunc(0.0), 0.5);
  EXPECT_NEAR(qfunc(1.0), 0.15865525393145707, 1e-15);
  EXPECT_NEAR(qfunc(3.0), 0.0013498980316301, 1e-15);
  EXPECT_NEAR(qpsk_awgn_ber(9.6), 1.0e-5, 0.3e-5);
}

}  // namespace
}  // namespace scss
