#include <gtest/gtest.h>

#include <cmath>

#include "scss/covariance.hpp"
#include "scss/mixture.hpp"

namespace scss {
namespace {

ComplexSignal signal_of(std::vector<Complex> v) {
  ComplexSignal s;
  s.samples = std::move(v);
  return s;
}

TEST(ApplyShift, Windows) {
  const ComplexSignal x = signal_of({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(apply_shift(x, 0, 3).samples, (std::vector<Complex>{1.0, 2.0, 3.0}));
  EXPECT_EQ(apply_shift(x, 1, 3).samples, (std::vector<Complex>{2.0, 3.0, 4.0}));
  EXPECT_THROW(apply_shift(x, 2, 3), std::length_error);
  EXPECT_THROW(apply_shift(x, -1, 2), std::invalid_argument);
}

TEST(Mix, NoiselessUnitSir) {
  const ComplexSignal s = signal_of({1.0, Complex(0, 1)});
  const ComplexSignal b = signal_of({2.0, -1.0});
  const ComplexSignal y = mix(s, b, {}, 0.0, kInf);
  EXPECT_EQ(y.samples, (std::vector<Complex>{3.0, Complex(-1, 1)}));
}

TEST(Mix, NoiseScaling) {
  const ComplexSignal z = signal_of({0.0, 0.0});
  const ComplexSignal w = signal_of({Complex(1, 2), Complex(-3, 0.5)});
  const ComplexSignal y = mix(z, z, w, 0.0, 20.0);
  EXPECT_NEAR(std::abs(y[0] - 0.1 * w[0]), 0.0, 1e-16);
  EXPECT_NEAR(std::abs(y[1] - 0.1 * w[1]), 0.0, 1e-16);
  EXPECT_THROW(mix(z, signal_of({1.0}), w, 0.0, 20.0), std::invalid_argument);
  EXPECT_THROW(mix(z, z, signal_of({1.0}), 0.0, 20.0), std::invalid_argument);
}

TEST(Mix, ReconstructsFromStoredComponents) {
  const QpskSpec q;
  const OfdmSpec o;
  const PulseShape p = rrc_taps(q.rolloff, q.span_symbols, q.oversampling);
  MixtureParams mp;
  mp.n_samples = 500;
  mp.sir_db = -7.0;
  mp.snr_db = 13.0;
  Rng rng = make_rng(4, 0);
  const MixtureRecord r = gen_record(q, p, o, mp, rng, true);
  const double gb = std::pow(10.0, 7.0 / 20.0);
  const double gw = std::pow(10.0, -13.0 / 20.0);
  for (std::size_t i = 0; i < 500; ++i) {
    EXPECT_NEAR(std::abs(r.y[i] - (r.s[i] + gb * r.b[i] + gw * r.w[i])), 0.0, 1e-12);
  }
}

TEST(Mix, PowerAdditivity) {
  // Long mixture at SIR -10 dB, SNR 20 dB: power 1 + 10 + 0.01. The
  // standard error comes from 500 block means, each spanning ten OFDM
  // symbols and fifty SOI symbols.
  const QpskSpec q;
  const OfdmSpec o;
  const PulseShape p = rrc_taps(q.rolloff, q.span_symbols, q.oversampling);
  MixtureParams mp;
  mp.n_samples = 400000;
  mp.sir_db = -10.0;
  mp.snr_db = 20.0;
  Rng rng = make_rng(5, 0);
  const MixtureRecord r = gen_record(q, p, o, mp, rng);
  const int blocks = 500, len = 800;
  std::vector<double> means(blocks, 0.0);
  for (int b = 0; b < blocks; ++b) {
    for (int i = 0; i < len; ++i) means[b] += std::norm(r.y[static_cast<std::size_t>(b * len + i)]);
    means[b] /= len;
  }
  double mean = 0.0, ss = 0.0;
  for (double m : means) mean += m / blocks;
  for (double m : means) ss += (m - mean) * (m - mean);
  const double se = std::sqrt(ss / (blocks - 1) / blocks);
  EXPECT_NEAR(average_power(r.y.samples), mean, 1e-9);
  EXPECT_NEAR(mean, 11.01, 3.0 * se);
}

TEST(GenDataset, DeterministicAcrossRunsAndWorkers) {
  const QpskSpec q;
  const OfdmSpec o;
  MixtureParams mp;
  mp.n_samples = 64;
  const Dataset a = gen_dataset(q, o, mp, 5, 42, 1);
  const Dataset b = gen_dataset(q, o, mp, 5, 42, 1);
  const Dataset c = gen_dataset(q, o, mp, 5, 42, 4);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.records[i].y.samples, b.records[i].y.samples);
    EXPECT_EQ(a.records[i].y.samples, c.records[i].y.samples);
    EXPECT_EQ(a.records[i].bits, c.records[i].bits);
    EXPECT_EQ(a.records[i].k_b, c.records[i].k_b);
  }
  const Dataset d = gen_dataset(q, o, mp, 5, 43, 1);
  EXPECT_NE(a.records[0].y.samples, d.records[0].y.samples);
}

TEST(GenDataset, FixedZeroSoiShift) {
  MixtureParams mp;
  mp.n_samples = 32;
  mp.k_s_mode = ShiftMode::FixedZero;
  const Dataset d = gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 1, 1);
  EXPECT_EQ(d.records[0].k_s, 0);
  EXPECT_EQ(d.header.k_b_period, 80);
  EXPECT_EQ(d.header.k_s_period, 16);
}

TEST(GenDataset, FixedInterferenceShift) {
  MixtureParams mp;
  mp.n_samples = 32;
  mp.k_b_mode = ShiftMode::Fixed;
  mp.k_b_fixed = 17;
  const Dataset d = gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 3, 1);
  for (const auto& r : d.records) EXPECT_EQ(r.k_b, 17);
  mp.k_b_fixed = 80;
  EXPECT_THROW(gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 1, 1), std::out_of_range);
}

TEST(GenDataset, ShiftHistogramIsUniform) {
  MixtureParams mp;
  mp.n_samples = 1;
  mp.snr_db = kInf;
  const Dataset d = gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 10000, 2024);
  std::vector<int> hist(80, 0);
  for (const auto& r : d.records) ++hist[static_cast<std::size_t>(r.k_b)];
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - 125.0) * (h - 125.0) / 125.0;
  // 99th percentile of chi-square with 79 degrees of freedom.
  EXPECT_LT(chi2, 111.144);
}

TEST(GenDataset, UniformSoiShiftHistogram) {
  MixtureParams mp;
  mp.n_samples = 1;
  mp.snr_db = kInf;
  mp.k_s_mode = ShiftMode::Uniform;
  const Dataset d = gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 8000, 77);
  std::vector<int> hist(16, 0);
  for (const auto& r : d.records) ++hist[static_cast<std::size_t>(r.k_s)];
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - 500.0) * (h - 500.0) / 500.0;
  EXPECT_LT(chi2, 30.578);  // 99th percentile, 15 degrees of freedom
}

TEST(GenDataset, RejectsBadInput) {
  MixtureParams mp;
  EXPECT_THROW(gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 0, 1), std::invalid_argument);
  mp.K_b = 64;
  EXPECT_THROW(gen_dataset(QpskSpec{}, OfdmSpec{}, mp, 1, 1), std::invalid_argument);
}

TEST(InterferenceWindow, ShiftedOfdmMatchesAlignedCovariance) {
  const OfdmSpec o{.alphabet = Alphabet::GaussianIID};
  const int L = 12, reps = 20000, m = 70;
  CMatrix acc = CMatrix::Zero(L, L);
  for (int r = 0; r < reps; ++r) {
    Rng rng = make_rng(6, static_cast<std::uint64_t>(r));
    const CVector x = as_vector(interference_window(o, L, m, rng).samples);
    acc += x * x.adjoint();
  }
  acc /= reps;
  const CMatrix ref = analytic_cov_ofdm(o, L, m).entries();
  // Unit-variance samples: each entry estimate has standard error 1/sqrt(reps).
  EXPECT_LT((acc - ref).cwiseAbs().maxCoeff(), 4.5 / std::sqrt(reps));
  // Samples 0 and 10 fall in different OFDM symbols.
  EXPECT_NEAR(std::abs(ref(0, 10)), 0.0, 1e-15);
}

}  // namespace
}  // namespace scss
