#include <gtest/gtest.h>

#include <cmath>

#include "scss/bounds.hpp"
#include "scss/rng.hpp"

namespace scss {
namespace {

DecayConfig small_decay() {
  DecayConfig c;
  c.n_values = {80, 160};
  c.trials = 256;
  c.seed = 3;
  return c;
}

BankBuilder analytic_builder(const DecayConfig& c) {
  return [c](int n) { return build_analytic_bank(c.qpsk, c.ofdm, n, c.sir_db, c.snr_db); };
}

TEST(Mgf, ClosedForm) {
  EXPECT_DOUBLE_EQ(mgf_psi_analytic(0.0, 16), 1.0);
  EXPECT_DOUBLE_EQ(mgf_psi_analytic(0.0, 640), 1.0);
  EXPECT_NEAR(log_mgf_psi(1.0, 64), -64.0 * std::log(1.0 - 1.0 / 64.0) - 1.0, 1e-14);
  EXPECT_THROW(mgf_psi_analytic(64.0, 64), std::domain_error);
  EXPECT_THROW(mgf_psi_analytic(70.0, 64), std::domain_error);
  EXPECT_THROW(mgf_psi_analytic(0.5, 0), std::invalid_argument);
}

TEST(Mgf, MatchesGammaMonteCarlo) {
  // N (psi + 1) ~ Gamma(N, 1) for a whitened CN(0, I) vector.
  constexpr int kN = 64;
  constexpr int kReps = 100000;
  Rng rng = make_rng(1, 0);
  double sum = 0.0;
  double sum2 = 0.0;
  for (int r = 0; r < kReps; ++r) {
    double energy = 0.0;
    for (int i = 0; i < kN; ++i) energy += std::norm(complex_normal(rng));
    const double v = std::exp(energy / kN - 1.0);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / kReps;
  const double se = std::sqrt((sum2 / kReps - mean * mean) / kReps);
  EXPECT_NEAR(mean, mgf_psi_analytic(1.0, kN), 3.0 * se);
}

TEST(Mgf, TrueShiftMixtures) {
  DecayConfig c = small_decay();
  const CovBank bank = build_analytic_bank(c.qpsk, c.ofdm, 16, c.sir_db, c.snr_db);
  const std::vector<double> psi = true_shift_psi_samples(bank, c.qpsk, c.ofdm, 20000, 5);
  ASSERT_EQ(psi.size(), 20000U);
  for (double tau : {-2.0, 0.5}) {
    double sum = 0.0;
    double sum2 = 0.0;
    for (double p : psi) {
      const double v = std::exp(tau * p);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / psi.size();
    const double se = std::sqrt((sum2 / psi.size() - mean * mean) / psi.size());
    EXPECT_NEAR(mean, mgf_psi_analytic(tau, 16), 3.0 * se) << "tau " << tau;
  }
  EXPECT_THROW(true_shift_psi_samples(bank, c.qpsk, c.ofdm, 0, 5), std::invalid_argument);
}

TEST(Chernoff, TrivialAtZero) {
  EXPECT_DOUBLE_EQ(chernoff_b1({64, 0.0, 0.5}), 1.0);
  EXPECT_DOUBLE_EQ(chernoff_b2({64, 0.0, 0.5}), 1.0);
  EXPECT_THROW(chernoff_b1({64, 64.0, 0.5}), std::domain_error);
  EXPECT_THROW(chernoff_b2({64, -64.0, 0.5}), std::domain_error);
  EXPECT_NO_THROW(chernoff_b2({64, 64.0, 0.5}));
}

TEST(Chernoff, ClosedFormMinimumMatchesNumericalSearch) {
  for (int n : {16, 64, 1000}) {
    const double a = std::pow(static_cast<double>(n), -0.4);
    // Golden-section search over t in (-n, n) for each bound.
    auto minimize = [&](auto f, double lo, double hi) {
      const double g = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = hi - g * (hi - lo);
      double x2 = lo + g * (hi - lo);
      for (int it = 0; it < 300; ++it) {
        if (f(x1) < f(x2)) {
          hi = x2;
        } else {
          lo = x1;
        }
        x1 = hi - g * (hi - lo);
        x2 = lo + g * (hi - lo);
      }
      return f(0.5 * (lo + hi));
    };
    const double b1 = minimize(
        [&](double t) { return log_chernoff_b1({n, t, a}); }, -0.999 * n, 0.999 * n);
    const double b2 = minimize(
        [&](double t) { return log_chernoff_b2({n, t, a}); }, -0.999 * n, 0.999 * n);
    EXPECT_NEAR(std::exp(b1), std::exp(log_chernoff_b1_min(n, a)),
                1e-6 * std::exp(log_chernoff_b1_min(n, a)));
    EXPECT_NEAR(std::exp(b2), std::exp(log_chernoff_b2_min(n, a)),
                1e-6 * std::exp(log_chernoff_b2_min(n, a)));
    const OptimizedBounds ob = chernoff_opt(n, 0.1);
    EXPECT_NEAR(ob.log10_b1_star, log_chernoff_b1_min(n, a) / std::log(10.0), 1e-9);
  }
}

TEST(Chernoff, LowerTailEmptyBeyondMinusOne) {
  EXPECT_EQ(log_chernoff_b2_min(64, 1.0), -kInf);
  EXPECT_THROW(log_chernoff_b1_min(64, 0.0), std::domain_error);
}

TEST(ChernoffOpt, ProbabilitiesBounded) {
  for (int n = 4; n <= 4096; n *= 2) {
    const OptimizedBounds ob = chernoff_opt(n, 0.1);
    EXPECT_GT(ob.b1_star, 0.0);
    EXPECT_LE(ob.b1_star, 1.0);
    EXPECT_GT(ob.b2_star, 0.0);
    EXPECT_LE(ob.b2_star, 1.0);
    EXPECT_LT(ob.b2_star, ob.b1_star);
  }
  EXPECT_THROW(chernoff_opt(64, 0.0), std::domain_error);
  EXPECT_THROW(chernoff_opt(64, 0.5), std::domain_error);
}

TEST(ChernoffOpt, SuperPolynomialDecay) {
  // n^3 B1* falls over n = 1e2, 1e3, 1e4 once the exponent N^(2 eps) dominates;
  // eps = 0.4 puts the whole decade range in that regime.
  double prev = kInf;
  for (int n : {100, 1000, 10000}) {
    const double log_scaled = 3.0 * std::log(static_cast<double>(n)) +
                              std::log(chernoff_opt(n, 0.4).b1_star);
    EXPECT_LT(log_scaled, prev);
    prev = log_scaled;
  }
  EXPECT_LT(prev, std::log(1e-6));
}

TEST(ChernoffOpt, BoundsHoldForGammaTails) {
  constexpr int kN = 64;
  constexpr int kReps = 200000;
  Rng rng = make_rng(2, 0);
  int upper = 0;
  int lower = 0;
  const double a = 0.25;
  for (int r = 0; r < kReps; ++r) {
    double energy = 0.0;
    for (int i = 0; i < kN; ++i) energy += std::norm(complex_normal(rng));
    const double psi = energy / kN - 1.0;
    upper += psi > a;
    lower += psi < -a;
  }
  auto check = [&](int count, double log_bound) {
    const double p = static_cast<double>(count) / kReps;
    const double se = std::sqrt(p * (1.0 - p) / kReps);
    EXPECT_LE(p - 2.0 * se, std::exp(log_bound));
  };
  check(upper, log_chernoff_b1_min(kN, a));
  check(lower, log_chernoff_b2_min(kN, a));
}

TEST(Wilson, Interval) {
  const Proportion zero = wilson_interval(0, 10000);
  EXPECT_EQ(zero.p, 0.0);
  EXPECT_EQ(zero.lo, 0.0);
  EXPECT_GT(zero.hi, 0.0);
  EXPECT_LT(zero.hi, 5e-4);
  const Proportion half = wilson_interval(50, 100);
  EXPECT_DOUBLE_EQ(half.p, 0.5);
  EXPECT_NEAR(half.lo + half.hi, 1.0, 1e-12);
  EXPECT_NEAR(half.hi - half.lo, 2 * 1.959963984540054 * 0.05 / (1 + 3.8414588206941236 / 100) *
                                     std::sqrt(1 + 3.8414588206941236 / 100),
              1e-12);
  EXPECT_THROW(wilson_interval(0, 0), std::invalid_argument);
}

TEST(Decay, ZeroTrialsRejected) {
  DecayConfig c = small_decay();
  c.trials = 0;
  EXPECT_THROW(sync_decay_experiment(analytic_builder(c), c), std::invalid_argument);
  c.trials = 10;
  c.n_values.clear();
  EXPECT_THROW(sync_decay_experiment(analytic_builder(c), c), std::invalid_argument);
}

TEST(Decay, UninformativeLimit) {
  DecayConfig c = small_decay();
  c.sir_db = kInf;
  c.snr_db = kInf;
  c.n_values = {32};
  c.trials = 2000;
  const DecayCurve curve = sync_decay_experiment(analytic_builder(c), c);
  const double expected = 79.0 / 80.0;
  EXPECT_NEAR(curve.err_prob[0], expected, 3.0 * std::sqrt(expected / 80.0 / c.trials));
}

TEST(Decay, CurveShapeAndDeterminism) {
  DecayConfig c = small_decay();
  const DecayCurve a = sync_decay_experiment(analytic_builder(c), c);
  ASSERT_EQ(a.n_values, c.n_values);
  ASSERT_EQ(a.err_prob.size(), 2U);
  EXPECT_EQ(a.trials, c.trials);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_GE(a.err_prob[i], 0.0);
    EXPECT_LE(a.err_prob[i], 1.0);
    EXPECT_LE(a.conf_lo[i], a.err_prob[i]);
    EXPECT_GE(a.conf_hi[i], a.err_prob[i]);
    EXPECT_LT(a.log10_b1_star[i], 0.0);
  }
  // Longer windows synchronize better at this scale.
  EXPECT_LT(a.err_prob[1], a.err_prob[0]);
  c.workers = 3;
  const DecayCurve b = sync_decay_experiment(analytic_builder(c), c);
  EXPECT_EQ(a.err_prob, b.err_prob);
  EXPECT_EQ(a.psi_err_prob, b.psi_err_prob);
}

TEST(Decay, PsiCalibrationAtTrueShift) {
  DecayConfig c = small_decay();
  const CovBank bank = build_analytic_bank(c.qpsk, c.ofdm, 64, c.sir_db, c.snr_db);
  const std::vector<double> psi = true_shift_psi_samples(bank, c.qpsk, c.ofdm, 20000, 9);
  double sum = 0.0;
  double sum2 = 0.0;
  for (double p : psi) {
    sum += p;
    sum2 += p * p;
  }
  const double mean = sum / psi.size();
  const double var = sum2 / psi.size() - mean * mean;
  EXPECT_NEAR(mean, 0.0, 3.0 * std::sqrt(var / psi.size()));
  EXPECT_NEAR(var * 64.0, 1.0, 0.05);
}

}  // namespace
}  // namespace scss
