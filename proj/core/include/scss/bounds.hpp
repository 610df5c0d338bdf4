#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "scss/covariance.hpp"
#include "scss/signals.hpp"

namespace scss {

/// Exponent parameter `tau`, threshold `a` and window length `n` of a
/// Chernoff bound on the psi statistic at the true shift.
struct ChernoffParams {
  int n = 64;
  double tau = 0.0;
  double a = 0.5;
};

/// E[exp(tau psi_N)] = (1 - tau/N)^(-N) exp(-tau) for tau < N.
double log_mgf_psi(double tau, int n);
double mgf_psi_analytic(double tau, int n);

/// P[psi > a] <= (1 - t/N)^(-N) exp(-t(1+a)), t < N.
double log_chernoff_b1(const ChernoffParams& p);
double chernoff_b1(const ChernoffParams& p);
/// P[psi < -a] <= (1 + t/N)^(-N) exp(t(1-a)), t > -N.
double log_chernoff_b2(const ChernoffParams& p);
double chernoff_b2(const ChernoffParams& p);

/// Closed-form minima over t for a fixed threshold:
///   min_t B1 = (1+a)^N exp(-N a),  min_t B2 = (1-a)^N exp(N a)  (0 for a >= 1).
double log_chernoff_b1_min(int n, double a);
double log_chernoff_b2_min(int n, double a);

struct OptimizedBounds {
  double b1_star = 0.0;
  double b2_star = 0.0;
  double log10_b1_star = 0.0;
  double log10_b2_star = 0.0;
};

/// Minimized bounds at a = N^-(0.5 - eps). Throws std::domain_error unless
/// 0 < eps < 0.5.
OptimizedBounds chernoff_opt(int n, double eps);

/// Probability estimate with a Wilson score interval.
struct Proportion {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};
Proportion wilson_interval(std::int64_t successes, std::int64_t trials, double z = 1.959963984540054);

struct DecayCurve {
  std::vector<int> n_values;
  std::vector<double> err_prob;  // MAP synchronizer
  std::vector<double> conf_lo;
  std::vector<double> conf_hi;
  std::vector<double> psi_err_prob;  // psi synchronizer
  std::vector<double> psi_conf_lo;
  std::vector<double> psi_conf_hi;
  std::vector<double> log10_b1_star;
  std::vector<double> log10_b2_star;
  std::int64_t trials = 0;
};

struct DecayConfig {
  QpskSpec qpsk{.alphabet = Alphabet::GaussianIID};
  OfdmSpec ofdm{.alphabet = Alphabet::GaussianIID};
  double sir_db = 0.0;
  double snr_db = 20.0;
  std::vector<int> n_values{80, 160, 320, 640};
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  double eps = 0.1;
  int workers = 1;
};

/// psi_N(y, k_b) at the true shift for `trials` independent mixtures of
/// length n drawn from the waveform models (Gaussian symbols assumed by the
/// analytic bank). Trial i uses stream derive_seed(seed, i, n).
std::vector<double> true_shift_psi_samples(const CovBank& bank, const QpskSpec& qpsk,
                                           const OfdmSpec& ofdm, std::int64_t trials,
                                           std::uint64_t seed, int workers = 1);

using BankBuilder = std::function<CovBank(int n)>;

/// For each N: draw mixtures with uniform k_b, synchronize on the length-N
/// window with MAP and psi, and record error rates with Wilson intervals.
/// Throws std::invalid_argument for trials < 1 or an empty n list.
DecayCurve sync_decay_experiment(const BankBuilder& bank_builder, const DecayConfig& config);

}  // namespace scss
