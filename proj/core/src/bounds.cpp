#include "scss/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "scss/estimators.hpp"
#include "scss/mixture.hpp"
#include "scss/parallel.hpp"

namespace scss {
namespace {

constexpr int kChunk = 64;
constexpr double kLn10 = 2.302585092994046;

}  // namespace

double log_mgf_psi(double tau, int n) {
  if (n < 1) throw std::invalid_argument("mgf_psi: n must be >= 1");
  if (!(tau < n)) throw std::domain_error("mgf_psi: requires tau < N");
  return -n * std::log1p(-tau / n) - tau;
}

double mgf_psi_analytic(double tau, int n) { return std::exp(log_mgf_psi(tau, n)); }

double log_chernoff_b1(const ChernoffParams& p) {
  if (p.n < 1) throw std::invalid_argument("chernoff_b1: n must be >= 1");
  if (!(p.tau < p.n)) throw std::domain_error("chernoff_b1: requires t < N");
  return -p.n * std::log1p(-p.tau / p.n) - p.tau * (1.0 + p.a);
}

double chernoff_b1(const ChernoffParams& p) { return std::exp(log_chernoff_b1(p)); }

double log_chernoff_b2(const ChernoffParams& p) {
  if (p.n < 1) throw std::invalid_argument("chernoff_b2: n must be >= 1");
  if (!(p.tau > -p.n)) throw std::domain_error("chernoff_b2: requires t > -N");
  return -p.n * std::log1p(p.tau / p.n) + p.tau * (1.0 - p.a);
}

double chernoff_b2(const ChernoffParams& p) { return std::exp(log_chernoff_b2(p)); }

double log_chernoff_b1_min(int n, double a) {
  if (!(a > 0.0)) throw std::domain_error("chernoff: threshold must be positive");
  return n * (std::log1p(a) - a);
}

double log_chernoff_b2_min(int n, double a) {
  if (!(a > 0.0)) throw std::domain_error("chernoff: threshold must be positive");
  // psi >= -1, so the lower tail beyond -1 is empty.
  if (a >= 1.0) return -kInf;
  return n * (std::log1p(-a) + a);
}

OptimizedBounds chernoff_opt(int n, double eps) {
  if (!(eps > 0.0 && eps < 0.5)) throw std::domain_error("chernoff_opt: eps must lie in (0, 0.5)");
  if (n < 1) throw std::invalid_argument("chernoff_opt: n must be >= 1");
  const double a = std::pow(static_cast<double>(n), -(0.5 - eps));
  const double l1 = log_chernoff_b1_min(n, a);
  const double l2 = log_chernoff_b2_min(n, a);
  return {std::exp(l1), std::exp(l2), l1 / kLn10, l2 / kLn10};
}

Proportion wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: no trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

std::vector<double> true_shift_psi_samples(const CovBank& bank, const QpskSpec& qpsk,
                                           const OfdmSpec& ofdm, std::int64_t trials,
                                           std::uint64_t seed, int workers) {
  if (trials < 1) throw std::invalid_argument("true_shift_psi_samples: trials must be >= 1");
  const PulseShape pulse = rrc_taps(qpsk.rolloff, qpsk.span_symbols, qpsk.oversampling);
  const int n = bank.L;
  std::vector<double> psi(static_cast<std::size_t>(trials));
  const auto chunks = static_cast<std::size_t>((trials + kChunk - 1) / kChunk);
  parallel_for(chunks, workers, [&](std::size_t c) {
    const std::int64_t first = static_cast<std::int64_t>(c) * kChunk;
    const int count = static_cast<int>(std::min<std::int64_t>(kChunk, trials - first));
    const MixtureBatch batch = draw_mixture_batch(qpsk, pulse, ofdm, n, bank.sir_db, bank.snr_db,
                                                  first, count, seed, static_cast<std::uint64_t>(n));
    for (int j = 0; j < count; ++j) {
      const auto& c_yy = bank.c_yy[static_cast<std::size_t>(batch.k_b[static_cast<std::size_t>(j)])];
      const CVector u = c_yy.whiten(batch.y.col(j));
      psi[static_cast<std::size_t>(first + j)] = u.squaredNorm() / n - 1.0;
    }
  });
  return psi;
}

DecayCurve sync_decay_experiment(const BankBuilder& bank_builder, const DecayConfig& config) {
  if (config.trials < 1) throw std::invalid_argument("sync_decay_experiment: trials must be >= 1");
  if (config.n_values.empty()) throw std::invalid_argument("sync_decay_experiment: no window lengths");
  const PulseShape pulse =
      rrc_taps(config.qpsk.rolloff, config.qpsk.span_symbols, config.qpsk.oversampling);
  DecayCurve curve;
  curve.trials = config.trials;
  for (std::size_t point = 0; point < config.n_values.size(); ++point) {
    const int n = config.n_values[point];
    const CovBank bank = bank_builder(n);
    const auto chunks = static_cast<std::size_t>((config.trials + kChunk - 1) / kChunk);
    std::vector<std::int64_t> map_err(chunks, 0);
    std::vector<std::int64_t> psi_err(chunks, 0);
    parallel_for(chunks, config.workers, [&](std::size_t c) {
      const std::int64_t first = static_cast<std::int64_t>(c) * kChunk;
      const int count = static_cast<int>(std::min<std::int64_t>(kChunk, config.trials - first));
      const MixtureBatch batch =
          draw_mixture_batch(config.qpsk, pulse, config.ofdm, n, config.sir_db, config.snr_db,
                             first, count, config.seed, static_cast<std::uint64_t>(n));
      const Eigen::MatrixXd energy = whitened_energies(bank, batch.y);
      for (int j = 0; j < count; ++j) {
        RVector ll = -energy.col(j);
        for (int m = 0; m < bank.K_b; ++m) ll[m] -= bank.c_yy[static_cast<std::size_t>(m)].logdet();
        const int k_map = argmax_lowest(ll);
        const int k_psi = argmin_abs_lowest(energy.col(j).array() / n - 1.0);
        const int truth = batch.k_b[static_cast<std::size_t>(j)];
        map_err[c] += k_map != truth;
        psi_err[c] += k_psi != truth;
      }
    });
    std::int64_t map_total = 0;
    std::int64_t psi_total = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      map_total += map_err[c];
      psi_total += psi_err[c];
    }
    const Proportion pm = wilson_interval(map_total, config.trials);
    const Proportion pp = wilson_interval(psi_total, config.trials);
    const OptimizedBounds ob = chernoff_opt(n, config.eps);
    curve.n_values.push_back(n);
    curve.err_prob.push_back(pm.p);
    curve.conf_lo.push_back(pm.lo);
    curve.conf_hi.push_back(pm.hi);
    curve.psi_err_prob.push_back(pp.p);
    curve.psi_conf_lo.push_back(pp.lo);
    curve.psi_conf_hi.push_back(pp.hi);
    curve.log10_b1_star.push_back(ob.log10_b1_star);
    curve.log10_b2_star.push_back(ob.log10_b2_star);
  }
  return curve;
}

}  // namespace scss
