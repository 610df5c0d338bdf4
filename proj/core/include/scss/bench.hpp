#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "scss/estimators.hpp"
#include "scss/mixture.hpp"
#include "scss/signals.hpp"

namespace scss {

struct SweepConfig {
  std::vector<double> sir_db{0.0};
  std::vector<double> snr_db{20.0};
  std::vector<int> n_values{320};
  std::vector<Method> methods;
  std::int64_t trials = 1000;
  std::uint64_t seed = 1;
  int block_len = 320;
  int sync_window = 640;
  /// BER sweeps draw at least this many reference bits per grid point.
  std::int64_t min_bits = 200000;
  QpskSpec qpsk;
  OfdmSpec ofdm;
  double epsilon_scale = kDefaultEpsilonScale;
  int workers = 1;  // never written to outputs

  /// Throws std::invalid_argument for an empty grid, trials < 1 or bad lengths.
  void validate() const;
};

struct SweepRow {
  double sir_db = 0.0;
  double snr_db = 0.0;
  int n = 0;
  std::string method;
  std::string metric;
  double value = 0.0;
  double std_err = 0.0;
  std::int64_t trials = 0;
};

struct SweepResult {
  /// Written as '#'-prefixed key=value lines above the header row.
  std::vector<std::pair<std::string, std::string>> provenance;
  std::vector<SweepRow> rows;

  /// First row matching all three keys; nullptr when absent.
  const SweepRow* find(double sir_db, const std::string& method, const std::string& metric,
                       std::optional<int> n = std::nullopt) const;
};

/// Per grid point, mean ||s_hat - s||^2 / N ("mse") for each method plus the
/// synchronizer error rate ("sync_error") for the plug-in methods.
/// Defaults to Gaussian alphabets; methods default to lmmse, map-qlmmse,
/// psi-qlmmse, mmse.
SweepResult run_mse_sweep(const SweepConfig& config);

/// BER of the full demodulation chain on N = n_values[0] sample mixtures,
/// blocks of block_len, one synchronization over sync_window. Methods
/// default to mf, lmmse, map-qlmmse.
SweepResult run_ber_sweep(const SweepConfig& config);

/// Per N: mse_mmse, mse_map_qlmmse, ratio (delta-method stderr), regret
/// E||s_mmse - s_q||^2 / N and identity_residual, the paired mean of
/// (e_q - e_mmse - regret).
SweepResult run_theorem1_check(const SweepConfig& config);

struct SyncEvalConfig {
  std::vector<int> n_values;  // empty: the full record length
  std::vector<Method> methods{Method::MapQlmmse, Method::PsiQlmmse};
  double epsilon_scale = kDefaultEpsilonScale;
  int workers = 1;
};

/// Scores shift estimates against the dataset labels: accuracy, error_rate
/// and mean_abs_offset (circular distance). Internal synchronizers run on
/// the first n samples of each record; an external prediction set is scored
/// as method "external", plus "mse" when it carries separated signals and
/// the dataset stores components. Throws std::invalid_argument on a count or
/// header mismatch.
SweepResult run_sync_eval(const SyncEvalConfig& config, const Dataset& data,
                          const PredictionSet* predictions = nullptr);

/// CSV with provenance comments, header row
/// sir_db,snr_db,n,method,metric,value,stderr,trials.
void write_csv(const SweepResult& result, std::ostream& out);

/// SIR (dB) at which log10(metric) crosses log10(target), by linear
/// interpolation between the first bracketing pair of grid points in
/// ascending SIR. Zero values are floored at `floor`. nullopt if the curve
/// never crosses.
std::optional<double> sir_at_level(const SweepResult& result, const std::string& method,
                                   const std::string& metric, double target, double floor);

}  // namespace scss
