#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scss/mixture.hpp"
#include "scss/signals.hpp"
#include "scss/types.hpp"

namespace scss {

inline constexpr double kDefaultEpsilonScale = 1e-9;
inline constexpr int kMaxRegularizationDoublings = 8;

/// Hermitian covariance with a cached lower Cholesky factor of the
/// regularized matrix entries + epsilon * I.
class CovMatrix {
 public:
  CovMatrix() = default;
  /// Symmetrizes (C + C^H) / 2; does not factorize.
  explicit CovMatrix(const CMatrix& entries);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const CMatrix& entries() const { return entries_; }
  CMatrix regularized() const;

  /// epsilon = scale * trace(C)/L (scale alone for a zero matrix), doubled on
  /// failure up to kMaxRegularizationDoublings times.
  void factorize(double epsilon_scale = kDefaultEpsilonScale);
  bool factorized() const { return chol_.size() > 0; }
  const CMatrix& chol() const;
  double logdet() const;
  double epsilon() const { return epsilon_; }

  /// Gamma^{-1} y for every column of y.
  CMatrix whiten(const CMatrix& y) const;
  /// (C + eps I)^{-1} y.
  CMatrix solve(const CMatrix& y) const;

  /// Leading r x r principal block; its factor is the leading block of ours.
  CovMatrix leading(int r) const;

 private:
  CMatrix entries_;
  CMatrix chol_;
  double epsilon_ = 0.0;
  double logdet_ = 0.0;
};

/// Per-shift conditional statistics with k_s fixed at zero.
struct CovBank {
  int L = 0;
  int K_b = 0;
  int K_s = 1;  // SOI period; block advance requires L % K_s == 0
  double sir_db = 0.0;
  double snr_db = kInf;
  double epsilon_scale = kDefaultEpsilonScale;
  CovMatrix c_ss;
  std::vector<CovMatrix> c_vv;
  std::vector<CovMatrix> c_yy;
  CovMatrix c_yy_avg;
  /// c_ss * c_yy_avg^{-1}, the unconditional Wiener gain.
  CMatrix gain_avg;
};

/// (1/count) sum x x^H over the columns, symmetrized and factorized.
/// Throws std::invalid_argument when there are no samples.
CovMatrix empirical_cov(const CMatrix& aligned_samples,
                        double epsilon_scale = kDefaultEpsilonScale);
CovMatrix empirical_cov(const std::vector<CVector>& aligned_samples,
                        double epsilon_scale = kDefaultEpsilonScale);

/// Exact covariance of a length-L window at SOI phase k_s under Gaussian
/// symbols: G G^H with G the shifted, scaled pulses touching the window.
CovMatrix analytic_cov_soi(const QpskSpec& spec, int L, int k_s);

/// Exact covariance of a length-L window at OFDM phase k_b: 1 where both
/// samples come from the same OFDM symbol and the same IDFT output index.
CovMatrix analytic_cov_ofdm(const OfdmSpec& spec, int L, int k_b);

/// c_vv(m) = rho_SIR^-1 c_bb(m) + rho_SNR^-1 I, c_yy(m) = c_ss + c_vv(m),
/// every c_yy factorized. Throws FactorizationError if any factorization fails.
CovBank build_bank(const CMatrix& c_ss, const std::vector<CMatrix>& c_bb, double sir_db,
                   double snr_db, int soi_period = 1,
                   double epsilon_scale = kDefaultEpsilonScale, int workers = 1);

/// Bank from the waveform models.
CovBank build_analytic_bank(const QpskSpec& qpsk, const OfdmSpec& ofdm, int L, double sir_db,
                            double snr_db, double epsilon_scale = kDefaultEpsilonScale,
                            int workers = 1);

/// Bank estimated from stored components, grouping length-L blocks by their
/// true shift labels. Requires kFlagComponents data with k_s = 0.
CovBank estimate_bank(const Dataset& d, int L, double sir_db, double snr_db,
                      double epsilon_scale = kDefaultEpsilonScale, int workers = 1);

/// Bank restricted to the first r samples of each block.
CovBank crop_bank(const CovBank& bank, int r);

/// u = Gamma^{-1} y. Throws std::logic_error if c is not factorized.
CVector whiten(const CVector& y, const CovMatrix& c);

/// Binary "SCOV" cache: c_ss and every c_vv(m); factorized again on load.
void write_bank(const CovBank& bank, const std::filesystem::path& path);
CovBank read_bank(const std::filesystem::path& path, int workers = 1);

}  // namespace scss
