#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scss/covariance.hpp"
#include "scss/types.hpp"

namespace scss {

enum class Method { MFOnly, LMMSE, MMSE, MapQlmmse, PsiQlmmse };

const char* to_string(Method m);
Method method_from_string(const std::string& name);

/// Posterior over the K_b interference shifts under a uniform prior.
struct ShiftPosterior {
  RVector probs;
  RVector log_likes;  // unnormalized Gaussian log-likelihoods
};

/// Max-shifted exponential normalization of log-likelihoods.
ShiftPosterior posterior_from_log_likes(const RVector& log_likes);

struct SeparationResult {
  ComplexSignal s_hat;
  std::optional<int> k_b_hat;
  std::optional<ShiftPosterior> posterior;
  Method method = Method::LMMSE;
};

// Index helpers; ties resolve to the lowest index everywhere.
int argmax_lowest(const RVector& v);
int argmin_abs_lowest(const RVector& v);

/// ||Gamma_m^{-1} y||^2 for every shift m (rows) and column of Y (cols).
Eigen::MatrixXd whitened_energies(const CovBank& bank, const CMatrix& Y);

/// -y^H c_yy(m)^{-1} y - logdet c_yy(m), per shift and column.
Eigen::MatrixXd log_likelihoods(const CovBank& bank, const CMatrix& Y);

/// Unconditional LMMSE with the shift-averaged mixture covariance.
CVector lmmse(const CVector& y, const CovBank& bank);

/// c_ss c_yy(m)^{-1} y. Throws std::out_of_range for a bad shift.
CVector lmmse_cond(const CVector& y, int m, const CovBank& bank);

ShiftPosterior shift_posterior(const CVector& y, const CovBank& bank);

int map_sync(const ShiftPosterior& posterior);
int map_sync(const CVector& y, const CovBank& bank);

/// (1/L) ||Gamma_m^{-1} y||^2 - 1.
double psi_stat(const CVector& y, int m, const CovBank& bank);
RVector psi_stats(const CVector& y, const CovBank& bank);
int psi_sync(const CVector& y, const CovBank& bank);

SeparationResult map_qlmmse(const CVector& y, const CovBank& bank);
SeparationResult psi_qlmmse(const CVector& y, const CovBank& bank);

/// Posterior-weighted sum of conditional LMMSE estimates. Terms whose
/// weight is below 1e-17 of the largest are skipped.
CVector posterior_mean(const CVector& y, const RVector& probs, const CovBank& bank);
SeparationResult mmse(const CVector& y, const CovBank& bank);

/// General double sum over (k_s, k_b) with uniform priors; banks[m_s] must
/// hold c_ss(m_s). Not used by the experiment harness, which fixes k_s = 0.
SeparationResult mmse_joint(const CVector& y, std::span<const CovBank> banks_by_soi_shift);

/// All estimators of the family for each column of Y, sharing the
/// per-shift quadratic forms.
struct BatchEstimates {
  CMatrix lmmse;
  CMatrix mmse;
  CMatrix map_qlmmse;
  CMatrix psi_qlmmse;
  std::vector<int> map_shift;
  std::vector<int> psi_shift;
};
BatchEstimates estimate_batch(const CovBank& bank, const CMatrix& Y);

struct LongOptions {
  Method method = Method::MapQlmmse;
  int sync_window = 0;  // 0 means one block
  std::optional<int> forced_shift;  // bypass synchronization
};

/// Block processing of a long mixture: one synchronization over the first
/// sync_window samples, then each length-L block j is separated with the
/// shift advanced to (k + j L) mod K_b. A trailing partial block uses the
/// leading principal sub-blocks of the covariances.
SeparationResult separate_long(const ComplexSignal& y, const CovBank& bank,
                               const LongOptions& options);

}  // namespace scss
