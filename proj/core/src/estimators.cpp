#include "scss/estimators.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace scss {
namespace {

constexpr double kNegligibleWeight = 1e-17;

void check_dim(const CovBank& bank, Eigen::Index rows) {
  if (rows != bank.L) throw std::invalid_argument("estimator: input length differs from bank L");
}

void check_shift(const CovBank& bank, int m) {
  if (m < 0 || m >= bank.K_b) throw std::out_of_range("estimator: shift out of range");
}

// c_ss * c^{-1} * y using the factor of c.
CVector conditional_estimate(const CovMatrix& c_ss, const CovMatrix& c_yy, const CVector& y) {
  return c_ss.entries() * c_yy.solve(y);
}

RVector column(const Eigen::MatrixXd& m, Eigen::Index j) { return m.col(j); }

}  // namespace

const char* to_string(Method m) {
  switch (m) {
    case Method::MFOnly: return "mf";
    case Method::LMMSE: return "lmmse";
    case Method::MMSE: return "mmse";
    case Method::MapQlmmse: return "map-qlmmse";
    case Method::PsiQlmmse: return "psi-qlmmse";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  for (Method m : {Method::MFOnly, Method::LMMSE, Method::MMSE, Method::MapQlmmse,
                   Method::PsiQlmmse}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown method: " + name);
}

ShiftPosterior posterior_from_log_likes(const RVector& log_likes) {
  if (log_likes.size() == 0) throw std::invalid_argument("posterior: no hypotheses");
  if (!log_likes.allFinite()) throw std::domain_error("posterior: non-finite log-likelihood");
  ShiftPosterior p;
  p.log_likes = log_likes;
  const double top = log_likes.maxCoeff();
  p.probs = (log_likes.array() - top).exp();
  p.probs /= p.probs.sum();
  return p;
}

int argmax_lowest(const RVector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

int argmin_abs_lowest(const RVector& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (std::abs(v[i]) < std::abs(v[best])) best = i;
  }
  return best;
}

Eigen::MatrixXd whitened_energies(const CovBank& bank, const CMatrix& Y) {
  check_dim(bank, Y.rows());
  Eigen::MatrixXd e(bank.K_b, Y.cols());
  for (int m = 0; m < bank.K_b; ++m) {
    const CMatrix u = bank.c_yy[static_cast<std::size_t>(m)].whiten(Y);
    e.row(m) = u.colwise().squaredNorm();
  }
  return e;
}

Eigen::MatrixXd log_likelihoods(const CovBank& bank, const CMatrix& Y) {
  Eigen::MatrixXd ll = -whitened_energies(bank, Y);
  for (int m = 0; m < bank.K_b; ++m) {
    ll.row(m).array() -= bank.c_yy[static_cast<std::size_t>(m)].logdet();
  }
  return ll;
}

CVector lmmse(const CVector& y, const CovBank& bank) {
  check_dim(bank, y.size());
  return bank.gain_avg * y;
}

CVector lmmse_cond(const CVector& y, int m, const CovBank& bank) {
  check_dim(bank, y.size());
  check_shift(bank, m);
  return conditional_estimate(bank.c_ss, bank.c_yy[static_cast<std::size_t>(m)], y);
}

ShiftPosterior shift_posterior(const CVector& y, const CovBank& bank) {
  return posterior_from_log_likes(column(log_likelihoods(bank, y), 0));
}

int map_sync(const ShiftPosterior& posterior) { return argmax_lowest(posterior.probs); }

int map_sync(const CVector& y, const CovBank& bank) {
  return map_sync(shift_posterior(y, bank));
}

double psi_stat(const CVector& y, int m, const CovBank& bank) {
  check_dim(bank, y.size());
  check_shift(bank, m);
  const CVector u = bank.c_yy[static_cast<std::size_t>(m)].whiten(y);
  return u.squaredNorm() / bank.L - 1.0;
}

RVector psi_stats(const CVector& y, const CovBank& bank) {
  return column(whitened_energies(bank, y), 0).array() / bank.L - 1.0;
}

int psi_sync(const CVector& y, const CovBank& bank) {
  return argmin_abs_lowest(psi_stats(y, bank));
}

SeparationResult map_qlmmse(const CVector& y, const CovBank& bank) {
  SeparationResult r;
  r.method = Method::MapQlmmse;
  r.posterior = shift_posterior(y, bank);
  r.k_b_hat = map_sync(*r.posterior);
  r.s_hat.samples = to_std(lmmse_cond(y, *r.k_b_hat, bank));
  return r;
}

SeparationResult psi_qlmmse(const CVector& y, const CovBank& bank) {
  SeparationResult r;
  r.method = Method::PsiQlmmse;
  r.k_b_hat = psi_sync(y, bank);
  r.s_hat.samples = to_std(lmmse_cond(y, *r.k_b_hat, bank));
  return r;
}

CVector posterior_mean(const CVector& y, const RVector& probs, const CovBank& bank) {
  check_dim(bank, y.size());
  if (probs.size() != bank.K_b) throw std::invalid_argument("posterior_mean: size mismatch");
  const double cut = kNegligibleWeight * probs.maxCoeff();
  CVector acc = CVector::Zero(y.size());
  for (int m = 0; m < bank.K_b; ++m) {
    if (probs[m] <= cut) continue;
    acc += probs[m] * lmmse_cond(y, m, bank);
  }
  return acc;
}

SeparationResult mmse(const CVector& y, const CovBank& bank) {
  SeparationResult r;
  r.method = Method::MMSE;
  r.posterior = shift_posterior(y, bank);
  r.k_b_hat = map_sync(*r.posterior);
  r.s_hat.samples = to_std(posterior_mean(y, r.posterior->probs, bank));
  return r;
}

SeparationResult mmse_joint(const CVector& y, std::span<const CovBank> banks_by_soi_shift) {
  if (banks_by_soi_shift.empty()) throw std::invalid_argument("mmse_joint: no banks");
  const int K_b = banks_by_soi_shift.front().K_b;
  const auto K_s = static_cast<int>(banks_by_soi_shift.size());
  RVector ll(static_cast<Eigen::Index>(K_s) * K_b);
  for (int ms = 0; ms < K_s; ++ms) {
    const auto& bank = banks_by_soi_shift[static_cast<std::size_t>(ms)];
    if (bank.K_b != K_b) throw std::invalid_argument("mmse_joint: banks disagree on K_b");
    ll.segment(static_cast<Eigen::Index>(ms) * K_b, K_b) = column(log_likelihoods(bank, y), 0);
  }
  const ShiftPosterior joint = posterior_from_log_likes(ll);
  const double cut = kNegligibleWeight * joint.probs.maxCoeff();
  CVector acc = CVector::Zero(y.size());
  RVector marginal_b = RVector::Zero(K_b);
  for (int ms = 0; ms < K_s; ++ms) {
    for (int mb = 0; mb < K_b; ++mb) {
      const double p = joint.probs[static_cast<Eigen::Index>(ms) * K_b + mb];
      marginal_b[mb] += p;
      if (p <= cut) continue;
      acc += p * lmmse_cond(y, mb, banks_by_soi_shift[static_cast<std::size_t>(ms)]);
    }
  }
  SeparationResult r;
  r.method = Method::MMSE;
  r.s_hat.samples = to_std(acc);
  r.k_b_hat = argmax_lowest(marginal_b);
  return r;
}

BatchEstimates estimate_batch(const CovBank& bank, const CMatrix& Y) {
  const Eigen::MatrixXd energy = whitened_energies(bank, Y);
  const auto B = Y.cols();
  BatchEstimates out;
  out.lmmse = bank.gain_avg * Y;
  out.mmse.resize(Y.rows(), B);
  out.map_qlmmse.resize(Y.rows(), B);
  out.psi_qlmmse.resize(Y.rows(), B);
  out.map_shift.resize(static_cast<std::size_t>(B));
  out.psi_shift.resize(static_cast<std::size_t>(B));
  for (Eigen::Index j = 0; j < B; ++j) {
    RVector ll = -energy.col(j);
    for (int m = 0; m < bank.K_b; ++m) ll[m] -= bank.c_yy[static_cast<std::size_t>(m)].logdet();
    const ShiftPosterior post = posterior_from_log_likes(ll);
    const int k_map = map_sync(post);
    const int k_psi = argmin_abs_lowest(energy.col(j).array() / bank.L - 1.0);
    out.map_shift[static_cast<std::size_t>(j)] = k_map;
    out.psi_shift[static_cast<std::size_t>(j)] = k_psi;

    const CVector y = Y.col(j);
    std::map<int, CVector> cond;
    auto cond_at = [&](int m) -> const CVector& {
      auto it = cond.find(m);
      if (it == cond.end()) it = cond.emplace(m, lmmse_cond(y, m, bank)).first;
      return it->second;
    };
    const double cut = kNegligibleWeight * post.probs.maxCoeff();
    CVector acc = CVector::Zero(Y.rows());
    for (int m = 0; m < bank.K_b; ++m) {
      if (post.probs[m] <= cut) continue;
      acc += post.probs[m] * cond_at(m);
    }
    out.mmse.col(j) = acc;
    out.map_qlmmse.col(j) = cond_at(k_map);
    out.psi_qlmmse.col(j) = cond_at(k_psi);
  }
  return out;
}

SeparationResult separate_long(const ComplexSignal& y, const CovBank& bank,
                               const LongOptions& options) {
  const auto N = static_cast<std::int64_t>(y.size());
  const int L = bank.L;
  const int sync_window = options.sync_window > 0 ? options.sync_window : L;
  if (sync_window % L != 0) throw std::invalid_argument("separate_long: sync window not a multiple of L");
  if (N < sync_window) throw std::invalid_argument("separate_long: signal shorter than sync window");
  const std::int64_t full_blocks = N / L;
  const int tail = static_cast<int>(N % L);
  if ((full_blocks > 1 || tail > 0) && L % bank.K_s != 0) {
    throw std::invalid_argument("separate_long: L must be a multiple of the SOI period");
  }

  SeparationResult r;
  r.method = options.method;
  r.s_hat.origin = "estimate";
  r.s_hat.timing = y.timing;
  if (options.method == Method::MFOnly) {
    r.s_hat.samples = y.samples;
    return r;
  }

  const auto yv = as_vector(y.samples);
  auto advance = [&](int k, std::int64_t j) {
    return static_cast<int>((k + (j * L) % bank.K_b) % bank.K_b);
  };

  const bool needs_sync = options.method != Method::LMMSE;
  RVector probs;
  int k_hat = 0;
  if (needs_sync && options.forced_shift) {
    check_shift(bank, *options.forced_shift);
    k_hat = *options.forced_shift;
    probs = RVector::Zero(bank.K_b);
    probs[k_hat] = 1.0;
    r.k_b_hat = k_hat;
  } else if (needs_sync) {
    const int n_sync = sync_window / L;
    CMatrix blocks(L, n_sync);
    for (int i = 0; i < n_sync; ++i) blocks.col(i) = yv.segment(static_cast<Eigen::Index>(i) * L, L);
    const Eigen::MatrixXd energy = whitened_energies(bank, blocks);
    RVector ll = RVector::Zero(bank.K_b);
    RVector total_energy = RVector::Zero(bank.K_b);
    for (int m = 0; m < bank.K_b; ++m) {
      for (int i = 0; i < n_sync; ++i) {
        const int mi = advance(m, i);
        ll[m] -= energy(mi, i) + bank.c_yy[static_cast<std::size_t>(mi)].logdet();
        total_energy[m] += energy(mi, i);
      }
    }
    if (options.method == Method::PsiQlmmse) {
      k_hat = argmin_abs_lowest(total_energy.array() / sync_window - 1.0);
      probs = RVector::Zero(bank.K_b);
      probs[k_hat] = 1.0;
    } else {
      ShiftPosterior post = posterior_from_log_likes(ll);
      k_hat = map_sync(post);
      probs = post.probs;
      r.posterior = std::move(post);
    }
    r.k_b_hat = k_hat;
  }

  CVector out(N);
  const double cut = needs_sync ? kNegligibleWeight * probs.maxCoeff() : 0.0;
  const std::int64_t total_blocks = full_blocks + (tail > 0 ? 1 : 0);
  for (std::int64_t j = 0; j < total_blocks; ++j) {
    const int len = j < full_blocks ? L : tail;
    const CVector block = yv.segment(j * L, len);
    const CovMatrix c_ss = len == L ? bank.c_ss : bank.c_ss.leading(len);
    auto cond = [&](int m) {
      const auto& c = bank.c_yy[static_cast<std::size_t>(m)];
      return len == L ? conditional_estimate(c_ss, c, block)
                      : conditional_estimate(c_ss, c.leading(len), block);
    };
    CVector est;
    switch (options.method) {
      case Method::LMMSE:
        est = len == L ? CVector(bank.gain_avg * block)
                       : conditional_estimate(c_ss, bank.c_yy_avg.leading(len), block);
        break;
      case Method::MapQlmmse:
      case Method::PsiQlmmse:
        est = cond(advance(k_hat, j));
        break;
      case Method::MMSE:
        est = CVector::Zero(len);
        for (int m = 0; m < bank.K_b; ++m) {
          if (probs[m] <= cut) continue;
          est += probs[m] * cond(advance(m, j));
        }
        break;
      case Method::MFOnly:
        break;
    }
    out.segment(j * L, len) = est;
  }
  r.s_hat.samples = to_std(out);
  return r;
}

}  // namespace scss
