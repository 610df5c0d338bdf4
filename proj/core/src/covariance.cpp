#include "scss/covariance.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "scss/parallel.hpp"

namespace scss {
namespace {

double diag_logdet(const CMatrix& lower) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < lower.rows(); ++i) acc += std::log(lower(i, i).real());
  return 2.0 * acc;
}

CMatrix sample_cov(const CMatrix& x) {
  if (x.cols() == 0 || x.rows() == 0) throw std::invalid_argument("empirical_cov: no samples");
  CMatrix c = (x * x.adjoint()) / static_cast<double>(x.cols());
  return c;
}

}  // namespace

CovMatrix::CovMatrix(const CMatrix& entries) {
  if (entries.rows() != entries.cols()) throw std::invalid_argument("CovMatrix: not square");
  entries_ = 0.5 * (entries + entries.adjoint());
}

CMatrix CovMatrix::regularized() const {
  CMatrix r = entries_;
  r.diagonal().array() += epsilon_;
  return r;
}

void CovMatrix::factorize(double epsilon_scale) {
  const int n = dim();
  if (n == 0) throw std::logic_error("CovMatrix::factorize: empty matrix");
  const double mean_diag = entries_.diagonal().real().sum() / n;
  double eps = epsilon_scale * (mean_diag > 0.0 ? mean_diag : 1.0);
  for (int attempt = 0; attempt <= kMaxRegularizationDoublings; ++attempt, eps *= 2.0) {
    CMatrix a = entries_;
    a.diagonal().array() += eps;
    Eigen::LLT<CMatrix> llt(a);
    if (llt.info() != Eigen::Success) continue;
    CMatrix lower = llt.matrixL();
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
      const double d = lower(i, i).real();
      ok = std::isfinite(d) && d > 0.0;
    }
    if (!ok) continue;
    chol_ = std::move(lower);
    epsilon_ = eps;
    logdet_ = diag_logdet(chol_);
    return;
  }
  throw FactorizationError("Cholesky failed after maximum regularization");
}

const CMatrix& CovMatrix::chol() const {
  if (!factorized()) throw std::logic_error("CovMatrix: not factorized");
  return chol_;
}

double CovMatrix::logdet() const {
  if (!factorized()) throw std::logic_error("CovMatrix: not factorized");
  return logdet_;
}

CMatrix CovMatrix::whiten(const CMatrix& y) const {
  if (y.rows() != dim()) throw std::invalid_argument("whiten: dimension mismatch");
  return chol().triangularView<Eigen::Lower>().solve(y);
}

CMatrix CovMatrix::solve(const CMatrix& y) const {
  CMatrix u = whiten(y);
  chol_.triangularView<Eigen::Lower>().adjoint().solveInPlace(u);
  return u;
}

CovMatrix CovMatrix::leading(int r) const {
  if (r < 1 || r > dim()) throw std::out_of_range("CovMatrix::leading: bad size");
  CovMatrix out;
  out.entries_ = entries_.topLeftCorner(r, r);
  if (factorized()) {
    out.chol_ = chol_.topLeftCorner(r, r);
    out.epsilon_ = epsilon_;
    out.logdet_ = diag_logdet(out.chol_);
  }
  return out;
}

CovMatrix empirical_cov(const CMatrix& aligned_samples, double epsilon_scale) {
  CovMatrix c(sample_cov(aligned_samples));
  c.factorize(epsilon_scale);
  return c;
}

CovMatrix empirical_cov(const std::vector<CVector>& aligned_samples, double epsilon_scale) {
  if (aligned_samples.empty()) throw std::invalid_argument("empirical_cov: no samples");
  const auto L = aligned_samples.front().size();
  CMatrix x(L, static_cast<Eigen::Index>(aligned_samples.size()));
  for (std::size_t i = 0; i < aligned_samples.size(); ++i) {
    if (aligned_samples[i].size() != L) throw std::invalid_argument("empirical_cov: ragged samples");
    x.col(static_cast<Eigen::Index>(i)) = aligned_samples[i];
  }
  return empirical_cov(x, epsilon_scale);
}

CovMatrix analytic_cov_soi(const QpskSpec& spec, int L, int k_s) {
  if (L < 1) throw std::invalid_argument("analytic_cov_soi: L must be >= 1");
  const PulseShape pulse = rrc_taps(spec.rolloff, spec.span_symbols, spec.oversampling);
  const std::int64_t os = spec.oversampling;
  const std::int64_t len = pulse.length();
  const std::int64_t phase = ((k_s % os) + os) % os;
  // Same steady-state placement as gen_soi_window.
  const std::int64_t start = soi_warmup(pulse) + phase;
  const std::int64_t j_lo = std::max<std::int64_t>(0, (start - len + 1 + os - 1) / os);
  const std::int64_t j_hi = (start + L - 1) / os;
  const double amp = std::sqrt(static_cast<double>(os));
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(L, j_hi - j_lo + 1);
  for (std::int64_t j = j_lo; j <= j_hi; ++j) {
    for (std::int64_t n = 0; n < L; ++n) {
      const std::int64_t tap = start + n - j * os;
      if (tap >= 0 && tap < len) {
        g(n, j - j_lo) = amp * pulse.taps[static_cast<std::size_t>(tap)];
      }
    }
  }
  return CovMatrix(CMatrix((g * g.transpose()).cast<Complex>()));
}

CovMatrix analytic_cov_ofdm(const OfdmSpec& spec, int L, int k_b) {
  if (L < 1) throw std::invalid_argument("analytic_cov_ofdm: L must be >= 1");
  const int p = spec.symbol_length();
  const int m = spec.fft_size;
  const int cp = spec.cp_len;
  const int phase = ((k_b % p) + p) % p;
  std::vector<int> symbol(static_cast<std::size_t>(L));
  std::vector<int> index(static_cast<std::size_t>(L));
  for (int n = 0; n < L; ++n) {
    const int t = n + phase;
    const int pos = t % p;
    symbol[static_cast<std::size_t>(n)] = t / p;
    index[static_cast<std::size_t>(n)] = pos < cp ? m - cp + pos : pos - cp;
  }
  CMatrix c = CMatrix::Zero(L, L);
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j < L; ++j) {
      if (symbol[static_cast<std::size_t>(i)] == symbol[static_cast<std::size_t>(j)] &&
          index[static_cast<std::size_t>(i)] == index[static_cast<std::size_t>(j)]) {
        c(i, j) = 1.0;
      }
    }
  }
  return CovMatrix(c);
}

namespace {

CovBank assemble_bank(const CMatrix& c_ss, std::vector<CMatrix> c_vv, double sir_db,
                      double snr_db, int soi_period, double epsilon_scale, int workers) {
  if (c_vv.empty()) throw std::invalid_argument("build_bank: no interference covariances");
  const auto L = c_ss.rows();
  if (c_ss.cols() != L) throw std::invalid_argument("build_bank: c_ss not square");
  for (const auto& c : c_vv) {
    if (c.rows() != L || c.cols() != L) throw std::invalid_argument("build_bank: size mismatch");
  }
  CovBank bank;
  bank.L = static_cast<int>(L);
  bank.K_b = static_cast<int>(c_vv.size());
  bank.K_s = soi_period;
  bank.sir_db = sir_db;
  bank.snr_db = snr_db;
  bank.epsilon_scale = epsilon_scale;
  bank.c_ss = CovMatrix(c_ss);
  bank.c_vv.resize(c_vv.size());
  bank.c_yy.resize(c_vv.size());
  parallel_for(c_vv.size(), workers, [&](std::size_t m) {
    bank.c_vv[m] = CovMatrix(c_vv[m]);
    bank.c_yy[m] = CovMatrix(bank.c_ss.entries() + bank.c_vv[m].entries());
    bank.c_yy[m].factorize(epsilon_scale);
  });

  CMatrix avg = CMatrix::Zero(L, L);
  for (const auto& c : bank.c_yy) avg += c.entries();
  avg /= static_cast<double>(bank.K_b);
  bank.c_yy_avg = CovMatrix(avg);
  bank.c_yy_avg.factorize(epsilon_scale);
  // c_ss C^{-1} = (C^{-1} c_ss)^H for Hermitian c_ss and C.
  bank.gain_avg = bank.c_yy_avg.solve(bank.c_ss.entries()).adjoint();
  return bank;
}

}  // namespace

CovBank build_bank(const CMatrix& c_ss, const std::vector<CMatrix>& c_bb, double sir_db,
                   double snr_db, int soi_period, double epsilon_scale, int workers) {
  const double inv_sir = db_to_inv_power(sir_db);
  const double inv_snr = db_to_inv_power(snr_db);
  std::vector<CMatrix> c_vv;
  c_vv.reserve(c_bb.size());
  for (const auto& c : c_bb) {
    CMatrix vv = inv_sir * c;
    vv.diagonal().array() += inv_snr;
    c_vv.push_back(std::move(vv));
  }
  return assemble_bank(c_ss, std::move(c_vv), sir_db, snr_db, soi_period, epsilon_scale,
                       workers);
}

CovBank build_analytic_bank(const QpskSpec& qpsk, const OfdmSpec& ofdm, int L, double sir_db,
                            double snr_db, double epsilon_scale, int workers) {
  const CMatrix c_ss = analytic_cov_soi(qpsk, L, 0).entries();
  std::vector<CMatrix> c_bb(static_cast<std::size_t>(ofdm.period()));
  for (int m = 0; m < ofdm.period(); ++m) {
    c_bb[static_cast<std::size_t>(m)] = analytic_cov_ofdm(ofdm, L, m).entries();
  }
  return build_bank(c_ss, c_bb, sir_db, snr_db, qpsk.period(), epsilon_scale, workers);
}

CovBank estimate_bank(const Dataset& d, int L, double sir_db, double snr_db,
                      double epsilon_scale, int workers) {
  if (!(d.header.flags & kFlagComponents)) {
    throw std::invalid_argument("estimate_bank: dataset lacks stored components");
  }
  if (L < 1 || static_cast<std::uint32_t>(L) > d.header.n) {
    throw std::invalid_argument("estimate_bank: block length exceeds record length");
  }
  const int K_s = d.header.k_s_period;
  const int K_b = d.header.k_b_period;
  const int blocks = static_cast<int>(d.header.n) / L;
  std::vector<CVector> soi_cols;
  std::vector<std::vector<CVector>> bb_cols(static_cast<std::size_t>(K_b));
  for (const auto& rec : d.records) {
    for (int j = 0; j < blocks; ++j) {
      const auto off = static_cast<std::size_t>(j) * static_cast<std::size_t>(L);
      if ((rec.k_s + j * L) % K_s == 0) {
        soi_cols.emplace_back(as_vector(rec.s.samples).segment(static_cast<Eigen::Index>(off), L));
      }
      const int m = (rec.k_b + j * L) % K_b;
      bb_cols[static_cast<std::size_t>(m)].emplace_back(
          as_vector(rec.b.samples).segment(static_cast<Eigen::Index>(off), L));
    }
  }
  // Raw sample averages; the bank regularizes the assembled c_yy only.
  auto average = [L](const std::vector<CVector>& cols) {
    CMatrix c = CMatrix::Zero(L, L);
    for (const auto& x : cols) c.selfadjointView<Eigen::Lower>().rankUpdate(x);
    c.triangularView<Eigen::StrictlyUpper>() = c.adjoint();
    return CMatrix(c / static_cast<double>(cols.size()));
  };
  if (soi_cols.empty()) throw std::invalid_argument("estimate_bank: no SOI blocks at phase 0");
  const CMatrix c_ss = average(soi_cols);
  std::vector<CMatrix> c_bb(static_cast<std::size_t>(K_b));
  for (int m = 0; m < K_b; ++m) {
    if (bb_cols[static_cast<std::size_t>(m)].empty()) {
      throw std::invalid_argument("estimate_bank: no samples for shift " + std::to_string(m));
    }
    c_bb[static_cast<std::size_t>(m)] = average(bb_cols[static_cast<std::size_t>(m)]);
  }
  return build_bank(c_ss, c_bb, sir_db, snr_db, K_s, epsilon_scale, workers);
}

CovBank crop_bank(const CovBank& bank, int r) {
  if (r == bank.L) return bank;
  CovBank out;
  out.L = r;
  out.K_b = bank.K_b;
  out.K_s = bank.K_s;
  out.sir_db = bank.sir_db;
  out.snr_db = bank.snr_db;
  out.epsilon_scale = bank.epsilon_scale;
  out.c_ss = bank.c_ss.leading(r);
  for (const auto& c : bank.c_vv) out.c_vv.push_back(c.leading(r));
  for (const auto& c : bank.c_yy) out.c_yy.push_back(c.leading(r));
  out.c_yy_avg = bank.c_yy_avg.leading(r);
  out.gain_avg = out.c_yy_avg.solve(out.c_ss.entries()).adjoint();
  return out;
}

CVector whiten(const CVector& y, const CovMatrix& c) {
  return c.whiten(y);
}

namespace {

constexpr char kBankMagic[4] = {'S', 'C', 'O', 'V'};

void put_u(std::ofstream& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFFU));
}

std::uint64_t get_u(std::ifstream& in, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw FormatError("truncated SCOV file");
    v |= static_cast<std::uint64_t>(c) << (8 * i);
  }
  return v;
}

void put_matrix(std::ofstream& out, const CMatrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_u(out, std::bit_cast<std::uint64_t>(m(i, j).real()), 8);
      put_u(out, std::bit_cast<std::uint64_t>(m(i, j).imag()), 8);
    }
  }
}

CMatrix get_matrix(std::ifstream& in, int n) {
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double re = std::bit_cast<double>(get_u(in, 8));
      const double im = std::bit_cast<double>(get_u(in, 8));
      m(i, j) = {re, im};
    }
  }
  return m;
}

}  // namespace

void write_bank(const CovBank& bank, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  out.write(kBankMagic, 4);
  put_u(out, kFormatVersion, 2);
  put_u(out, static_cast<std::uint64_t>(bank.L), 4);
  put_u(out, static_cast<std::uint64_t>(bank.K_b), 2);
  put_u(out, static_cast<std::uint64_t>(bank.K_s), 2);
  put_u(out, std::bit_cast<std::uint64_t>(bank.sir_db), 8);
  put_u(out, std::bit_cast<std::uint64_t>(bank.snr_db), 8);
  put_u(out, std::bit_cast<std::uint64_t>(bank.epsilon_scale), 8);
  put_matrix(out, bank.c_ss.entries());
  for (const auto& c : bank.c_vv) put_matrix(out, c.entries());
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

CovBank read_bank(const std::filesystem::path& path, int workers) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (in.gcount() != 4 || std::memcmp(magic, kBankMagic, 4) != 0) {
    throw FormatError("bad magic, not an SCOV file");
  }
  if (get_u(in, 2) != kFormatVersion) throw FormatError("unsupported SCOV version");
  const auto L = static_cast<int>(get_u(in, 4));
  const auto K_b = static_cast<int>(get_u(in, 2));
  const auto K_s = static_cast<int>(get_u(in, 2));
  const double sir = std::bit_cast<double>(get_u(in, 8));
  const double snr = std::bit_cast<double>(get_u(in, 8));
  const double eps = std::bit_cast<double>(get_u(in, 8));
  if (L < 1 || K_b < 1 || K_s < 1) throw FormatError("SCOV header has empty dimensions");
  if (!(eps >= 0.0)) throw FormatError("SCOV header has a bad regularization scale");
  const auto here = in.tellg();
  in.seekg(0, std::ios::end);
  const auto left = static_cast<std::uint64_t>(in.tellg() - here);
  in.seekg(here);
  const std::uint64_t payload = 16ULL * static_cast<std::uint64_t>(L) * static_cast<std::uint64_t>(L) *
                                (static_cast<std::uint64_t>(K_b) + 1);
  if (left < payload) throw FormatError("truncated SCOV file");
  const CMatrix c_ss = get_matrix(in, L);
  std::vector<CMatrix> c_vv(static_cast<std::size_t>(K_b));
  for (auto& c : c_vv) c = get_matrix(in, L);
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in SCOV file");
  return assemble_bank(c_ss, std::move(c_vv), sir, snr, K_s, eps, workers);
}

}  // namespace scss
