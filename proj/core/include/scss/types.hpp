#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace scss {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Amplitude coefficient 10^(-dB/20) applied to a unit-power component.
/// +inf dB maps to exactly zero.
inline double db_to_amplitude(double db) {
  if (db == kInf) return 0.0;
  return std::pow(10.0, -db / 20.0);
}

/// Power coefficient 10^(-dB/10), i.e. rho^-1.
inline double db_to_inv_power(double db) {
  if (db == kInf) return 0.0;
  return std::pow(10.0, -db / 10.0);
}

/// Symbol timing carried alongside pulse-shaped signals so the demodulator can
/// find symbol instants without re-deriving filter delays.
struct SymbolTiming {
  int samples_per_symbol = 1;
  int group_delay = 0;
  /// Window index of the first counted symbol's pulse peak.
  std::int64_t first_peak = 0;
  /// Number of symbols whose full pulse support lies inside the window.
  std::int64_t num_symbols = 0;
  /// Scale applied to unit-power symbols before shaping.
  double symbol_amplitude = 1.0;
};

struct ComplexSignal {
  std::vector<Complex> samples;
  std::string origin;
  std::optional<SymbolTiming> timing;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  const Complex& operator[](std::size_t i) const { return samples[i]; }
  Complex& operator[](std::size_t i) { return samples[i]; }
};

using Bits = std::vector<std::uint8_t>;

/// Mean |x[n]|^2; zero for an empty signal.
double average_power(const std::vector<Complex>& x);

inline Eigen::Map<const CVector> as_vector(const std::vector<Complex>& x) {
  return {x.data(), static_cast<Eigen::Index>(x.size())};
}

inline std::vector<Complex> to_std(const CVector& v) {
  return {v.data(), v.data() + v.size()};
}

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace scss
