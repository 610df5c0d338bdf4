#include "scss/demod.hpp"

#include <cmath>
#include <stdexcept>

namespace scss {

std::vector<Complex> matched_filter(const ComplexSignal& x, const PulseShape& pulse) {
  const std::int64_t n = static_cast<std::int64_t>(x.size());
  SymbolTiming timing;
  if (x.timing) {
    timing = *x.timing;
  } else {
    // Bare full-convolution output of pulse_shape.
    timing.samples_per_symbol = pulse.oversampling;
    timing.first_peak = pulse.group_delay();
    const std::int64_t span = n - pulse.length() + 1;
    timing.num_symbols = span > 0 ? (span - 1) / pulse.oversampling + 1 : 0;
  }
  if (timing.num_symbols < 1) throw std::invalid_argument("matched_filter: window too short");
  const std::int64_t gd = pulse.group_delay();
  const double gain = 1.0 / timing.symbol_amplitude;
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(timing.num_symbols));
  for (std::int64_t i = 0; i < timing.num_symbols; ++i) {
    const std::int64_t peak = timing.first_peak + i * timing.samples_per_symbol;
    if (peak - gd < 0 || peak - gd + pulse.length() > n) {
      throw std::invalid_argument("matched_filter: window too short");
    }
    Complex acc{};
    const Complex* base = x.samples.data() + (peak - gd);
    for (std::size_t k = 0; k < pulse.taps.size(); ++k) acc += pulse.taps[k] * base[k];
    out.push_back(acc * gain);
  }
  return out;
}

Bits hard_decision(const std::vector<Complex>& symbols, Alphabet alphabet) {
  Bits bits;
  switch (alphabet) {
    case Alphabet::QPSK:
      bits.reserve(2 * symbols.size());
      for (const auto& z : symbols) {
        bits.push_back(z.real() < 0.0);
        bits.push_back(z.imag() < 0.0);
      }
      break;
    case Alphabet::QAM16: {
      bits.reserve(4 * symbols.size());
      const double scale = std::sqrt(10.0);
      auto axis = [&](double v) {
        v *= scale;
        bits.push_back(v < 0.0);
        bits.push_back(std::abs(v) < 2.0);
      };
      for (const auto& z : symbols) {
        axis(z.real());
        axis(z.imag());
      }
      break;
    }
    case Alphabet::GaussianIID:
      throw std::invalid_argument("hard_decision: Gaussian alphabet has no bits");
  }
  return bits;
}

DemodResult demodulate(const ComplexSignal& x, const PulseShape& pulse, Alphabet alphabet) {
  DemodResult r;
  r.symbols = matched_filter(x, pulse);
  r.bits = hard_decision(r.symbols, alphabet);
  r.delay_used = pulse.group_delay();
  return r;
}

double ber(const Bits& bits, const Bits& ref_bits) {
  if (bits.size() != ref_bits.size()) throw std::invalid_argument("ber: length mismatch");
  if (bits.empty()) return 0.0;
  std::size_t errors = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) errors += (bits[i] != 0) != (ref_bits[i] != 0);
  return static_cast<double>(errors) / static_cast<double>(bits.size());
}

double qfunc(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

double qpsk_awgn_ber(double ebn0_db) {
  return qfunc(std::sqrt(2.0 * std::pow(10.0, ebn0_db / 10.0)));
}

}  // namespace scss
