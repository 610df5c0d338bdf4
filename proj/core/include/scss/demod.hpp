#pragma once

#include <vector>

#include "scss/signals.hpp"
#include "scss/types.hpp"

namespace scss {

struct DemodResult {
  std::vector<Complex> symbols;
  Bits bits;
  int delay_used = 0;
};

/// Correlates with the (real, symmetric) taps and samples at the symbol
/// instants recorded in the signal's timing; outputs are divided by the
/// per-symbol amplitude so they sit on the unit-power constellation.
/// Throws std::invalid_argument when no symbol fits in the window.
std::vector<Complex> matched_filter(const ComplexSignal& x, const PulseShape& pulse);

/// Nearest constellation point, Gray demapped, in-phase bits first. Ties go
/// to the lexicographically smallest bit pattern.
Bits hard_decision(const std::vector<Complex>& symbols, Alphabet alphabet);

DemodResult demodulate(const ComplexSignal& x, const PulseShape& pulse, Alphabet alphabet);

/// Hamming distance / length. Throws std::invalid_argument on length mismatch.
double ber(const Bits& bits, const Bits& ref_bits);

/// Gaussian tail probability Q(x).
double qfunc(double x);

/// Gray-coded QPSK bit error rate over AWGN, Q(sqrt(2 Eb/N0)).
double qpsk_awgn_ber(double ebn0_db);

}  // namespace scss
