#pragma once

#include <cstdint>
#include <vector>

#include "scss/rng.hpp"
#include "scss/types.hpp"

namespace scss {

enum class Alphabet { QPSK, QAM16, GaussianIID };

const char* to_string(Alphabet a);
Alphabet alphabet_from_string(const std::string& name);

/// Bits carried per symbol; 0 for the Gaussian surrogate.
int bits_per_symbol(Alphabet a);

struct PulseShape {
  std::vector<double> taps;
  int oversampling = 1;
  int span_symbols = 1;

  int length() const { return static_cast<int>(taps.size()); }
  int group_delay() const { return span_symbols * oversampling / 2; }
};

struct QpskSpec {
  double rolloff = 0.5;
  int span_symbols = 8;
  int oversampling = 16;
  Alphabet alphabet = Alphabet::QPSK;

  int period() const { return oversampling; }
};

struct OfdmSpec {
  int fft_size = 64;
  int cp_len = 16;
  Alphabet alphabet = Alphabet::QAM16;

  int symbol_length() const { return fft_size + cp_len; }
  int period() const { return symbol_length(); }
};

/// Root-raised-cosine taps, unit energy, length span*oversampling + 1.
/// Throws std::domain_error for rolloff outside (0, 1].
PulseShape rrc_taps(double rolloff, int span_symbols, int oversampling);

struct SymbolDraw {
  std::vector<Complex> symbols;
  Bits bits;  // bits_per_symbol(alphabet) per symbol, in-phase bits first
};

/// i.i.d. unit-power symbols. QPSK and 16-QAM are Gray mapped.
SymbolDraw gen_symbols_with_bits(Alphabet alphabet, std::int64_t count, Rng& rng);
std::vector<Complex> gen_symbols(Alphabet alphabet, std::int64_t count, Rng& rng);

/// Maps bits to constellation points (Gray); inverse of hard decisions.
std::vector<Complex> map_bits(Alphabet alphabet, const Bits& bits);

/// Zero-stuff by the oversampling factor and convolve with the taps (full
/// convolution). Output length = n*L + taps - 1.
ComplexSignal pulse_shape(const std::vector<Complex>& symbols, const PulseShape& pulse);

/// CP-OFDM with unitary IDFT, concatenated symbols.
ComplexSignal gen_ofdm(const OfdmSpec& spec, std::int64_t num_symbols, Rng& rng);

/// A steady-state window of the pulse-shaped SOI whose first sample sits at
/// cyclic phase `shift` (0 <= shift < oversampling). Scaled to unit average
/// power. `bits` holds only the symbols counted by `timing`.
struct SoiWindow {
  ComplexSignal signal;
  Bits bits;
  std::vector<Complex> counted_symbols;
};
SoiWindow gen_soi_window(const QpskSpec& spec, const PulseShape& pulse, std::int64_t n,
                         int shift, Rng& rng);

/// Timing of the SOI symbols that are fully supported inside a window of
/// length n at the given phase.
SymbolTiming soi_timing(const PulseShape& pulse, std::int64_t n, int shift);

/// Offset of the steady-state region inside the full pulse_shape output.
inline std::int64_t soi_warmup(const PulseShape& pulse) { return pulse.length() - 1; }

}  // namespace scss
