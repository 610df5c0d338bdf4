#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "scss/rng.hpp"
#include "scss/signals.hpp"
#include "scss/types.hpp"

namespace scss {

enum class ShiftMode { FixedZero, Uniform, Fixed };

struct MixtureParams {
  std::int64_t n_samples = 320;
  double sir_db = 0.0;
  double snr_db = 20.0;  // kInf for the noiseless case
  ShiftMode k_s_mode = ShiftMode::FixedZero;
  ShiftMode k_b_mode = ShiftMode::Uniform;
  int k_s_fixed = 0;  // used when k_s_mode == Fixed
  int k_b_fixed = 0;  // used when k_b_mode == Fixed
  int K_s = 16;
  int K_b = 80;
};

/// One labelled realization. Shifts are 0-based phases within the cyclic
/// period: window sample n is process sample n + k.
struct MixtureRecord {
  ComplexSignal y;
  ComplexSignal s;
  ComplexSignal b;
  ComplexSignal w;  // kept only when requested (debug reconstruction)
  int k_s = 0;
  int k_b = 0;
  Bits bits;
};

inline constexpr std::uint32_t kFlagComponents = 1U << 0;
inline constexpr std::uint32_t kFlagBits = 1U << 1;
inline constexpr std::uint32_t kFlagPrediction = 1U << 2;
inline constexpr std::uint32_t kFlagPredictedSignal = 1U << 3;
inline constexpr std::uint16_t kFormatVersion = 1;
inline constexpr std::uint16_t kNoShift = 0xFFFF;

struct DatasetHeader {
  std::uint16_t version = kFormatVersion;
  std::uint32_t n = 0;
  std::uint16_t k_s_period = 0;
  std::uint16_t k_b_period = 0;
  std::uint32_t count = 0;
  double sir_db = 0.0;
  double snr_db = 0.0;
  std::uint32_t flags = 0;

  bool operator==(const DatasetHeader&) const = default;
};

struct Dataset {
  DatasetHeader header;
  std::vector<MixtureRecord> records;
};

/// x[k .. k+n_out-1]. Throws std::length_error if x is too short.
ComplexSignal apply_shift(const ComplexSignal& x, std::int64_t k, std::int64_t n_out);

/// y = s + 10^(-sir/20) b + 10^(-snr/20) w; snr = +inf drops the noise term.
ComplexSignal mix(const ComplexSignal& s, const ComplexSignal& b, const ComplexSignal& w,
                  double sir_db, double snr_db);

/// White CN(0, 1) samples.
ComplexSignal white_noise(std::int64_t n, Rng& rng);

/// Window of the OFDM interference at phase `shift` of its period.
ComplexSignal interference_window(const OfdmSpec& spec, std::int64_t n, int shift, Rng& rng);

/// Draws one record from a stream; keep_noise retains w for reconstruction checks.
MixtureRecord gen_record(const QpskSpec& qpsk, const PulseShape& pulse, const OfdmSpec& ofdm,
                         const MixtureParams& params, Rng& rng, bool keep_noise = false);

/// Record i is drawn from the stream derive_seed(master_seed, i), so output is
/// identical for any worker count.
Dataset gen_dataset(const QpskSpec& qpsk, const OfdmSpec& ofdm, const MixtureParams& params,
                    std::int64_t count, std::uint64_t master_seed, int workers = 1);

/// Monte-Carlo helper: `count` windows of length n as matrix columns, with
/// k_s = 0 and uniform k_b. Column c uses stream derive_seed(seed, first + c, tag).
struct MixtureBatch {
  CMatrix y;
  CMatrix s;
  std::vector<int> k_b;
};
MixtureBatch draw_mixture_batch(const QpskSpec& qpsk, const PulseShape& pulse,
                                const OfdmSpec& ofdm, int n, double sir_db, double snr_db,
                                std::int64_t first, int count, std::uint64_t seed,
                                std::uint64_t tag);

/// flags selects which optional payloads are written (kFlagComponents, kFlagBits).
void write_dataset(const Dataset& d, const std::filesystem::path& path, std::uint32_t flags);
Dataset read_dataset(const std::filesystem::path& path);

/// Output of an external synchronizer or separator, one entry per record.
struct Prediction {
  std::optional<int> k_b_hat;
  std::vector<Complex> s_hat;  // empty when the file carries shifts only
};

struct PredictionSet {
  DatasetHeader header;
  std::vector<Prediction> predictions;
};

void write_predictions(const PredictionSet& p, const std::filesystem::path& path);
PredictionSet read_predictions(const std::filesystem::path& path);

}  // namespace scss
