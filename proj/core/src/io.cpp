#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "scss/mixture.hpp"

namespace scss {
namespace {

constexpr char kDatasetMagic[4] = {'S', 'C', 'S', 'S'};

class LeWriter {
 public:
  explicit LeWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open for writing: " + path.string());
  }
  void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
  template <class T>
  void uint(T v) {
    unsigned char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    raw(buf, sizeof(T));
  }
  void f64(double v) { uint(std::bit_cast<std::uint64_t>(v)); }
  void samples(const std::vector<Complex>& x) {
    for (const auto& c : x) {
      f64(c.real());
      f64(c.imag());
    }
  }
  void finish() {
    out_.flush();
    if (!out_) throw std::runtime_error("write failed");
  }

 private:
  std::ofstream out_;
};

class LeReader {
 public:
  explicit LeReader(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw std::runtime_error("cannot open for reading: " + path.string());
  }
  void raw(void* p, std::size_t n) {
    in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (in_.gcount() != static_cast<std::streamsize>(n)) {
      throw FormatError("truncated file");
    }
  }
  template <class T>
  T uint() {
    unsigned char buf[sizeof(T)];
    raw(buf, sizeof(T));
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(buf[i]) << (8 * i));
    return v;
  }
  double f64() { return std::bit_cast<double>(uint<std::uint64_t>()); }
  std::vector<Complex> samples(std::size_t n) {
    std::vector<Complex> x(n);
    for (auto& c : x) {
      const double re = f64();
      c = {re, f64()};
    }
    return x;
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }
  std::uint64_t remaining() {
    const auto here = in_.tellg();
    in_.seekg(0, std::ios::end);
    const auto end = in_.tellg();
    in_.seekg(here);
    return static_cast<std::uint64_t>(end - here);
  }

 private:
  std::ifstream in_;
};

void write_header(LeWriter& w, const DatasetHeader& h) {
  if (std::isnan(h.snr_db) || std::isnan(h.sir_db)) {
    throw std::invalid_argument("SIR/SNR must not be NaN; use +inf for the noiseless case");
  }
  w.raw(kDatasetMagic, 4);
  w.uint<std::uint16_t>(h.version);
  w.uint<std::uint32_t>(h.n);
  w.uint<std::uint16_t>(h.k_s_period);
  w.uint<std::uint16_t>(h.k_b_period);
  w.uint<std::uint32_t>(h.count);
  w.f64(h.sir_db);
  w.f64(h.snr_db);
  w.uint<std::uint32_t>(h.flags);
}

DatasetHeader read_header(LeReader& r) {
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kDatasetMagic, 4) != 0) throw FormatError("bad magic, not an SCSS file");
  DatasetHeader h;
  h.version = r.uint<std::uint16_t>();
  if (h.version != kFormatVersion) {
    throw FormatError("unsupported SCSS version " + std::to_string(h.version));
  }
  h.n = r.uint<std::uint32_t>();
  h.k_s_period = r.uint<std::uint16_t>();
  h.k_b_period = r.uint<std::uint16_t>();
  h.count = r.uint<std::uint32_t>();
  h.sir_db = r.f64();
  h.snr_db = r.f64();
  h.flags = r.uint<std::uint32_t>();
  if (std::isnan(h.sir_db) || std::isnan(h.snr_db)) throw FormatError("NaN SIR/SNR in header");
  return h;
}

void write_bits(LeWriter& w, const Bits& bits) {
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(bits.size()));
  std::vector<unsigned char> packed((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) packed[i / 8] |= static_cast<unsigned char>(1U << (i % 8));
  }
  w.raw(packed.data(), packed.size());
}

Bits read_bits(LeReader& r, std::uint32_t max_bits) {
  const auto n = r.uint<std::uint32_t>();
  if (n > max_bits) throw FormatError("bit payload longer than the record allows");
  std::vector<unsigned char> packed((n + 7) / 8);
  r.raw(packed.data(), packed.size());
  Bits bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1U;
  return bits;
}

void check_length(const ComplexSignal& x, std::uint32_t n, const char* what) {
  if (x.size() != n) throw std::invalid_argument(std::string("record ") + what + " length differs from N");
}

}  // namespace

void write_dataset(const Dataset& d, const std::filesystem::path& path, std::uint32_t flags) {
  DatasetHeader h = d.header;
  h.version = kFormatVersion;
  h.count = static_cast<std::uint32_t>(d.records.size());
  h.flags = flags & (kFlagComponents | kFlagBits);
  LeWriter w(path);
  write_header(w, h);
  for (const auto& rec : d.records) {
    check_length(rec.y, h.n, "y");
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(rec.k_s));
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(rec.k_b));
    w.samples(rec.y.samples);
    if (h.flags & kFlagComponents) {
      check_length(rec.s, h.n, "s");
      check_length(rec.b, h.n, "b");
      w.samples(rec.s.samples);
      w.samples(rec.b.samples);
    }
    if (h.flags & kFlagBits) write_bits(w, rec.bits);
  }
  w.finish();
}

Dataset read_dataset(const std::filesystem::path& path) {
  LeReader r(path);
  Dataset d;
  d.header = read_header(r);
  if (d.header.flags & kFlagPrediction) throw FormatError("file holds predictions, not a dataset");
  const std::uint64_t per_record =
      4 + 16ULL * d.header.n * ((d.header.flags & kFlagComponents) ? 3 : 1);
  if (per_record * d.header.count > r.remaining()) throw FormatError("truncated file");
  d.records.resize(d.header.count);
  for (auto& rec : d.records) {
    rec.k_s = r.uint<std::uint16_t>();
    rec.k_b = r.uint<std::uint16_t>();
    if (rec.k_s >= d.header.k_s_period || rec.k_b >= d.header.k_b_period) {
      throw FormatError("record shift outside its cyclic period");
    }
    rec.y.samples = r.samples(d.header.n);
    if (d.header.flags & kFlagComponents) {
      rec.s.samples = r.samples(d.header.n);
      rec.b.samples = r.samples(d.header.n);
    }
    if (d.header.flags & kFlagBits) rec.bits = read_bits(r, 8 * d.header.n);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last record");
  return d;
}

void write_predictions(const PredictionSet& p, const std::filesystem::path& path) {
  DatasetHeader h = p.header;
  h.version = kFormatVersion;
  h.count = static_cast<std::uint32_t>(p.predictions.size());
  const bool with_signal =
      !p.predictions.empty() && !p.predictions.front().s_hat.empty();
  h.flags = kFlagPrediction | (with_signal ? kFlagPredictedSignal : 0U);
  LeWriter w(path);
  write_header(w, h);
  for (const auto& pr : p.predictions) {
    if (pr.k_b_hat && (*pr.k_b_hat < 0 || *pr.k_b_hat >= h.k_b_period)) {
      throw std::invalid_argument("predicted shift outside [0, K_b)");
    }
    w.uint<std::uint16_t>(pr.k_b_hat ? static_cast<std::uint16_t>(*pr.k_b_hat) : kNoShift);
    if (with_signal) {
      if (pr.s_hat.size() != h.n) throw std::invalid_argument("s_hat length differs from N");
      w.samples(pr.s_hat);
    }
  }
  w.finish();
}

PredictionSet read_predictions(const std::filesystem::path& path) {
  LeReader r(path);
  PredictionSet p;
  p.header = read_header(r);
  if (!(p.header.flags & kFlagPrediction)) throw FormatError("file is not a prediction file");
  const std::uint64_t per_record =
      2 + ((p.header.flags & kFlagPredictedSignal) ? 16ULL * p.header.n : 0);
  if (per_record * p.header.count > r.remaining()) throw FormatError("truncated file");
  p.predictions.resize(p.header.count);
  for (auto& pr : p.predictions) {
    const auto k = r.uint<std::uint16_t>();
    if (k != kNoShift) {
      if (k >= p.header.k_b_period) throw FormatError("predicted shift outside [0, K_b)");
      pr.k_b_hat = k;
    }
    if (p.header.flags & kFlagPredictedSignal) pr.s_hat = r.samples(p.header.n);
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last prediction");
  return p;
}

}  // namespace scss
