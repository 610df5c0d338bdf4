#include "scss/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace scss {

double average_power(const std::vector<Complex>& x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& v : x) acc += std::norm(v);
  return acc / static_cast<double>(x.size());
}

double uniform01(Rng& rng) {
  // 53 random mantissa bits; identical across standard libraries, unlike
  // std::uniform_real_distribution.
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

int uniform_index(Rng& rng, int n) {
  if (n < 1) throw std::invalid_argument("uniform_index: empty range");
  // Lemire's multiply-shift with rejection on 32-bit draws.
  const auto range = static_cast<std::uint64_t>(static_cast<std::uint32_t>(n));
  const std::uint64_t threshold = (std::uint64_t{1} << 32) % range;
  while (true) {
    const std::uint64_t m = (rng() >> 32) * range;
    if ((m & 0xFFFFFFFFULL) >= threshold) return static_cast<int>(m >> 32);
  }
}

Complex complex_normal(Rng& rng) {
  // Box-Muller: one pair of uniforms gives both quadratures.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double r = std::sqrt(-std::log(u1));  // variance 1/2 per component
  const double theta = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace scss
