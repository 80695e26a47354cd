#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace cohinfo {

/// SplitMix64: tiny splittable generator with portable, bit-reproducible
/// output. Standard-library distributions are deliberately avoided because
/// their rounding is implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform double in [0, 1).
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Derive an independent stream; deterministic in (seed, key).
  SplitMix64 split(std::uint64_t key) const {
    SplitMix64 mixer(state_ ^ (0x632BE59BD9B4E019ULL * (key + 1)));
    return SplitMix64(mixer.next_u64());
  }

 private:
  std::uint64_t state_;
};

/// Standard normal via Box-Muller (portable, unlike std::normal_distribution).
inline double next_gaussian(SplitMix64& rng) {
  double u1 = rng.next_double();
  while (u1 <= 0.0) u1 = rng.next_double();
  const double u2 = rng.next_double();
  const double two_pi = 6.283185307179586476925286766559;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Multinomial draw: n samples over the given probability vector.
/// Probabilities must be nonnegative and sum to ~1 (caller normalizes).
inline std::vector<std::int64_t> multinomial(SplitMix64& rng, std::int64_t n,
                                             const std::vector<double>& probs) {
  if (probs.empty()) throw std::invalid_argument("multinomial: empty probabilities");
  std::vector<double> cum(probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] < 0.0) throw std::invalid_argument("multinomial: negative probability");
    acc += probs[i];
    cum[i] = acc;
  }
  std::vector<std::int64_t> counts(probs.size(), 0);
  const std::size_t last = probs.size() - 1;
  for (std::int64_t k = 0; k < n; ++k) {
    const double u = rng.next_double() * acc;
    std::size_t idx = 0;
    while (idx < last && u >= cum[idx]) ++idx;
    ++counts[idx];
  }
  return counts;
}

}  // namespace cohinfo
