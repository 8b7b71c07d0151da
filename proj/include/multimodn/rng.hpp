#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace mmn {

/// Seeded random stream with portable draw semantics.
///
/// std::uniform_real_distribution / std::normal_distribution are
/// implementation-defined, so the mappings from raw engine output to doubles
/// are done by hand here. Same seed, same platform-independent sequence.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller. Consumes two uniforms per pair.
  double normal();

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Fisher-Yates shuffle of an index vector.
  void shuffle(std::vector<std::size_t>& v);

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// Derives a child seed from a base seed and a stream tag (fold index, grid
/// cell index, ...) so independent runs never share a stream.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

}  // namespace mmn
