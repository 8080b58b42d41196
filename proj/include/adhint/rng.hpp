#ifndef ADHINT_RNG_HPP_
#define ADHINT_RNG_HPP_

#include <cstdint>
#include <random>

namespace adhint {

// Purpose-specific stream ids. Every random draw in the project comes from
// a generator keyed by (seed, stream, a, b, c), so adding or reordering
// draws in one purpose never perturbs another.
enum class Stream : std::uint64_t {
  kTasks = 1,
  kNaive = 2,
  kHint = 3,
  kHintNoise = 4,
  kShuffle = 5,
  kEval = 6,
  kTest = 99,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t mix_key(std::uint64_t seed, Stream stream, std::uint64_t a = 0,
                                       std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t state = seed;
  std::uint64_t h = splitmix64(state);
  for (std::uint64_t word : {static_cast<std::uint64_t>(stream), a, b, c}) {
    state = h ^ word;
    h = splitmix64(state);
  }
  return h;
}

/// MT19937-64 (bit-exact across platforms by the standard) with hand-rolled
/// conversions, since std:: distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n), rejection sampled to avoid modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }

 private:
  std::mt19937_64 engine_;
};

inline Rng stream_rng(std::uint64_t seed, Stream stream, std::uint64_t a = 0, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
  return Rng(mix_key(seed, stream, a, b, c));
}

}  // namespace adhint

#endif  // ADHINT_RNG_HPP_
