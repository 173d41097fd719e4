// ctfkit/random.hpp
//
// Portable random streams. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; the distributions are implemented here
// because the std:: ones are implementation-defined.
//
// Stream splitting: substream(seed, stream, index) seeds the engine with
//   k = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index)
// so draw #index of a given stream never depends on other draws or on the
// order in which they are produced.

#pragma once

#include <cstdint>
#include <random>

namespace ctfkit {

std::uint64_t splitmix64(std::uint64_t x);

class Rng
{
public:
  explicit Rng(std::uint64_t key) : m_engine(key) {}

  static Rng substream(std::uint64_t seed, std::uint64_t stream,
                       std::uint64_t index);

  std::uint64_t next_u64() { return m_engine(); }
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, one value per call).
  double normal();
  /// Poisson deviate. Multiplication method below mean 10, PTRS
  /// (Hormann 1993) above.
  std::uint64_t poisson(double mean);

private:
  std::mt19937_64 m_engine;
};

/// Stream identifiers for the substreams used across the library.
namespace streams {
inline constexpr std::uint64_t target = 1;
inline constexpr std::uint64_t jitter = 2;
inline constexpr std::uint64_t passband = 3;
inline constexpr std::uint64_t dose = 4;
inline constexpr std::uint64_t phantom = 5;
} // namespace streams

} // namespace ctfkit
