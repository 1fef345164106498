#pragma once

#include <cstdint>
#include <random>

namespace perfbandit {

using Rng = std::mt19937_64;

/// Purposes a run draws randomness for. Each purpose gets its own family of streams so
/// that, e.g., the net-point draws of one algorithm never perturb the samples it sees.
enum class StreamTag : std::uint64_t {
  kStepSamples = 1,
  kNetSelection = 2,
  kReferenceSample = 3,
  kAuxiliary = 4,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Counter-based stream: the generator for (seed, tag, index) is a pure function of the
/// triple. Step t of two different algorithms run with the same seed sees the same stream.
inline Rng make_stream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ static_cast<std::uint64_t>(tag));
  k = splitmix64(k ^ index);
  return Rng(k);
}

}  // namespace perfbandit
