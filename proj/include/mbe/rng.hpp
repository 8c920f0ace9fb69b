#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace mbe::rng {

// FNV-1a, used to derive named substreams from the single pipeline seed.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Every random draw in the project flows from one user seed through a named
// substream ("synth", "pca", "hmm-init", ...), so components stay
// reproducible independently of each other.
inline std::mt19937_64 substream(std::uint64_t seed, std::string_view name) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(fnv1a(name)),
                    static_cast<std::uint32_t>(fnv1a(name) >> 32)};
  return std::mt19937_64(seq);
}

// Uniform in [0, 1) from the top 53 bits. Unlike std::uniform_real_distribution
// this is pinned by the standardised mt19937_64 output, so streams are
// identical across standard libraries.
inline double uniform(std::mt19937_64& g) {
  return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Box-Muller, cosine branch only. Two engine draws per variate; portable in
// the same sense as uniform().
inline double normal(std::mt19937_64& g) {
  double u1 = 0.0;
  do {
    u1 = uniform(g);
  } while (u1 <= 0.0);
  const double u2 = uniform(g);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

// Uniform integer in [0, n), rejection-sampled to avoid modulo bias.
inline std::uint64_t below(std::mt19937_64& g, std::uint64_t n) {
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t x;
  do {
    x = g();
  } while (x >= limit);
  return x % n;
}

}  // namespace mbe::rng
