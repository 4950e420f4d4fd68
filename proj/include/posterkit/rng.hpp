#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic sampling helpers. std::mt19937_64 is bit-exact per the
// standard, but the standard distributions are not; everything that must
// reproduce across toolchains goes through the functions below.
namespace posterkit::rng {

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed) { return Engine(seed); }

// Uniform in [0, n). Rejection sampling keeps the draw unbiased.
inline std::uint64_t bounded(Engine& eng, std::uint64_t n) {
  if (n == 0) return 0;
  const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % n;
  std::uint64_t x;
  do {
    x = eng();
  } while (x >= limit);
  return x % n;
}

// Uniform in [0, 1) with 53 significant bits.
inline double uniform01(Engine& eng) {
  return double(eng() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1].
inline double uniform01_open_low(Engine& eng) {
  return 1.0 - uniform01(eng);
}

// Box-Muller, one value per call so draws stay position-independent.
inline double normal(Engine& eng, double mean, double stddev) {
  const double u1 = uniform01_open_low(eng);
  const double u2 = uniform01(eng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  return mean + stddev * r * std::cos(6.283185307179586476925286766559 * u2);
}

// Fisher-Yates permutation of {0, ..., n-1}.
inline std::vector<std::size_t> permutation(Engine& eng, std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = std::size_t(bounded(eng, i));
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

}  // namespace posterkit::rng
