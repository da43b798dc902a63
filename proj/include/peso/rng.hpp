// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>

#include "peso/matrix.hpp"

namespace peso::rng {

// Counter-based generation: every value is a pure function of
// (seed, stream, index), so concurrent or re-ordered evaluation cannot change
// a trace. splitmix64 finalizer as the mixing core.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline std::uint64_t word(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return mix64(mix64(seed ^ mix64(stream)) ^ index);
}

/// Uniform in the open interval (0,1).
inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  return (static_cast<double>(word(seed, stream, index) >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal via Box–Muller on two counter-derived uniforms.
inline double normal(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  const double u1 = uniform01(seed, stream, 2 * index);
  const double u2 = uniform01(seed, stream, 2 * index + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
}

inline linalg::Matrix gaussian_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                      std::uint64_t stream, double stddev = 1.0) {
  linalg::Matrix m(rows, cols);
  for (std::size_t i = 0; i < m.size(); ++i) m.values()[i] = stddev * normal(seed, stream, i);
  return m;
}

}  // namespace peso::rng
