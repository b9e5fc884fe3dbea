#pragma once

// Counter-based pseudo-random numbers: every draw is a pure function of
// (seed, index). Sample i of a stream never depends on how many samples were
// requested, so enlarging a sample set extends the same stream instead of
// reshuffling it.

#include <cstdint>
#include <cmath>

#include "hblab/linalg.hpp"

namespace hblab {

inline std::uint64_t mix_bits(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// i-th output of the splitmix64 sequence started at `seed`.
inline std::uint64_t random_bits(std::uint64_t seed, std::uint64_t index) {
  return mix_bits(seed + (index + 1) * 0x9E3779B97F4A7C15ull);
}

/// Decorrelated sub-seed for an independent stream.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return mix_bits(seed ^ (0xD1342543DE82EF95ull * (tag + 1)));
}

/// Uniform double in [0, 1).
inline double uniform01(std::uint64_t seed, std::uint64_t index) {
  return static_cast<double>(random_bits(seed, index) >> 11) * 0x1.0p-53;
}

/// Standard normal; consecutive indices share a Box-Muller pair.
inline double gaussian(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t pair = index >> 1;
  double u1 = 1.0 - uniform01(seed, 2 * pair);  // in (0, 1]
  double u2 = uniform01(seed, 2 * pair + 1);
  double r = std::sqrt(-2.0 * std::log(u1));
  double t = 6.283185307179586476925286766559 * u2;
  return (index & 1) ? r * std::sin(t) : r * std::cos(t);
}

/// Random orthogonal matrix from a seed: QR of a Gaussian matrix with the
/// R-diagonal sign fixed, so the map seed -> Q is deterministic.
inline Mat orthogonal_from_seed(std::size_t dim, std::uint64_t seed) {
  std::uint64_t s = derive_stream(seed, 0x0f0f);
  Mat g(dim, dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) g(i, j) = gaussian(s, i * dim + j);

  // Gram-Schmidt with one re-orthogonalization pass; dim <= 64 so this is
  // plenty stable.
  Mat q(dim, dim);
  for (std::size_t j = 0; j < dim; ++j) {
    Vec v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = g(i, j);
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        double proj = 0.0;
        for (std::size_t i = 0; i < dim; ++i) proj += q(i, k) * v[i];
        for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * q(i, k);
      }
    }
    double nv = norm(v);
    if (nv == 0.0) {  // astronomically unlikely; fall back to a unit vector
      v.assign(dim, 0.0);
      v[j] = 1.0;
      nv = 1.0;
    }
    double sign = g(j, j) >= 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < dim; ++i) q(i, j) = v[i] / nv * sign;
  }
  return q;
}

}  // namespace hblab
