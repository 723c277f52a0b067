#pragma once

#include "pcaqs/types.hpp"

#include <cstdint>
#include <random>
#include <string_view>

namespace pcaqs {

using RngSeed = std::uint64_t;
using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace detail

/// Seed for an independent substream identified by an integer stream id.
inline RngSeed derive_seed(RngSeed master, std::uint64_t stream) {
  return detail::splitmix64(detail::splitmix64(master) ^ detail::splitmix64(stream));
}

/// Seed for an independent substream identified by a label, e.g. "svd" or a
/// group key such as "2-4-1".
inline RngSeed derive_seed(RngSeed master, std::string_view label) {
  return derive_seed(master, detail::fnv1a(label));
}

inline Rng make_rng(RngSeed seed) { return Rng{seed}; }

/// rows x cols matrix of independent standard normal draws, filled row by row.
Matrix gaussian_matrix(Index rows, Index cols, Rng& rng);

/// `count` distinct indices from [0, n), in draw order (partial Fisher-Yates).
IndexList sample_without_replacement(Index n, Index count, Rng& rng);

}  // namespace pcaqs
