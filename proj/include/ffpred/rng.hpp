#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ffpred {

// All randomness flows through these helpers so that a fixed seed gives the
// same byte stream on every platform; the std distributions are
// implementation-defined and are avoided.

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  // 53 random mantissa bits -> [0,1)
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

inline std::int64_t uniform_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  // inclusive range; modulo bias is irrelevant for the range sizes used here
  std::uint64_t span = static_cast<std::uint64_t>(hi - lo + 1);
  return lo + static_cast<std::int64_t>(rng() % span);
}

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(v[i - 1], v[j]);
  }
}

inline std::vector<std::size_t> shuffled_indices(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  shuffle_in_place(idx, rng);
  return idx;
}

}  // namespace ffpred
