#pragma once

#include <bit>
#include <cstddef>
#include <span>

namespace ccmap {

/// In-place unnormalised fast Walsh-Hadamard transform:
///   out[s] = sum_x (-1)^{popcount(s & x)} in[x].
/// The length must be a power of two. Works for any additive value type
/// (double, std::complex<double>).
template <typename T>
void fwht_inplace(std::span<T> values) {
  const std::size_t size = values.size();
  for (std::size_t half = 1; half < size; half <<= 1) {
    for (std::size_t block = 0; block < size; block += half << 1) {
      for (std::size_t j = block; j < block + half; ++j) {
        const T a = values[j];
        const T b = values[j + half];
        values[j] = a + b;
        values[j + half] = a - b;
      }
    }
  }
}

inline bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

}  // namespace ccmap
