#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ccmap {

// Bit convention used throughout: integer key bit q holds variable (qubit) q.
// Text rendering is MSB-first, so the leftmost character is variable n-1 and a
// rendered row read as a binary number equals its key.

inline int popcount(std::uint64_t x) noexcept { return std::popcount(x); }

/// (-1)^{popcount(a & b)} as +1/-1.
inline int parity_sign(std::uint64_t a, std::uint64_t b) noexcept {
  return (std::popcount(a & b) & 1) ? -1 : 1;
}

/// Parity of the AND of two multi-word rows of equal length.
inline int parity_sign(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b) noexcept {
  int acc = 0;
  for (std::size_t w = 0; w < a.size(); ++w) acc ^= std::popcount(a[w] & b[w]) & 1;
  return acc ? -1 : 1;
}

inline std::size_t words_for_bits(int n) noexcept {
  return static_cast<std::size_t>((n + 63) / 64);
}

inline std::uint64_t low_mask(int n) noexcept {
  return n >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << n) - 1);
}

/// Renders the low n bits of key MSB-first.
std::string key_to_string(std::uint64_t key, int n);

/// Renders a multi-word row MSB-first.
std::string row_to_string(std::span<const std::uint64_t> words, int n);

/// Parses an MSB-first '0'/'1' string into a multi-word row; throws ParseError.
std::vector<std::uint64_t> row_from_string(std::string_view text);

/// Sorted index list of the set bits in mask.
std::vector<int> mask_to_indices(std::uint64_t mask);

std::uint64_t indices_to_mask(std::span<const int> indices);

/// Binomial coefficient saturating at UINT64_MAX.
std::uint64_t binomial_saturating(int n, int k) noexcept;

/// Binomial coefficient as a double (exact up to 2^53, correctly rounded beyond).
double binomial(int n, int k) noexcept;

/// SplitMix64 finaliser; used to expand one user seed into independent streams.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// FNV-1a 64-bit hash over bytes; used for checksums and config hashes.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL) noexcept;

std::string hex64(std::uint64_t value);

}  // namespace ccmap
