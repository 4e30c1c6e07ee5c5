#include "ccmap/bits.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "ccmap/error.hpp"

namespace ccmap {

namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::string key_to_string(std::uint64_t key, int n) {
  std::string out(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q) {
    if ((key >> q) & 1U) out[static_cast<std::size_t>(n - 1 - q)] = '1';
  }
  return out;
}

std::string row_to_string(std::span<const std::uint64_t> words, int n) {
  std::string out(static_cast<std::size_t>(n), '0');
  for (int q = 0; q < n; ++q) {
    if ((words[static_cast<std::size_t>(q / 64)] >> (q % 64)) & 1U) {
      out[static_cast<std::size_t>(n - 1 - q)] = '1';
    }
  }
  return out;
}

std::vector<std::uint64_t> row_from_string(std::string_view text) {
  const int n = static_cast<int>(text.size());
  std::vector<std::uint64_t> words(words_for_bits(n), 0);
  for (int j = 0; j < n; ++j) {
    const char c = text[static_cast<std::size_t>(j)];
    if (c != '0' && c != '1') {
      throw ParseError("invalid bit character '" + std::string(1, c) + "' in row \"" +
                       std::string(text) + "\"");
    }
    if (c == '1') {
      const int q = n - 1 - j;
      words[static_cast<std::size_t>(q / 64)] |= std::uint64_t{1} << (q % 64);
    }
  }
  return words;
}

std::vector<int> mask_to_indices(std::uint64_t mask) {
  std::vector<int> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

std::uint64_t indices_to_mask(std::span<const int> indices) {
  std::uint64_t mask = 0;
  for (int i : indices) mask |= std::uint64_t{1} << i;
  return mask;
}

std::uint64_t binomial_saturating(int n, int k) noexcept {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  u128 acc = 1;
  for (int i = 1; i <= k; ++i) {
    acc = acc * static_cast<unsigned>(n - k + i) / static_cast<unsigned>(i);
    if (acc > kMax) return kMax;
  }
  return static_cast<std::uint64_t>(acc);
}

double binomial(int n, int k) noexcept {
  if (k < 0 || k > n) return 0.0;
  const std::uint64_t exact = binomial_saturating(n, k);
  if (exact != std::numeric_limits<std::uint64_t>::max()) return static_cast<double>(exact);
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed) noexcept {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

}  // namespace ccmap
