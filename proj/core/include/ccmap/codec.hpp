#pragma once

#include <array>
#include <span>
#include <cstdint>
#include <string>
#include <vector>

#include "ccmap/datasets.hpp"

namespace ccmap {

/// Closed interval [lo, hi] with hi > lo.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// Uniform quantiser: `bits` bits per coordinate over per-coordinate ranges.
/// Index k(v) = floor(2^N (v - a)/(b - a)) + 1 in {1..2^N}; the bitstring is k - 1 MSB-first,
/// so the lowest bin is all zeros and the highest all ones. Decoding returns bin centres.
struct QuantizerSpec {
  int bits = 6;
  std::vector<Interval> ranges;  // one per coordinate, in concatenation order

  int coords() const noexcept { return static_cast<int>(ranges.size()); }
  int total_bits() const noexcept { return bits * coords(); }
  double bin_width(int coord) const;

  /// Throws ConfigError on N < 1 or an empty/inverted range.
  void validate() const;

  std::string to_json() const;
  static QuantizerSpec from_json(const std::string& text);
};

/// Counts inputs that fell outside their declared range and were clamped.
/// Shared across threads.
std::uint64_t codec_clamp_count() noexcept;
void reset_codec_clamp_count() noexcept;

/// Bin index in [0, 2^N - 1] (that is, k(v) - 1) after clamping v into [a, b].
std::uint64_t quantize_index(double v, Interval range, int bits);

/// MSB-first N-bit encoding of one value.
std::string encode_value(double v, Interval range, int bits);

/// Bin centre a + (k - 0.5) * delta for an N-bit MSB-first string.
double decode_bits(std::string_view bits, Interval range);

/// Concatenated encoding x || y || z as an integer key (first coordinate in the high bits).
std::uint64_t encode_sample_key(std::span<const double> point, const QuantizerSpec& spec);
std::string encode_sample(std::span<const double> point, const QuantizerSpec& spec);

/// Inverse of encode_sample; throws DataError when the width is not coords * N.
std::vector<double> decode_sample(std::string_view bits, const QuantizerSpec& spec);
std::vector<double> decode_sample_key(std::uint64_t key, const QuantizerSpec& spec);

BitDataset encode_dataset(const FloatDataset& d, const QuantizerSpec& spec);
FloatDataset decode_dataset(const BitDataset& d, const QuantizerSpec& spec);

}  // namespace ccmap
