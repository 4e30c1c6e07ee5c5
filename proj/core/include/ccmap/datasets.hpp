#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ccmap {

/// M samples of n-bit strings, stored as packed 64-bit words (stride words per row).
/// Invariants: n >= 1, M >= 1, unused high bits of the last word are zero.
class BitDataset {
 public:
  /// words.size() must be a multiple of words_for_bits(n); throws DataError otherwise.
  BitDataset(int n, std::vector<std::uint64_t> words);

  /// Convenience for n <= 64: one key per sample.
  static BitDataset from_keys(int n, std::span<const std::uint64_t> keys);
  /// Parses MSB-first '0'/'1' rows; all rows must share one width.
  static BitDataset from_strings(std::span<const std::string> rows);

  int width() const noexcept { return n_; }
  std::size_t size() const noexcept { return words_.size() / stride_; }
  std::size_t stride() const noexcept { return stride_; }

  std::span<const std::uint64_t> row(std::size_t i) const noexcept {
    return {words_.data() + i * stride_, stride_};
  }
  /// Requires width() <= 64.
  std::uint64_t key(std::size_t i) const;
  bool bit(std::size_t i, int q) const noexcept {
    return (words_[i * stride_ + static_cast<std::size_t>(q / 64)] >> (q % 64)) & 1U;
  }
  std::string row_string(std::size_t i) const;
  std::vector<std::uint64_t> keys() const;
  std::span<const std::uint64_t> words() const noexcept { return words_; }

  /// Same width, rows taken in the given index order.
  BitDataset select(std::span<const std::size_t> indices) const;

  /// Applies a variable relabelling: output variable perm[q] takes input variable q.
  BitDataset permute_bits(std::span<const int> perm) const;

  friend bool operator==(const BitDataset&, const BitDataset&) = default;

 private:
  int n_;
  std::size_t stride_;
  std::vector<std::uint64_t> words_;
};

/// Empirical (or analytic) probability mass function over n-bit strings.
/// Dense (2^n doubles) when n <= kDenseLimit, otherwise a sparse map keyed by row bytes.
class EmpiricalPmf {
 public:
  static constexpr int kDenseLimit = 24;

  /// Analytic pmf from 2^n masses. Masses must be >= 0 and sum to 1 within 1e-12.
  static EmpiricalPmf from_dense(int n, std::vector<double> mass);

  int width() const noexcept { return n_; }
  bool dense() const noexcept { return n_ <= kDenseLimit; }
  /// Number of samples the pmf was estimated from; 0 for analytic pmfs.
  std::size_t sample_count() const noexcept { return sample_count_; }

  /// Dense masses indexed by key; throws CapacityError when sparse.
  std::span<const double> dense_mass() const;
  /// Mass of one key (n <= 64).
  double mass(std::uint64_t key) const;
  std::size_t support_size() const noexcept;

  /// Calls fn(row words, mass) for every atom with positive mass.
  void for_each_atom(const std::function<void(std::span<const std::uint64_t>, double)>& fn) const;

 private:
  friend EmpiricalPmf empirical_pmf(const BitDataset& d);
  EmpiricalPmf() = default;

  int n_ = 0;
  std::size_t sample_count_ = 0;
  std::vector<double> dense_;
  std::unordered_map<std::string, double> sparse_;  // key: raw bytes of row words
};

EmpiricalPmf empirical_pmf(const BitDataset& d);

/// Deterministic i.i.d. fair bits.
BitDataset iid_uniform(int n, std::size_t samples, std::uint64_t seed);

/// (x, y, z) real triplets with per-coordinate bounds.
struct FloatDataset {
  std::vector<std::array<double, 3>> samples;
  std::array<std::array<double, 2>, 3> ranges{};

  /// Bounds spanning the observed data (min, max per coordinate).
  static std::array<std::array<double, 2>, 3> empirical_ranges(
      std::span<const std::array<double, 3>> samples);
};

enum class BitFormat { text_lines, packed_binary, csv };

BitFormat parse_bit_format(std::string_view name);
std::string to_string(BitFormat f);
/// Picks a format from the file extension: .bin/.bitsb -> packed, .csv -> csv, otherwise text.
BitFormat format_from_extension(const std::filesystem::path& path);

BitDataset load_bit_dataset(const std::filesystem::path& path, BitFormat format);
void save_bit_dataset(const BitDataset& d, const std::filesystem::path& path, BitFormat format);

/// Checksum over width and packed rows.
std::string dataset_checksum(const BitDataset& d);

/// JSON manifest: {n, M, source, format, checksum}.
std::string dataset_manifest_json(const BitDataset& d, const std::filesystem::path& source,
                                  BitFormat format);

FloatDataset load_float_csv(const std::filesystem::path& path);
void save_float_csv(const FloatDataset& d, const std::filesystem::path& path);

}  // namespace ccmap
