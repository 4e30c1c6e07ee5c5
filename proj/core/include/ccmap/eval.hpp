#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ccmap {

/// 2D real field, row-major.
struct FieldSnapshot {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> grid;

  double at(std::size_t r, std::size_t c) const { return grid[r * width + c]; }
  /// Throws DataError on a size mismatch or non-finite entries.
  void validate() const;
};

struct MetricValue {
  double value = 0.0;
  bool degenerate = false;  // range or bandwidth collapsed; value reported as 0
};

inline constexpr int kDefaultPdfBins = 50;
inline constexpr double kHistogramEps = 1e-12;
inline constexpr std::size_t kFeatureEvalSize = 200;

/// Pools pixels per side, histograms over the joint range, smooths by eps, JS in bits.
MetricValue pdf_js(std::span<const FieldSnapshot> real, std::span<const FieldSnapshot> gen, int bins = kDefaultPdfBins);

struct EncoderSpec {
  std::array<int, 3> channels{8, 16, 32};
  int kernel = 3;
  int stride = 2;
};

/// Three valid-padding conv + ReLU blocks with stride 2, then a per-channel spatial mean.
/// Weights are N(0, 1/fan_in) from the seed; biases are zero.
class RandomConvEncoder {
 public:
  explicit RandomConvEncoder(std::uint64_t seed, EncoderSpec spec = {});

  std::vector<double> encode(const FieldSnapshot& f) const;
  std::size_t feature_dim() const noexcept { return static_cast<std::size_t>(spec_.channels.back()); }
  /// Smallest side length that survives the three reductions.
  std::size_t min_side() const noexcept;
  std::uint64_t seed() const noexcept { return seed_; }
  const EncoderSpec& spec() const noexcept { return spec_; }
  std::string config_json() const;

 private:
  std::uint64_t seed_;
  EncoderSpec spec_;
  std::vector<std::vector<double>> weights_;  // per layer: [out][in][k][k]
};

/// Biased MMD^2 with a Gaussian kernel whose sigma is the median pooled pairwise distance.
MetricValue feature_mmd(std::span<const std::vector<double>> real, std::span<const std::vector<double>> gen);

/// Encodes up to `eval_size` snapshots per side (seeded subsample when larger) and compares features.
MetricValue feature_mmd(std::span<const FieldSnapshot> real, std::span<const FieldSnapshot> gen,
                        const RandomConvEncoder& encoder, std::size_t eval_size = kFeatureEvalSize,
                        std::uint64_t subsample_seed = 0);

/// CSV grid (one row per line) or packed binary: "CCFIELD1", uint32 channels, height, width,
/// then channel-major little-endian doubles. Multi-channel files yield the last (Z) channel.
FieldSnapshot load_field(const std::filesystem::path& path);
void save_field_csv(const FieldSnapshot& f, const std::filesystem::path& path);
void save_field_binary(const FieldSnapshot& f, const std::filesystem::path& path);

/// All .csv / .bin snapshots in a directory, sorted by file name.
std::vector<FieldSnapshot> load_field_dir(const std::filesystem::path& dir);

}  // namespace ccmap
