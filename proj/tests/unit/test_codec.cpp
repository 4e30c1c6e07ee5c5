#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "ccmap/codec.hpp"
#include "ccmap/error.hpp"

using namespace ccmap;

TEST(Codec, LowerEdgeIsAllZeros) {
  for (int n : {1, 3, 6, 12}) EXPECT_EQ(encode_value(-2.0, {-2.0, 5.0}, n), std::string(static_cast<std::size_t>(n), '0'));
}

TEST(Codec, UpperEdgeClampsToAllOnes) {
  for (int n : {1, 3, 6, 12}) EXPECT_EQ(encode_value(5.0, {-2.0, 5.0}, n), std::string(static_cast<std::size_t>(n), '1'));
}

TEST(Codec, HandExample) {
  // floor(4 * 0.6) + 1 = 3, so k - 1 = 2 -> "10".
  EXPECT_EQ(encode_value(0.6, {0.0, 1.0}, 2), "10");
}

TEST(Codec, DecodeBinCenters) {
  const double centers[] = {0.125, 0.375, 0.625, 0.875};
  const char* words[] = {"00", "01", "10", "11"};
  for (int k = 0; k < 4; ++k) EXPECT_DOUBLE_EQ(decode_bits(words[k], {0.0, 1.0}), centers[k]);
}

TEST(Codec, RoundTripWithinHalfBin) {
  std::mt19937_64 rng(11);
  const Interval r{-3.0, 7.5};
  std::uniform_real_distribution<double> u(r.lo, r.hi);
  const double half = (r.hi - r.lo) / 64.0 / 2.0;
  for (int i = 0; i < 10000; ++i) {
    const double v = u(rng);
    EXPECT_LE(std::abs(decode_bits(encode_value(v, r, 6), r) - v), half + 1e-15);
  }
}

TEST(Codec, BinCentersAreABijection) {
  const Interval r{0.0, 2.0};
  std::set<std::string> seen;
  for (int k = 0; k < 64; ++k) {
    const double c = r.lo + (k + 0.5) * (r.hi - r.lo) / 64.0;
    const auto w = encode_value(c, r, 6);
    seen.insert(w);
    EXPECT_EQ(decode_bits(w, r), c);
  }
  EXPECT_EQ(seen.size(), 64u);
}

TEST(Codec, Monotone) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    double a = u(rng), b = u(rng);
    if (a > b) std::swap(a, b);
    EXPECT_LE(quantize_index(a, {0.0, 1.0}, 6), quantize_index(b, {0.0, 1.0}, 6));
  }
}

TEST(Codec, OutOfRangeIsClampedAndCounted) {
  reset_codec_clamp_count();
  EXPECT_EQ(encode_value(-10.0, {0.0, 1.0}, 3), "000");
  EXPECT_EQ(encode_value(10.0, {0.0, 1.0}, 3), "111");
  EXPECT_EQ(codec_clamp_count(), 2u);
  EXPECT_THROW(encode_value(std::nan(""), {0.0, 1.0}, 3), DataError);
}

TEST(Codec, SampleIsEighteenBitsAndRoundTrips) {
  QuantizerSpec spec{6, {{-1.0, 1.0}, {0.0, 10.0}, {5.0, 6.0}}};
  const std::vector<double> p{0.3, 7.7, 5.01};
  const auto w = encode_sample(p, spec);
  EXPECT_EQ(w.size(), 18u);
  // x occupies the leading characters.
  EXPECT_EQ(w.substr(0, 6), encode_value(0.3, spec.ranges[0], 6));
  const auto back = decode_sample(w, spec);
  for (int c = 0; c < 3; ++c) EXPECT_LE(std::abs(back[static_cast<std::size_t>(c)] - p[static_cast<std::size_t>(c)]), spec.bin_width(c) / 2 + 1e-15);
}

TEST(Codec, DecodeEncodeIsIdempotentOnTheGrid) {
  QuantizerSpec spec{6, {{-1.0, 1.0}, {0.0, 10.0}, {5.0, 6.0}}};
  std::mt19937_64 rng(3);
  for (int i = 0; i < 500; ++i) {
    std::string w;
    for (int b = 0; b < 18; ++b) w += (rng() & 1) ? '1' : '0';
    const auto once = decode_sample(w, spec);
    EXPECT_EQ(encode_sample(once, spec), w);
    EXPECT_EQ(decode_sample(encode_sample(once, spec), spec), once);
  }
}

TEST(Codec, ShapeErrors) {
  QuantizerSpec spec{6, {{-1.0, 1.0}, {0.0, 10.0}, {5.0, 6.0}}};
  EXPECT_THROW(decode_sample("0101", spec), DataError);
  QuantizerSpec bad{0, {{0.0, 1.0}}};
  EXPECT_THROW(bad.validate(), ConfigError);
  QuantizerSpec inverted{4, {{1.0, 0.0}}};
  EXPECT_THROW(inverted.validate(), ConfigError);
}

TEST(Codec, SpecJsonRoundTrip) {
  QuantizerSpec spec{6, {{-1.0, 1.0}, {0.0, 10.0}, {5.0, 6.0}}};
  const auto back = QuantizerSpec::from_json(spec.to_json());
  EXPECT_EQ(back.bits, 6);
  ASSERT_EQ(back.ranges.size(), 3u);
  EXPECT_EQ(back.ranges[1].hi, 10.0);
}

TEST(Codec, DatasetLevel) {
  QuantizerSpec spec{6, {{0.0, 1.0}, {0.0, 1.0}, {0.0, 1.0}}};
  FloatDataset f;
  f.samples = {{0.1, 0.2, 0.3}, {0.9, 0.8, 0.7}};
  const auto bits = encode_dataset(f, spec);
  EXPECT_EQ(bits.width(), 18);
  const auto back = decode_dataset(bits, spec);
  ASSERT_EQ(back.samples.size(), 2u);
  EXPECT_NEAR(back.samples[1][2], 0.7, 1.0 / 128.0);
}
