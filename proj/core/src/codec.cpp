#include "ccmap/codec.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

namespace {

std::atomic<std::uint64_t> g_clamped{0};

void check_bits(int bits) {
  if (bits < 1 || bits > 62) throw ConfigError("bits per coordinate must be in [1, 62]");
}

std::uint64_t parse_bits(std::string_view bits) {
  std::uint64_t k = 0;
  for (char c : bits) {
    if (c != '0' && c != '1') throw ParseError("invalid bit character in \"" + std::string(bits) + "\"");
    k = (k << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return k;
}

}  // namespace

double QuantizerSpec::bin_width(int coord) const {
  const auto& r = ranges.at(static_cast<std::size_t>(coord));
  return (r.hi - r.lo) / std::ldexp(1.0, bits);
}

void QuantizerSpec::validate() const {
  check_bits(bits);
  if (ranges.empty()) throw ConfigError("quantizer needs at least one coordinate");
  if (total_bits() > 64) throw ConfigError("quantizer total width exceeds 64 bits");
  for (const auto& r : ranges) {
    if (!(r.hi > r.lo) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw ConfigError("quantizer range must satisfy b > a");
    }
  }
}

std::string QuantizerSpec::to_json() const {
  nlohmann::ordered_json j;
  j["bits_per_coord"] = bits;
  j["coords"] = coords();
  j["total_bits"] = total_bits();
  j["ranges"] = nlohmann::json::array();
  for (const auto& r : ranges) j["ranges"].push_back({r.lo, r.hi});
  j["index_convention"] = "k-1, msb-first";
  j["decode"] = "bin-center";
  return j.dump(2);
}

QuantizerSpec QuantizerSpec::from_json(const std::string& text) {
  QuantizerSpec s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.bits = j.at("bits_per_coord").get<int>();
    for (const auto& r : j.at("ranges")) s.ranges.push_back({r.at(0).get<double>(), r.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid quantizer spec: ") + e.what());
  }
  s.validate();
  return s;
}

std::uint64_t codec_clamp_count() noexcept { return g_clamped.load(std::memory_order_relaxed); }
void reset_codec_clamp_count() noexcept { g_clamped.store(0, std::memory_order_relaxed); }

std::uint64_t quantize_index(double v, Interval range, int bits) {
  check_bits(bits);
  if (!std::isfinite(v)) throw DataError("cannot quantize a non-finite value");
  if (v < range.lo || v > range.hi) {
    g_clamped.fetch_add(1, std::memory_order_relaxed);
    v = std::clamp(v, range.lo, range.hi);
  }
  const double levels = std::ldexp(1.0, bits);
  const double scaled = std::floor(levels * (v - range.lo) / (range.hi - range.lo));
  const std::uint64_t top = (std::uint64_t{1} << bits) - 1;
  if (scaled <= 0.0) return 0;
  // v == b lands one past the last bin; clamp to the top index.
  return std::min(static_cast<std::uint64_t>(scaled), top);
}

std::string encode_value(double v, Interval range, int bits) {
  return key_to_string(quantize_index(v, range, bits), bits);
}

double decode_bits(std::string_view bits, Interval range) {
  const int n = static_cast<int>(bits.size());
  check_bits(n);
  const std::uint64_t k = parse_bits(bits) + 1;
  const double delta = (range.hi - range.lo) / std::ldexp(1.0, n);
  return range.lo + (static_cast<double>(k) - 0.5) * delta;
}

std::uint64_t encode_sample_key(std::span<const double> point, const QuantizerSpec& spec) {
  if (static_cast<int>(point.size()) != spec.coords()) {
    throw DataError("sample has " + std::to_string(point.size()) + " coordinates, spec expects " +
                    std::to_string(spec.coords()));
  }
  std::uint64_t key = 0;
  for (int c = 0; c < spec.coords(); ++c) {
    key = (key << spec.bits) |
          quantize_index(point[static_cast<std::size_t>(c)], spec.ranges[static_cast<std::size_t>(c)], spec.bits);
  }
  return key;
}

std::string encode_sample(std::span<const double> point, const QuantizerSpec& spec) {
  return key_to_string(encode_sample_key(point, spec), spec.total_bits());
}

std::vector<double> decode_sample_key(std::uint64_t key, const QuantizerSpec& spec) {
  std::vector<double> out(static_cast<std::size_t>(spec.coords()));
  const std::uint64_t mask = low_mask(spec.bits);
  for (int c = spec.coords() - 1; c >= 0; --c) {
    const auto& r = spec.ranges[static_cast<std::size_t>(c)];
    const double delta = (r.hi - r.lo) / std::ldexp(1.0, spec.bits);
    out[static_cast<std::size_t>(c)] = r.lo + (static_cast<double>(key & mask) + 0.5) * delta;
    key >>= spec.bits;
  }
  return out;
}

std::vector<double> decode_sample(std::string_view bits, const QuantizerSpec& spec) {
  if (spec.coords() == 0 || bits.size() % static_cast<std::size_t>(spec.coords()) != 0 ||
      static_cast<int>(bits.size()) != spec.total_bits()) {
    throw DataError("bitstring width " + std::to_string(bits.size()) +
                    " does not match coords x bits = " + std::to_string(spec.total_bits()));
  }
  return decode_sample_key(parse_bits(bits), spec);
}

BitDataset encode_dataset(const FloatDataset& d, const QuantizerSpec& spec) {
  spec.validate();
  if (spec.coords() != 3) throw ConfigError("float datasets carry 3 coordinates");
  if (d.samples.empty()) throw DataError("cannot encode an empty float dataset");
  std::vector<std::uint64_t> keys;
  keys.reserve(d.samples.size());
  for (const auto& s : d.samples) keys.push_back(encode_sample_key(s, spec));
  return BitDataset::from_keys(spec.total_bits(), keys);
}

FloatDataset decode_dataset(const BitDataset& d, const QuantizerSpec& spec) {
  spec.validate();
  if (spec.coords() != 3) throw ConfigError("float datasets carry 3 coordinates");
  if (d.width() != spec.total_bits()) {
    throw DataError("dataset width " + std::to_string(d.width()) + " does not match quantizer width " +
                    std::to_string(spec.total_bits()));
  }
  FloatDataset out;
  for (int c = 0; c < 3; ++c) out.ranges[static_cast<std::size_t>(c)] = {spec.ranges[static_cast<std::size_t>(c)].lo,
                                                                         spec.ranges[static_cast<std::size_t>(c)].hi};
  out.samples.reserve(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto v = decode_sample_key(d.key(i), spec);
    out.samples.push_back({v[0], v[1], v[2]});
  }
  return out;
}

}  // namespace ccmap
