#include "ccmap/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

namespace {

constexpr char kFieldMagic[8] = {'C', 'C', 'F', 'I', 'E', 'L', 'D', '1'};

struct Tensor {
  std::size_t c = 0, h = 0, w = 0;
  std::vector<double> v;
  double& at(std::size_t ch, std::size_t r, std::size_t col) { return v[(ch * h + r) * w + col]; }
  double at(std::size_t ch, std::size_t r, std::size_t col) const { return v[(ch * h + r) * w + col]; }
};

std::size_t reduced(std::size_t side, int kernel, int stride) {
  if (side < static_cast<std::size_t>(kernel)) return 0;
  return (side - static_cast<std::size_t>(kernel)) / static_cast<std::size_t>(stride) + 1;
}

std::vector<double> histogram(std::span<const FieldSnapshot> fields, double lo, double hi, int bins) {
  std::vector<double> h(static_cast<std::size_t>(bins), 0.0);
  double total = 0.0;
  for (const auto& f : fields) {
    for (double v : f.grid) {
      auto b = static_cast<std::size_t>(std::floor((v - lo) / (hi - lo) * bins));
      b = std::min(b, static_cast<std::size_t>(bins - 1));
      h[b] += 1.0;
      total += 1.0;
    }
  }
  double norm = 0.0;
  for (double& x : h) {
    x = x / total + kHistogramEps;
    norm += x;
  }
  for (double& x : h) x /= norm;
  return h;
}

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

std::vector<FieldSnapshot> subsample(std::span<const FieldSnapshot> fields, std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> idx(fields.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (fields.size() > count) {
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
  }
  std::vector<FieldSnapshot> out;
  for (std::size_t i : idx) out.push_back(fields[i]);
  return out;
}

}  // namespace

void FieldSnapshot::validate() const {
  if (height == 0 || width == 0 || grid.size() != height * width) throw DataError("field grid has inconsistent shape");
  for (double v : grid) {
    if (!std::isfinite(v)) throw DataError("field contains a non-finite value");
  }
}

MetricValue pdf_js(std::span<const FieldSnapshot> real, std::span<const FieldSnapshot> gen, int bins) {
  if (real.empty() || gen.empty()) throw DataError("both snapshot lists must be nonempty");
  if (bins < 1) throw ConfigError("histogram bins must be >= 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto* side : {&real, &gen}) {
    for (const auto& f : *side) {
      f.validate();
      for (double v : f.grid) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
  }
  if (!(hi > lo)) return {0.0, true};
  const auto p = histogram(real, lo, hi, bins);
  const auto q = histogram(gen, lo, hi, bins);
  double js = 0.0;
  for (std::size_t b = 0; b < p.size(); ++b) {
    const double m = 0.5 * (p[b] + q[b]);
    js += 0.5 * p[b] * std::log2(p[b] / m) + 0.5 * q[b] * std::log2(q[b] / m);
  }
  return {std::max(js, 0.0), false};
}

RandomConvEncoder::RandomConvEncoder(std::uint64_t seed, EncoderSpec spec) : seed_(seed), spec_(spec) {
  if (spec_.kernel < 1 || spec_.stride < 1) throw ConfigError("encoder kernel and stride must be >= 1");
  std::mt19937_64 rng(mix_seed(seed, 0xe4c));
  std::normal_distribution<double> normal(0.0, 1.0);
  int in = 1;
  for (int out : spec_.channels) {
    if (out < 1) throw ConfigError("encoder channel widths must be >= 1");
    const int fan_in = in * spec_.kernel * spec_.kernel;
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::vector<double> w(static_cast<std::size_t>(out * fan_in));
    for (double& x : w) x = normal(rng) * scale;
    weights_.push_back(std::move(w));
    in = out;
  }
}

std::size_t RandomConvEncoder::min_side() const noexcept {
  // Invert the three reductions starting from one output pixel.
  std::size_t side = 1;
  for (int l = 0; l < 3; ++l) side = (side - 1) * static_cast<std::size_t>(spec_.stride) + static_cast<std::size_t>(spec_.kernel);
  return side;
}

std::vector<double> RandomConvEncoder::encode(const FieldSnapshot& f) const {
  f.validate();
  if (f.height < min_side() || f.width < min_side()) {
    throw DataError("field " + std::to_string(f.height) + "x" + std::to_string(f.width) +
                    " is smaller than the encoder minimum " + std::to_string(min_side()));
  }
  Tensor x{1, f.height, f.width, f.grid};
  const auto k = static_cast<std::size_t>(spec_.kernel);
  const auto s = static_cast<std::size_t>(spec_.stride);
  for (std::size_t layer = 0; layer < weights_.size(); ++layer) {
    const auto out_c = static_cast<std::size_t>(spec_.channels[layer]);
    Tensor y{out_c, reduced(x.h, spec_.kernel, spec_.stride), reduced(x.w, spec_.kernel, spec_.stride), {}};
    y.v.assign(y.c * y.h * y.w, 0.0);
    const auto& w = weights_[layer];
    for (std::size_t o = 0; o < out_c; ++o) {
      for (std::size_t r = 0; r < y.h; ++r) {
        for (std::size_t c = 0; c < y.w; ++c) {
          double acc = 0.0;
          for (std::size_t i = 0; i < x.c; ++i) {
            const double* wk = &w[((o * x.c + i) * k) * k];
            for (std::size_t dr = 0; dr < k; ++dr) {
              for (std::size_t dc = 0; dc < k; ++dc) acc += wk[dr * k + dc] * x.at(i, r * s + dr, c * s + dc);
            }
          }
          y.at(o, r, c) = std::max(acc, 0.0);
        }
      }
    }
    x = std::move(y);
  }
  std::vector<double> feat(x.c, 0.0);
  const double area = static_cast<double>(x.h * x.w);
  for (std::size_t ch = 0; ch < x.c; ++ch) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.h * x.w; ++i) acc += x.v[ch * x.h * x.w + i];
    feat[ch] = acc / area;
  }
  return feat;
}

std::string RandomConvEncoder::config_json() const {
  nlohmann::ordered_json j;
  j["seed"] = seed_;
  j["channels"] = spec_.channels;
  j["kernel"] = spec_.kernel;
  j["stride"] = spec_.stride;
  j["padding"] = "valid";
  j["activation"] = "relu";
  j["pooling"] = "global_mean";
  j["weight_init"] = "normal(0, 1/fan_in)";
  j["bias"] = 0.0;
  return j.dump();
}

MetricValue feature_mmd(std::span<const std::vector<double>> real, std::span<const std::vector<double>> gen) {
  if (real.empty() || gen.empty()) throw DataError("both feature sets must be nonempty");
  std::vector<const std::vector<double>*> pooled;
  for (const auto& f : real) pooled.push_back(&f);
  for (const auto& f : gen) pooled.push_back(&f);
  for (const auto* f : pooled) {
    if (f->size() != real.front().size()) throw DataError("feature vectors have different lengths");
  }
  std::vector<double> dists;
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    for (std::size_t j = i + 1; j < pooled.size(); ++j) dists.push_back(std::sqrt(sq_dist(*pooled[i], *pooled[j])));
  }
  if (dists.empty()) return {0.0, true};
  std::sort(dists.begin(), dists.end());
  const std::size_t mid = dists.size() / 2;
  const double median = dists.size() % 2 ? dists[mid] : 0.5 * (dists[mid - 1] + dists[mid]);
  if (!(median > 0.0)) return {0.0, true};
  const double inv = 1.0 / (2.0 * median * median);
  const auto mean_kernel = [&](std::span<const std::vector<double>> a, std::span<const std::vector<double>> b) {
    double acc = 0.0;
    for (const auto& x : a) {
      for (const auto& y : b) acc += std::exp(-sq_dist(x, y) * inv);
    }
    return acc / (static_cast<double>(a.size()) * static_cast<double>(b.size()));
  };
  const double v = mean_kernel(real, real) - 2.0 * mean_kernel(real, gen) + mean_kernel(gen, gen);
  return {std::max(v, 0.0), false};
}

MetricValue feature_mmd(std::span<const FieldSnapshot> real, std::span<const FieldSnapshot> gen,
                        const RandomConvEncoder& encoder, std::size_t eval_size, std::uint64_t subsample_seed) {
  if (real.empty() || gen.empty()) throw DataError("both snapshot lists must be nonempty");
  if (eval_size == 0) throw ConfigError("evaluation size must be >= 1");
  const auto encode_all = [&](std::span<const FieldSnapshot> fields, std::uint64_t stream) {
    std::vector<std::vector<double>> out;
    for (const auto& f : subsample(fields, eval_size, mix_seed(subsample_seed, stream))) out.push_back(encoder.encode(f));
    return out;
  };
  const auto fr = encode_all(real, 1);
  const auto fg = encode_all(gen, 2);
  return feature_mmd(fr, fg);
}

FieldSnapshot load_field(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open field file " + path.string());
  char magic[8] = {};
  in.read(magic, 8);
  FieldSnapshot f;
  if (in.gcount() == 8 && std::memcmp(magic, kFieldMagic, 8) == 0) {
    std::uint32_t header[3] = {};
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (!in || header[0] == 0) throw FormatError("truncated field header in " + path.string());
    f.height = header[1];
    f.width = header[2];
    const std::size_t plane = f.height * f.width;
    std::vector<double> all(plane * header[0]);
    in.read(reinterpret_cast<char*>(all.data()), static_cast<std::streamsize>(all.size() * sizeof(double)));
    if (!in) throw FormatError("truncated field data in " + path.string());
    const std::size_t z = header[0] - 1;
    f.grid.assign(all.begin() + static_cast<std::ptrdiff_t>(z * plane), all.begin() + static_cast<std::ptrdiff_t>((z + 1) * plane));
  } else {
    in.clear();
    in.seekg(0);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == "\r") continue;
      std::stringstream ss(line);
      std::string cell;
      std::size_t cols = 0;
      while (std::getline(ss, cell, ',')) {
        try {
          std::size_t used = 0;
          f.grid.push_back(std::stod(cell, &used));
        } catch (const std::exception&) {
          throw ParseError("invalid number \"" + cell + "\" in " + path.string());
        }
        ++cols;
      }
      if (f.width == 0) f.width = cols;
      if (cols != f.width) throw FormatError("ragged field row in " + path.string());
      ++f.height;
    }
    if (f.height == 0) throw FormatError("empty field file " + path.string());
  }
  f.validate();
  return f;
}

void save_field_csv(const FieldSnapshot& f, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out.precision(17);
  for (std::size_t r = 0; r < f.height; ++r) {
    for (std::size_t c = 0; c < f.width; ++c) out << (c ? "," : "") << f.at(r, c);
    out << '\n';
  }
}

void save_field_binary(const FieldSnapshot& f, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(kFieldMagic, 8);
  const std::uint32_t header[3] = {1, static_cast<std::uint32_t>(f.height), static_cast<std::uint32_t>(f.width)};
  out.write(reinterpret_cast<const char*>(header), sizeof(header));
  out.write(reinterpret_cast<const char*>(f.grid.data()), static_cast<std::streamsize>(f.grid.size() * sizeof(double)));
}

std::vector<FieldSnapshot> load_field_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw DataError(dir.string() + " is not a directory");
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (e.is_regular_file() && (ext == ".csv" || ext == ".bin")) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FieldSnapshot> out;
  for (const auto& p : files) out.push_back(load_field(p));
  if (out.empty()) throw DataError("no snapshot files in " + dir.string());
  return out;
}

}  // namespace ccmap
