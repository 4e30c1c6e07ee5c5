#include "ccmap/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

namespace {

constexpr char kPackedMagic[8] = {'C', 'C', 'B', 'I', 'T', 'S', '1', '\0'};

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string row_bytes(std::span<const std::uint64_t> words) {
  return std::string(reinterpret_cast<const char*>(words.data()), words.size_bytes());
}

BitDataset parse_rows(const std::vector<std::string>& rows, const std::string& source) {
  if (rows.empty()) throw FormatError("dataset " + source + " has no samples");
  const std::size_t width = rows.front().size();
  if (width == 0) throw FormatError("dataset " + source + " has zero-width rows");
  std::vector<std::uint64_t> words;
  words.reserve(rows.size() * words_for_bits(static_cast<int>(width)));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != width) {
      throw FormatError("ragged rows in " + source + ": row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[i].size()) + " bits, expected " +
                        std::to_string(width));
    }
    auto w = row_from_string(rows[i]);
    words.insert(words.end(), w.begin(), w.end());
  }
  return BitDataset(static_cast<int>(width), std::move(words));
}

}  // namespace

// ---------------------------------------------------------------- BitDataset

BitDataset::BitDataset(int n, std::vector<std::uint64_t> words)
    : n_(n), stride_(words_for_bits(n)), words_(std::move(words)) {
  if (n < 1) throw DataError("bit width must be >= 1");
  if (words_.empty() || words_.size() % stride_ != 0) {
    throw DataError("dataset must hold at least one complete row");
  }
  const int tail = n % 64;
  if (tail != 0) {
    const std::uint64_t mask = low_mask(tail);
    for (std::size_t i = stride_ - 1; i < words_.size(); i += stride_) {
      if (words_[i] & ~mask) throw DataError("row has bits set above the declared width");
    }
  }
}

BitDataset BitDataset::from_keys(int n, std::span<const std::uint64_t> keys) {
  if (n > 64) throw DataError("from_keys requires width <= 64");
  return BitDataset(n, std::vector<std::uint64_t>(keys.begin(), keys.end()));
}

BitDataset BitDataset::from_strings(std::span<const std::string> rows) {
  return parse_rows(std::vector<std::string>(rows.begin(), rows.end()), "<memory>");
}

std::uint64_t BitDataset::key(std::size_t i) const {
  if (n_ > 64) throw CapacityError("integer keys require width <= 64");
  return words_[i];
}

std::string BitDataset::row_string(std::size_t i) const { return row_to_string(row(i), n_); }

std::vector<std::uint64_t> BitDataset::keys() const {
  if (n_ > 64) throw CapacityError("integer keys require width <= 64");
  return words_;
}

BitDataset BitDataset::select(std::span<const std::size_t> indices) const {
  std::vector<std::uint64_t> out;
  out.reserve(indices.size() * stride_);
  for (std::size_t i : indices) {
    auto r = row(i);
    out.insert(out.end(), r.begin(), r.end());
  }
  return BitDataset(n_, std::move(out));
}

BitDataset BitDataset::permute_bits(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw DataError("permutation length != width");
  std::vector<std::uint64_t> out(words_.size(), 0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (int q = 0; q < n_; ++q) {
      if (bit(i, q)) {
        const int t = perm[static_cast<std::size_t>(q)];
        out[i * stride_ + static_cast<std::size_t>(t / 64)] |= std::uint64_t{1} << (t % 64);
      }
    }
  }
  return BitDataset(n_, std::move(out));
}

// -------------------------------------------------------------- EmpiricalPmf

EmpiricalPmf EmpiricalPmf::from_dense(int n, std::vector<double> mass) {
  if (n < 1 || n > kDenseLimit) throw CapacityError("dense pmf width must be in [1, 24]");
  if (mass.size() != (std::size_t{1} << n)) throw DataError("dense pmf must have 2^n entries");
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw DataError("pmf masses must be nonnegative");
    total += m;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DataError("pmf masses must sum to 1");
  EmpiricalPmf p;
  p.n_ = n;
  p.dense_ = std::move(mass);
  return p;
}

std::span<const double> EmpiricalPmf::dense_mass() const {
  if (!dense()) {
    throw CapacityError("pmf of width " + std::to_string(n_) +
                        " exceeds the dense limit of 24 bits");
  }
  return dense_;
}

double EmpiricalPmf::mass(std::uint64_t key) const {
  if (dense()) return key < dense_.size() ? dense_[key] : 0.0;
  if (n_ > 64) throw CapacityError("integer keys require width <= 64");
  auto it = sparse_.find(row_bytes(std::span<const std::uint64_t>(&key, 1)));
  return it == sparse_.end() ? 0.0 : it->second;
}

std::size_t EmpiricalPmf::support_size() const noexcept {
  if (!dense()) return sparse_.size();
  return static_cast<std::size_t>(
      std::count_if(dense_.begin(), dense_.end(), [](double m) { return m > 0.0; }));
}

void EmpiricalPmf::for_each_atom(
    const std::function<void(std::span<const std::uint64_t>, double)>& fn) const {
  if (dense()) {
    for (std::uint64_t key = 0; key < dense_.size(); ++key) {
      if (dense_[key] > 0.0) fn(std::span<const std::uint64_t>(&key, 1), dense_[key]);
    }
    return;
  }
  const std::size_t stride = words_for_bits(n_);
  std::vector<std::uint64_t> words(stride);
  // Sorted iteration keeps downstream floating-point sums deterministic.
  std::vector<const std::pair<const std::string, double>*> atoms;
  atoms.reserve(sparse_.size());
  for (const auto& kv : sparse_) atoms.push_back(&kv);
  std::sort(atoms.begin(), atoms.end(), [](auto* a, auto* b) { return a->first < b->first; });
  for (auto* kv : atoms) {
    std::memcpy(words.data(), kv->first.data(), kv->first.size());
    fn(words, kv->second);
  }
}

EmpiricalPmf empirical_pmf(const BitDataset& d) {
  EmpiricalPmf p;
  p.n_ = d.width();
  p.sample_count_ = d.size();
  const double inv = 1.0 / static_cast<double>(d.size());
  if (p.dense()) {
    std::vector<std::size_t> counts(std::size_t{1} << d.width(), 0);
    for (std::size_t i = 0; i < d.size(); ++i) ++counts[d.row(i)[0]];
    p.dense_.resize(counts.size());
    for (std::size_t k = 0; k < counts.size(); ++k) p.dense_[k] = static_cast<double>(counts[k]) * inv;
    return p;
  }
  std::unordered_map<std::string, std::size_t> counts;
  for (std::size_t i = 0; i < d.size(); ++i) ++counts[row_bytes(d.row(i))];
  for (const auto& [k, c] : counts) p.sparse_.emplace(k, static_cast<double>(c) * inv);
  return p;
}

BitDataset iid_uniform(int n, std::size_t samples, std::uint64_t seed) {
  if (n < 1) throw ConfigError("iid_uniform: n must be >= 1");
  if (samples < 1) throw ConfigError("iid_uniform: sample count must be >= 1");
  std::mt19937_64 rng(seed);
  const std::size_t stride = words_for_bits(n);
  std::vector<std::uint64_t> words(samples * stride);
  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t w = 0; w < stride; ++w) {
      const int bits = std::min(64, n - static_cast<int>(w) * 64);
      words[i * stride + w] = rng() & low_mask(bits);
    }
  }
  return BitDataset(n, std::move(words));
}

std::array<std::array<double, 2>, 3> FloatDataset::empirical_ranges(
    std::span<const std::array<double, 3>> samples) {
  if (samples.empty()) throw DataError("cannot infer ranges from an empty float dataset");
  std::array<std::array<double, 2>, 3> r{};
  for (int c = 0; c < 3; ++c) r[c] = {samples[0][c], samples[0][c]};
  for (const auto& s : samples) {
    for (int c = 0; c < 3; ++c) {
      r[c][0] = std::min(r[c][0], s[c]);
      r[c][1] = std::max(r[c][1], s[c]);
    }
  }
  for (auto& c : r) {
    if (!(c[1] > c[0])) c[1] = c[0] + 1.0;  // constant coordinate: any nonempty interval works
  }
  return r;
}

// ------------------------------------------------------------------ file I/O

BitFormat parse_bit_format(std::string_view name) {
  if (name == "text" || name == "text-lines") return BitFormat::text_lines;
  if (name == "packed" || name == "packed-binary" || name == "bin") return BitFormat::packed_binary;
  if (name == "csv") return BitFormat::csv;
  throw ConfigError("unknown bit format '" + std::string(name) + "'");
}

std::string to_string(BitFormat f) {
  switch (f) {
    case BitFormat::text_lines: return "text-lines";
    case BitFormat::packed_binary: return "packed-binary";
    case BitFormat::csv: return "csv";
  }
  return "?";
}

BitFormat format_from_extension(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".bin" || ext == ".bitsb") return BitFormat::packed_binary;
  if (ext == ".csv") return BitFormat::csv;
  return BitFormat::text_lines;
}

BitDataset load_bit_dataset(const std::filesystem::path& path, BitFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());

  if (format == BitFormat::packed_binary) {
    char magic[8];
    std::uint32_t n = 0;
    std::uint64_t m = 0;
    in.read(magic, 8);
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&m), sizeof m);
    if (!in || std::memcmp(magic, kPackedMagic, 8) != 0) {
      throw FormatError(path.string() + " is not a packed bit dataset");
    }
    if (n < 1 || m < 1) throw FormatError(path.string() + ": empty packed dataset");
    const std::size_t bytes_per_row = (n + 7) / 8;
    const std::size_t stride = words_for_bits(static_cast<int>(n));
    std::vector<std::uint64_t> words(m * stride, 0);
    std::vector<unsigned char> buf(bytes_per_row);
    for (std::uint64_t i = 0; i < m; ++i) {
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes_per_row));
      if (!in) throw FormatError(path.string() + ": truncated packed dataset");
      for (std::size_t b = 0; b < bytes_per_row; ++b) {
        words[i * stride + b / 8] |= static_cast<std::uint64_t>(buf[b]) << (8 * (b % 8));
      }
    }
    return BitDataset(static_cast<int>(n), std::move(words));
  }

  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty()) continue;
    if (format == BitFormat::csv) {
      std::string compact;
      compact.reserve(t.size());
      std::stringstream ss(t);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.size() != 1) throw ParseError("invalid csv cell \"" + cell + "\" in " + path.string());
        compact += cell;
      }
      t = std::move(compact);
    }
    rows.push_back(std::move(t));
  }
  return parse_rows(rows, path.string());
}

void save_bit_dataset(const BitDataset& d, const std::filesystem::path& path, BitFormat format) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  if (format == BitFormat::packed_binary) {
    const std::uint32_t n = static_cast<std::uint32_t>(d.width());
    const std::uint64_t m = d.size();
    out.write(kPackedMagic, 8);
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&m), sizeof m);
    const std::size_t bytes_per_row = (n + 7) / 8;
    std::vector<unsigned char> buf(bytes_per_row);
    for (std::size_t i = 0; i < d.size(); ++i) {
      auto r = d.row(i);
      for (std::size_t b = 0; b < bytes_per_row; ++b) {
        buf[b] = static_cast<unsigned char>((r[b / 8] >> (8 * (b % 8))) & 0xFFU);
      }
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(bytes_per_row));
    }
    return;
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::string s = d.row_string(i);
    if (format == BitFormat::csv) {
      for (std::size_t j = 0; j < s.size(); ++j) {
        if (j) out << ',';
        out << s[j];
      }
    } else {
      out << s;
    }
    out << '\n';
  }
}

std::string dataset_checksum(const BitDataset& d) {
  const std::string header = std::to_string(d.width()) + ":";
  std::uint64_t h = fnv1a64(header);
  auto w = d.words();
  h = fnv1a64(std::string_view(reinterpret_cast<const char*>(w.data()), w.size_bytes()), h);
  return "fnv1a64:" + hex64(h);
}

std::string dataset_manifest_json(const BitDataset& d, const std::filesystem::path& source,
                                  BitFormat format) {
  nlohmann::ordered_json j;
  j["n"] = d.width();
  j["M"] = d.size();
  j["source"] = source.string();
  j["format"] = to_string(format);
  j["checksum"] = dataset_checksum(d);
  return j.dump(2);
}

FloatDataset load_float_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  FloatDataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::stringstream ss(t);
    std::string cell;
    std::array<double, 3> v{};
    int c = 0;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      if (c >= 3) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
      try {
        std::size_t used = 0;
        v[static_cast<std::size_t>(c)] = std::stod(trim(cell), &used);
      } catch (const std::exception&) {
        numeric = false;
      }
      ++c;
    }
    if (!numeric) {
      if (d.samples.empty() && lineno == 1) continue;  // header row
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": non-numeric value");
    }
    if (c != 3) throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected 3 columns");
    for (double x : v) {
      if (!std::isfinite(x)) throw ParseError(path.string() + ": non-finite value");
    }
    d.samples.push_back(v);
  }
  if (d.samples.empty()) throw FormatError(path.string() + " has no samples");
  d.ranges = FloatDataset::empirical_ranges(d.samples);
  return d;
}

void save_float_csv(const FloatDataset& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "x,y,z\n";
  out.precision(17);
  for (const auto& s : d.samples) out << s[0] << ',' << s[1] << ',' << s[2] << '\n';
}

}  // namespace ccmap
