#include "ccmap/iqp.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/wht.hpp"

namespace ccmap {

namespace {

void require_dense(int n) {
  if (n < 1) throw ConfigError("circuit width must be >= 1");
  if (n > kIqpDenseLimit) {
    throw CapacityError("dense simulation supports n <= " + std::to_string(kIqpDenseLimit) + ", got " +
                        std::to_string(n));
  }
}

std::uint64_t random_subset_of_size(int n, int k, std::mt19937_64& rng) {
  std::uint64_t mask = 0;
  for (int j = n - k; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    const std::uint64_t bit = std::uint64_t{1} << t;
    mask |= (mask & bit) ? (std::uint64_t{1} << j) : bit;
  }
  return mask;
}

}  // namespace

std::vector<double> IqpCircuit::params() const {
  std::vector<double> out;
  out.reserve(generators.size());
  for (const auto& g : generators) out.push_back(g.theta);
  return out;
}

void IqpCircuit::set_params(std::span<const double> theta) {
  if (theta.size() != generators.size()) throw ConfigError("parameter vector length does not match gate count");
  for (std::size_t i = 0; i < theta.size(); ++i) generators[i].theta = theta[i];
}

void IqpCircuit::validate() const {
  if (n < 1 || n > 64) throw ConfigError("circuit width must be in [1, 64]");
  std::unordered_set<std::uint64_t> seen;
  for (const auto& g : generators) {
    if ((g.mask & ~low_mask(n)) != 0) throw ConfigError("generator mask outside the register");
    if (!seen.insert(g.mask).second) throw ConfigError("duplicate generator subset " + std::to_string(g.mask));
    if (!std::isfinite(g.theta)) throw ConfigError("non-finite generator angle");
  }
  if (canonical) {
    for (std::size_t i = 1; i < generators.size(); ++i) {
      if (!canonical_less(generators[i - 1].mask, generators[i].mask)) {
        throw ConfigError("circuit flagged canonical but generators are out of order");
      }
    }
  }
}

std::string IqpCircuit::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  j["ordering"] = canonical ? "canonical" : "custom";
  auto& gens = j["generators"] = nlohmann::json::array();
  for (const auto& g : generators) {
    gens.push_back({{"mask", g.mask}, {"qubits", mask_to_indices(g.mask)}, {"theta", g.theta}});
  }
  return j.dump(2);
}

IqpCircuit IqpCircuit::from_json(const std::string& text) {
  IqpCircuit c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.n = j.at("n").get<int>();
    c.canonical = j.value("ordering", std::string("custom")) == "canonical";
    for (const auto& g : j.at("generators")) {
      c.generators.push_back({g.at("mask").get<std::uint64_t>(), g.at("theta").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid circuit JSON: ") + e.what());
  }
  c.validate();
  return c;
}

bool canonical_less(std::uint64_t a, std::uint64_t b) noexcept {
  const int wa = std::popcount(a);
  const int wb = std::popcount(b);
  if (wa != wb) return wa < wb;
  if (a == b) return false;
  // Sorted index lists agree below the lowest differing bit; the set holding it comes first.
  const std::uint64_t low = (a ^ b) & (~(a ^ b) + 1);
  return (a & low) != 0;
}

void canonicalize(IqpCircuit& c) {
  std::sort(c.generators.begin(), c.generators.end(),
            [](const Generator& x, const Generator& y) { return canonical_less(x.mask, y.mask); });
  c.canonical = true;
}

std::uint64_t available_subsets(int n, int max_locality) noexcept {
  std::uint64_t total = 0;
  for (int k = 1; k <= std::min(n, max_locality); ++k) {
    const std::uint64_t c = binomial_saturating(n, k);
    if (total > UINT64_MAX - c) return UINT64_MAX;
    total += c;
  }
  return total;
}

IqpCircuit full_template(int n, int max_locality) {
  if (n < 1 || n > 64) throw ConfigError("circuit width must be in [1, 64]");
  const std::uint64_t count = available_subsets(n, max_locality);
  if (count > (std::uint64_t{1} << 22)) throw CapacityError("template has too many generators");
  IqpCircuit c;
  c.n = n;
  if (n <= 26) {
    for (std::uint64_t m = 1; m < (std::uint64_t{1} << n); ++m) {
      if (std::popcount(m) <= max_locality) c.generators.push_back({m, 0.0});
    }
  } else {
    for (int k = 1; k <= max_locality; ++k) {
      std::vector<int> idx(static_cast<std::size_t>(k));
      for (int i = 0; i < k; ++i) idx[static_cast<std::size_t>(i)] = i;
      while (true) {
        c.generators.push_back({indices_to_mask(idx), 0.0});
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
        if (i < 0) break;
        ++idx[static_cast<std::size_t>(i)];
        for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
      }
    }
  }
  canonicalize(c);
  return c;
}

IqpCircuit random_circuit(int n, std::size_t gate_count, int max_locality, std::uint64_t seed,
                          double angle_range) {
  if (n < 1 || n > 64) throw ConfigError("circuit width must be in [1, 64]");
  if (max_locality < 1) throw ConfigError("gate locality must be >= 1");
  if (!(angle_range >= 0.0)) throw ConfigError("angle range must be >= 0");
  const std::uint64_t available = available_subsets(n, max_locality);
  if (gate_count > available) {
    throw CapacityError("requested " + std::to_string(gate_count) + " gates but only " +
                        std::to_string(available) + " subsets of size <= " + std::to_string(max_locality) +
                        " exist at n = " + std::to_string(n));
  }
  std::mt19937_64 rng(mix_seed(seed, 0x1c9));
  std::vector<std::uint64_t> masks;
  if (available <= (std::uint64_t{1} << 21)) {
    const IqpCircuit all = full_template(n, max_locality);
    masks.reserve(all.size());
    for (const auto& g : all.generators) masks.push_back(g.mask);
    for (std::size_t i = 0; i < gate_count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, masks.size() - 1);
      std::swap(masks[i], masks[pick(rng)]);
    }
    masks.resize(gate_count);
  } else {
    // Size-weighted draw of the locality, then a uniform subset of that size.
    std::vector<double> weights;
    for (int k = 1; k <= std::min(n, max_locality); ++k) weights.push_back(binomial(n, k));
    std::discrete_distribution<int> size_dist(weights.begin(), weights.end());
    std::unordered_set<std::uint64_t> seen;
    while (masks.size() < gate_count) {
      const std::uint64_t m = random_subset_of_size(n, size_dist(rng) + 1, rng);
      if (seen.insert(m).second) masks.push_back(m);
    }
  }
  std::uniform_real_distribution<double> angle(-angle_range, angle_range);
  IqpCircuit c;
  c.n = n;
  for (std::uint64_t m : masks) c.generators.push_back({m, angle(rng)});
  canonicalize(c);
  return c;
}

IqpState simulate(const IqpCircuit& c) {
  require_dense(c.n);
  const std::size_t dim = std::size_t{1} << c.n;
  std::vector<double> theta(dim, 0.0);
  for (const auto& g : c.generators) theta[g.mask] += g.theta;
  // phi(x) = sum_s theta_s chi_s(x) is itself a Walsh transform of the angle table.
  fwht_inplace(std::span<double>(theta));

  IqpState st;
  st.n = c.n;
  st.phase.resize(dim);
  for (std::size_t x = 0; x < dim; ++x) st.phase[x] = std::polar(1.0, theta[x]);
  st.amplitude = st.phase;
  fwht_inplace(std::span<std::complex<double>>(st.amplitude));
  const double scale = std::ldexp(1.0, -c.n);
  st.probs.resize(dim);
  for (std::size_t z = 0; z < dim; ++z) {
    st.amplitude[z] *= scale;
    st.probs[z] = std::norm(st.amplitude[z]);
  }
  return st;
}

OutputDistribution exact_distribution(const IqpCircuit& c) {
  IqpState st = simulate(c);
  return {st.n, std::move(st.probs)};
}

BitDataset sample(const OutputDistribution& p, std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw ConfigError("shots must be >= 1");
  std::vector<double> cdf(p.probs.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < cdf.size(); ++i) {
    acc += std::max(p.probs[i], 0.0);
    cdf[i] = acc;
  }
  if (!(acc > 0.0)) throw NumericError("distribution has no mass");
  std::mt19937_64 rng(mix_seed(seed, 0x5a3));
  std::uniform_real_distribution<double> u(0.0, acc);
  std::vector<std::uint64_t> keys(shots);
  for (auto& k : keys) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u(rng));
    k = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
  }
  return BitDataset::from_keys(p.n, keys);
}

BitDataset sample(const IqpCircuit& c, std::size_t shots, std::uint64_t seed) {
  return sample(exact_distribution(c), shots, seed);
}

std::vector<double> z_expectations(const OutputDistribution& p) {
  std::vector<double> e = p.probs;
  fwht_inplace(std::span<double>(e));
  return e;
}

std::vector<double> all_z_expectations(const IqpCircuit& c) { return z_expectations(exact_distribution(c)); }

}  // namespace ccmap
