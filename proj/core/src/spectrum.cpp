#include "ccmap/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <unordered_set>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/wht.hpp"

namespace ccmap {

namespace {

std::vector<double> clip_renormalize(const std::vector<double>& v, double eps) {
  std::vector<double> out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::max(v[i], eps);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

void require_same_order(const OrderSpectrum& m, const OrderSpectrum& b) {
  if (m.n != b.n || m.m.size() != b.m.size()) {
    throw DataError("order spectra have different widths");
  }
}

// Unique rows with their empirical weights, stored flat for the parity loop.
struct Atoms {
  std::size_t stride = 1;
  std::vector<std::uint64_t> words;
  std::vector<double> weights;
};

Atoms collect_atoms(const BitDataset& d) {
  Atoms a;
  a.stride = d.stride();
  empirical_pmf(d).for_each_atom([&](std::span<const std::uint64_t> row, double w) {
    a.words.insert(a.words.end(), row.begin(), row.end());
    a.weights.push_back(w);
  });
  return a;
}

// E_s = sum_x p(x) chi_s(x) for one subset mask (multi-word).
double parity_expectation(const Atoms& atoms, std::span<const std::uint64_t> mask) {
  double acc = 0.0;
  const std::size_t count = atoms.weights.size();
  if (atoms.stride == 1) {
    const std::uint64_t m0 = mask[0];
    for (std::size_t i = 0; i < count; ++i) {
      acc += (std::popcount(atoms.words[i] & m0) & 1) ? -atoms.weights[i] : atoms.weights[i];
    }
    return acc;
  }
  for (std::size_t i = 0; i < count; ++i) {
    std::span<const std::uint64_t> row(atoms.words.data() + i * atoms.stride, atoms.stride);
    acc += parity_sign(row, mask) * atoms.weights[i];
  }
  return acc;
}

std::vector<std::uint64_t> indices_to_words(std::span<const int> idx, std::size_t stride) {
  std::vector<std::uint64_t> w(stride, 0);
  for (int i : idx) w[static_cast<std::size_t>(i / 64)] |= std::uint64_t{1} << (i % 64);
  return w;
}

// All k-subsets of [n] in lexicographic order, as index lists; caller guarantees C(n,k) is small.
std::vector<std::vector<int>> all_k_subsets(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    out.push_back(idx);
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
  }
  return out;
}

// Uniform random k-subset of [n] (Floyd), returned sorted.
std::vector<int> random_k_subset(int n, int k, std::mt19937_64& rng) {
  std::unordered_set<int> chosen;
  for (int j = n - k; j < n; ++j) {
    std::uniform_int_distribution<int> pick(0, j);
    const int t = pick(rng);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::vector<int> out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

// `count` distinct k-subsets drawn uniformly without replacement.
std::vector<std::vector<int>> sample_k_subsets(int n, int k, std::size_t count, std::mt19937_64& rng) {
  const std::uint64_t total = binomial_saturating(n, k);
  if (count >= total) return all_k_subsets(n, k);
  constexpr std::uint64_t kEnumerateLimit = 2'000'000;
  if (total <= kEnumerateLimit && count * 2 > total) {
    auto all = all_k_subsets(n, k);
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, all.size() - 1);
      std::swap(all[i], all[pick(rng)]);
    }
    all.resize(count);
    return all;
  }
  std::vector<std::vector<int>> out;
  std::unordered_set<std::string> seen;
  out.reserve(count);
  while (out.size() < count) {
    auto s = random_k_subset(n, k, rng);
    std::string key(reinterpret_cast<const char*>(s.data()), s.size() * sizeof(int));
    if (seen.insert(std::move(key)).second) out.push_back(std::move(s));
  }
  return out;
}

}  // namespace

void OrderSpectrum::validate() const {
  if (static_cast<int>(m.size()) != n + 1) throw DataError("order spectrum must have n + 1 entries");
  double total = 0.0;
  for (double x : m) {
    if (!(x >= 0.0)) throw DataError("order spectrum entries must be nonnegative");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw DataError("order spectrum must sum to 1");
}

std::vector<double> walsh_power(const EmpiricalPmf& p) {
  auto mass = p.dense_mass();  // throws CapacityError above the dense limit
  std::vector<double> f(mass.begin(), mass.end());
  fwht_inplace(std::span<double>(f));
  const double scale = std::ldexp(1.0, -p.width());
  for (double& x : f) {
    const double c = x * scale;
    x = c * c;
  }
  return f;
}

OrderSpectrum order_spectrum(std::span<const double> powers, int n) {
  if (powers.size() != (std::size_t{1} << n)) throw DataError("power table must have 2^n entries");
  OrderSpectrum s{n, std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)};
  double total = 0.0;
  for (std::size_t mask = 0; mask < powers.size(); ++mask) {
    s.m[static_cast<std::size_t>(std::popcount(mask))] += powers[mask];
    total += powers[mask];
  }
  if (!(total > 0.0)) throw DataError("undefined order spectrum: total Walsh power is zero");
  for (double& x : s.m) x /= total;
  return s;
}

OrderSpectrum binomial_baseline(int n) {
  if (n < 1) throw ConfigError("binomial baseline needs n >= 1");
  OrderSpectrum b{n, std::vector<double>(static_cast<std::size_t>(n) + 1)};
  // Recurrence in log space keeps every n representable (2^-n underflows past n ~ 1074).
  double log_c = 0.0;
  const double log_half_n = -n * std::log(2.0);
  for (int k = 0; k <= n; ++k) {
    if (k > 0) log_c += std::log(static_cast<double>(n - k + 1)) - std::log(static_cast<double>(k));
    b.m[static_cast<std::size_t>(k)] = n <= 62 ? binomial(n, k) * std::ldexp(1.0, -n)
                                               : std::exp(log_c + log_half_n);
  }
  return b;
}

double js_divergence(const OrderSpectrum& m, const OrderSpectrum& b, double eps) {
  require_same_order(m, b);
  const auto p = clip_renormalize(m.m, eps);
  const auto q = clip_renormalize(b.m, eps);
  double js = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double mid = 0.5 * (p[k] + q[k]);
    js += 0.5 * p[k] * std::log2(p[k] / mid) + 0.5 * q[k] * std::log2(q[k] / mid);
  }
  return std::clamp(js, 0.0, 1.0);
}

double second_order_js(const OrderSpectrum& m, const OrderSpectrum& b) {
  require_same_order(m, b);
  double acc = 0.0;
  for (std::size_t k = 0; k < m.m.size(); ++k) {
    const double d = m.m[k] - b.m[k];
    acc += d * d / b.m[k];
  }
  return acc / (8.0 * std::log(2.0));
}

double tv_distance(const OrderSpectrum& m, const OrderSpectrum& b) {
  require_same_order(m, b);
  double acc = 0.0;
  for (std::size_t k = 0; k < m.m.size(); ++k) acc += std::abs(m.m[k] - b.m[k]);
  return 0.5 * acc;
}

QcliResult qcli_exact(const EmpiricalPmf& p) {
  QcliResult r;
  r.m = order_spectrum(walsh_power(p), p.width());
  r.b = binomial_baseline(p.width());
  r.qcli = js_divergence(r.m, r.b);
  return r;
}

QcliResult qcli_exact(const BitDataset& d) { return qcli_exact(empirical_pmf(d)); }

std::vector<std::size_t> mc_allocation(int n, std::size_t budget) {
  const std::size_t orders = static_cast<std::size_t>(n) + 1;
  if (budget < orders) {
    throw ConfigError("Monte-Carlo budget " + std::to_string(budget) + " is below n + 1 = " +
                      std::to_string(orders));
  }
  std::vector<std::uint64_t> cap(orders);
  for (std::size_t k = 0; k < orders; ++k) cap[k] = binomial_saturating(n, static_cast<int>(k));
  std::vector<std::size_t> alloc(orders);
  const std::size_t base = budget / orders;
  std::size_t used = 0;
  for (std::size_t k = 0; k < orders; ++k) {
    alloc[k] = static_cast<std::size_t>(std::min<std::uint64_t>(base, cap[k]));
    used += alloc[k];
  }
  std::size_t leftover = budget - used;
  while (leftover > 0) {
    std::vector<std::size_t> open;
    for (std::size_t k = 0; k < orders; ++k) {
      if (alloc[k] < cap[k]) open.push_back(k);
    }
    if (open.empty()) break;
    std::stable_sort(open.begin(), open.end(), [&](std::size_t a, std::size_t b) { return cap[a] > cap[b]; });
    const std::size_t share = leftover / open.size();
    if (share == 0) {
      for (std::size_t i = 0; i < open.size() && leftover > 0; ++i) {
        ++alloc[open[i]];
        --leftover;
      }
      continue;
    }
    for (std::size_t k : open) {
      const std::size_t add = static_cast<std::size_t>(std::min<std::uint64_t>(share, cap[k] - alloc[k]));
      alloc[k] += add;
      leftover -= add;
    }
  }
  return alloc;
}

McQcliResult qcli_mc(const BitDataset& d, std::size_t budget, std::uint64_t seed) {
  const int n = d.width();
  McQcliResult r;
  r.subsets_per_order = mc_allocation(n, budget);
  const Atoms atoms = collect_atoms(d);

  // A_k is accumulated from E_s^2; the common factor 4^-n of P-hat(s) cancels in m-hat.
  std::vector<double> a(static_cast<std::size_t>(n) + 1, 0.0);
  for (int k = 0; k <= n; ++k) {
    const std::size_t count = r.subsets_per_order[static_cast<std::size_t>(k)];
    if (count == 0) continue;
    std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(k)));
    const auto subsets = sample_k_subsets(n, k, count, rng);
    double sum = 0.0;
    for (const auto& s : subsets) {
      const auto mask = indices_to_words(s, atoms.stride);
      const double e = parity_expectation(atoms, mask);
      sum += e * e;
    }
    a[static_cast<std::size_t>(k)] = binomial(n, k) / static_cast<double>(count) * sum;
  }
  const double total = std::accumulate(a.begin(), a.end(), 0.0);
  r.m = OrderSpectrum{n, std::vector<double>(a.size())};
  for (std::size_t k = 0; k < a.size(); ++k) r.m.m[k] = a[k] / total;
  r.b = binomial_baseline(n);
  r.qcli = js_divergence(r.m, r.b);
  return r;
}

}  // namespace ccmap
