#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ccmap/datasets.hpp"

namespace testutil {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("ccmap-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

/// Uniform over the even-parity strings of width n (exact pmf).
inline ccmap::EmpiricalPmf even_parity_pmf(int n) {
  std::vector<double> mass(std::size_t{1} << n, 0.0);
  const double w = 1.0 / static_cast<double>(std::size_t{1} << (n - 1));
  for (std::size_t x = 0; x < mass.size(); ++x) {
    if (std::popcount(x) % 2 == 0) mass[x] = w;
  }
  return ccmap::EmpiricalPmf::from_dense(n, mass);
}

/// Samples of the even-parity distribution: n-1 fair bits plus a parity bit.
inline ccmap::BitDataset even_parity_samples(int n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::uint64_t> keys(m);
  for (auto& k : keys) {
    std::uint64_t x = rng() & ((std::uint64_t{1} << (n - 1)) - 1);
    x |= static_cast<std::uint64_t>(std::popcount(x) & 1) << (n - 1);
    k = x;
  }
  return ccmap::BitDataset::from_keys(n, keys);
}

/// All bits equal: 0^n or 1^n with probability 1/2 each.
inline ccmap::EmpiricalPmf all_equal_pmf(int n) {
  std::vector<double> mass(std::size_t{1} << n, 0.0);
  mass.front() = 0.5;
  mass.back() = 0.5;
  return ccmap::EmpiricalPmf::from_dense(n, mass);
}

inline std::vector<double> random_pmf(int n, std::mt19937_64& rng, double zero_fraction = 0.0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(std::size_t{1} << n);
  double s = 0.0;
  for (auto& x : p) {
    x = u(rng) < zero_fraction ? 0.0 : u(rng);
    s += x;
  }
  if (s == 0.0) {
    p[0] = 1.0;
    s = 1.0;
  }
  for (auto& x : p) x /= s;
  return p;
}

/// Random dataset with a few dominant patterns plus noise, so it is far from uniform.
inline ccmap::BitDataset random_dataset(int n, std::size_t m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = n >= 64 ? ~0ULL : ((1ULL << n) - 1);
  std::vector<std::uint64_t> proto{rng() & mask, rng() & mask, rng() & mask};
  std::vector<std::uint64_t> keys(m);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& k : keys) {
    k = proto[rng() % proto.size()];
    for (int q = 0; q < n; ++q) {
      if (u(rng) < 0.15) k ^= 1ULL << q;
    }
  }
  return ccmap::BitDataset::from_keys(n, keys);
}

/// Direct sum over x of p(x) chi_s(x).
inline double direct_character_mean(const std::vector<double>& p, std::uint64_t s) {
  double acc = 0.0;
  for (std::size_t x = 0; x < p.size(); ++x) acc += (std::popcount(x & s) & 1) ? -p[x] : p[x];
  return acc;
}

}  // namespace testutil
