#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "ccmap/datasets.hpp"

namespace ccmap {

/// Largest width simulated densely (2^20 complex amplitudes).
inline constexpr int kIqpDenseLimit = 20;

/// Default half-width of the uniform initial angle range.
inline constexpr double kDefaultAngleRange = std::numbers::pi / 8.0;

struct Generator {
  std::uint64_t mask = 0;  // subset s of [n]; bit q = qubit q
  double theta = 0.0;      // radians
};

/// U = exp(i sum_s theta_s X_s), one generator per distinct subset.
struct IqpCircuit {
  int n = 0;
  std::vector<Generator> generators;
  bool canonical = false;

  std::size_t size() const noexcept { return generators.size(); }
  std::vector<double> params() const;
  void set_params(std::span<const double> theta);

  /// Throws ConfigError on out-of-range masks or duplicate subsets.
  void validate() const;

  std::string to_json() const;
  static IqpCircuit from_json(const std::string& text);
};

/// Order by Hamming weight, then lexicographically on the sorted index lists.
bool canonical_less(std::uint64_t a, std::uint64_t b) noexcept;
void canonicalize(IqpCircuit& c);

/// Number of subsets s with 1 <= |s| <= max_locality (saturating).
std::uint64_t available_subsets(int n, int max_locality) noexcept;

/// Every subset with 1 <= |s| <= max_locality in canonical order, all angles zero.
IqpCircuit full_template(int n, int max_locality);

/// Distinct non-empty subsets of size <= max_locality drawn uniformly without replacement,
/// angles uniform on [-angle_range, angle_range], returned in canonical order.
/// Throws CapacityError when gate_count exceeds the available subsets.
IqpCircuit random_circuit(int n, std::size_t gate_count, int max_locality, std::uint64_t seed,
                          double angle_range = kDefaultAngleRange);

struct OutputDistribution {
  int n = 0;
  std::vector<double> probs;  // indexed by outcome key
};

/// Intermediate quantities of the exact simulation, reused by the gradient.
struct IqpState {
  int n = 0;
  std::vector<std::complex<double>> phase;      // f(x) = exp(i phi(x))
  std::vector<std::complex<double>> amplitude;  // a(z) = 2^-n sum_x (-1)^{z.x} f(x)
  std::vector<double> probs;                    // |a(z)|^2
};

/// Throws CapacityError above kIqpDenseLimit.
IqpState simulate(const IqpCircuit& c);
OutputDistribution exact_distribution(const IqpCircuit& c);

/// Inverse-CDF sampling from a dense distribution; deterministic per seed.
BitDataset sample(const OutputDistribution& p, std::size_t shots, std::uint64_t seed);
BitDataset sample(const IqpCircuit& c, std::size_t shots, std::uint64_t seed);

/// <Z_s> = sum_z p(z) chi_s(z) for every subset mask s.
std::vector<double> z_expectations(const OutputDistribution& p);
std::vector<double> all_z_expectations(const IqpCircuit& c);

}  // namespace ccmap
