#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "ccmap/datasets.hpp"
#include "ccmap/iqp.hpp"

namespace ccmap {

enum class MmdEstimator { biased, unbiased };

/// k(x, y) = exp(-d_H(x, y) / (2 sigma^2)).
struct KernelSpec {
  double sigma = 1.0;
  MmdEstimator estimator = MmdEstimator::biased;

  void validate() const;
};

/// sigma^2 = n / 4, so the typical distance n/2 sits at kernel value e^-1.
double default_sigma(int n);

/// Walsh-basis weights of the kernel; lambda depends only on |s|.
struct PauliCoefficients {
  int n = 0;
  std::vector<double> lambda;  // lambda_k, k = 0..n

  double of_mask(std::uint64_t mask) const { return lambda[static_cast<std::size_t>(std::popcount(mask))]; }
};

/// lambda_k = ((1-q)/2)^k ((1+q)/2)^(n-k) with q = exp(-1/(2 sigma^2)).
PauliCoefficients pauli_coefficients(int n, double sigma);

/// E_aa[k] - 2 E_ab[k] + E_bb[k]; the unbiased variant drops the i = j terms.
double mmd_raw(const BitDataset& a, const BitDataset& b, const KernelSpec& kernel);

/// <chi_s> of the empirical distribution for every mask (n <= 24).
std::vector<double> empirical_z_expectations(const BitDataset& d);

/// sum_s lambda_|s| (A_s - B_s)^2 over all 2^n subsets. Throws DataError unless both
/// tables cover every subset.
double mmd_pauli(std::span<const double> exp_a, std::span<const double> exp_b, const PauliCoefficients& coeffs);

/// Approximate: the same sum restricted to the given subset family. values_a[i] and
/// values_b[i] belong to masks[i].
double mmd_pauli_truncated(std::span<const std::uint64_t> masks, std::span<const double> values_a,
                           std::span<const double> values_b, const PauliCoefficients& coeffs);

/// Exact loss of a circuit against data expectations.
double mmd_loss(const IqpCircuit& c, std::span<const double> data_exp, const PauliCoefficients& coeffs);

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;  // one entry per generator, circuit order
};

/// Analytic gradient of mmd_loss with respect to every generator angle.
LossAndGradient mmd_loss_and_gradient(const IqpCircuit& c, std::span<const double> data_exp,
                                      const PauliCoefficients& coeffs);
std::vector<double> mmd_gradient(const IqpCircuit& c, std::span<const double> data_exp,
                                 const PauliCoefficients& coeffs);

}  // namespace ccmap
