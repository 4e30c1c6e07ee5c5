#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ccmap/datasets.hpp"

namespace ccmap {

/// Fraction of Walsh power at each correlation order k = 0..n.
/// Invariant: entries >= 0 and sum to 1 within 1e-9.
struct OrderSpectrum {
  int n = 0;
  std::vector<double> m;

  /// Throws DataError if the invariant does not hold.
  void validate() const;
};

/// Values below this are clipped before the Jensen-Shannon divergence, then renormalised.
inline constexpr double kJsClip = 1e-12;

/// Default subset budget of the Monte-Carlo estimator.
inline constexpr std::size_t kDefaultMcBudget = 20000;

/// Normalised squared Walsh power P(s) = (2^-n sum_x p(x) chi_s(x))^2 for all 2^n subsets,
/// indexed by subset mask. Requires a dense pmf (n <= 24).
std::vector<double> walsh_power(const EmpiricalPmf& p);

/// m_k = sum_{|s|=k} P(s) / sum_s P(s). Throws DataError when all powers are zero.
OrderSpectrum order_spectrum(std::span<const double> powers, int n);

/// b_k = C(n,k) / 2^n.
OrderSpectrum binomial_baseline(int n);

/// Jensen-Shannon divergence in bits, after clipping both sides at eps and renormalising.
double js_divergence(const OrderSpectrum& m, const OrderSpectrum& b, double eps = kJsClip);

/// (1 / (8 ln 2)) sum_k (m_k - b_k)^2 / b_k
double second_order_js(const OrderSpectrum& m, const OrderSpectrum& b);

/// 1/2 sum_k |m_k - b_k|
double tv_distance(const OrderSpectrum& m, const OrderSpectrum& b);

struct QcliResult {
  double qcli = 0.0;
  OrderSpectrum m;
  OrderSpectrum b;
};

/// Exact QCLI from the empirical pmf of the samples (n <= 24).
QcliResult qcli_exact(const BitDataset& d);
/// Exact QCLI of an arbitrary (e.g. analytic) dense pmf.
QcliResult qcli_exact(const EmpiricalPmf& p);

struct McQcliResult {
  double qcli = 0.0;
  OrderSpectrum m;  // estimate m-hat
  OrderSpectrum b;
  std::vector<std::size_t> subsets_per_order;  // m_k^MC actually drawn per order
};

/// Equal-per-order subset allocation: floor(L/(n+1)) per order, capped at C(n,k), with the
/// leftover budget spread over the uncapped orders (largest C(n,k) first).
std::vector<std::size_t> mc_allocation(int n, std::size_t budget);

/// Monte-Carlo QCLI. Per order k, draws the allocated number of k-subsets uniformly without
/// replacement, evaluates P-hat(s) from the samples and reweights by C(n,k)/m_k^MC.
/// Works at any width. Throws ConfigError when budget < n + 1.
McQcliResult qcli_mc(const BitDataset& d, std::size_t budget, std::uint64_t seed);

}  // namespace ccmap
