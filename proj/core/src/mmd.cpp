#include "ccmap/mmd.hpp"

#include <cmath>
#include <complex>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/wht.hpp"

namespace ccmap {

namespace {

// Neumaier summation keeps results stable regardless of accumulation order.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Histogram {
  std::size_t stride = 1;
  std::vector<std::uint64_t> rows;
  std::vector<double> counts;
  double total = 0.0;
};

Histogram histogram(const BitDataset& d) {
  Histogram h;
  h.stride = d.stride();
  const double m = static_cast<double>(d.size());
  empirical_pmf(d).for_each_atom([&](std::span<const std::uint64_t> row, double w) {
    h.rows.insert(h.rows.end(), row.begin(), row.end());
    h.counts.push_back(std::round(w * m));
  });
  h.total = m;
  return h;
}

int hamming(const Histogram& a, std::size_t i, const Histogram& b, std::size_t j) {
  int d = 0;
  for (std::size_t w = 0; w < a.stride; ++w) d += std::popcount(a.rows[i * a.stride + w] ^ b.rows[j * b.stride + w]);
  return d;
}

// Sum over ordered pairs of count products times q^d; optionally dropping self-pairs.
double kernel_mean(const Histogram& a, const Histogram& b, const std::vector<double>& qpow, bool same,
                   bool unbiased) {
  Accumulator acc;
  for (std::size_t i = 0; i < a.counts.size(); ++i) {
    for (std::size_t j = 0; j < b.counts.size(); ++j) {
      acc.add(a.counts[i] * b.counts[j] * qpow[static_cast<std::size_t>(hamming(a, i, b, j))]);
    }
  }
  if (same && unbiased) {
    // Diagonal terms contribute q^0 = 1 once per sample.
    acc.add(-a.total);
    return acc.value() / (a.total * (a.total - 1.0));
  }
  return acc.value() / (a.total * b.total);
}

void require_full_table(std::span<const double> t, int n, const char* which) {
  if (t.size() != (std::size_t{1} << n)) {
    throw DataError(std::string("expectation table ") + which + " does not cover all 2^n subsets");
  }
}

}  // namespace

void KernelSpec::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ConfigError("kernel bandwidth sigma must be > 0");
}

double default_sigma(int n) { return std::sqrt(static_cast<double>(n) / 4.0); }

PauliCoefficients pauli_coefficients(int n, double sigma) {
  if (!(sigma > 0.0)) throw ConfigError("kernel bandwidth sigma must be > 0");
  if (n < 1) throw ConfigError("width must be >= 1");
  const double q = std::exp(-1.0 / (2.0 * sigma * sigma));
  const double lo = 0.5 * (1.0 - q);
  const double hi = 0.5 * (1.0 + q);
  PauliCoefficients c{n, std::vector<double>(static_cast<std::size_t>(n) + 1)};
  for (int k = 0; k <= n; ++k) {
    c.lambda[static_cast<std::size_t>(k)] = std::pow(lo, k) * std::pow(hi, n - k);
  }
  return c;
}

double mmd_raw(const BitDataset& a, const BitDataset& b, const KernelSpec& kernel) {
  kernel.validate();
  if (a.width() != b.width()) {
    throw DataError("datasets have different widths (" + std::to_string(a.width()) + " vs " +
                    std::to_string(b.width()) + ")");
  }
  const bool unbiased = kernel.estimator == MmdEstimator::unbiased;
  if (unbiased && (a.size() < 2 || b.size() < 2)) throw DataError("unbiased MMD needs at least 2 samples per side");
  const int n = a.width();
  const double q = std::exp(-1.0 / (2.0 * kernel.sigma * kernel.sigma));
  std::vector<double> qpow(static_cast<std::size_t>(n) + 1, 1.0);
  for (std::size_t d = 1; d < qpow.size(); ++d) qpow[d] = qpow[d - 1] * q;
  const Histogram ha = histogram(a);
  const Histogram hb = histogram(b);
  return kernel_mean(ha, ha, qpow, true, unbiased) - 2.0 * kernel_mean(ha, hb, qpow, false, false) +
         kernel_mean(hb, hb, qpow, true, unbiased);
}

std::vector<double> empirical_z_expectations(const BitDataset& d) {
  const auto pmf = empirical_pmf(d);
  auto mass = pmf.dense_mass();
  std::vector<double> e(mass.begin(), mass.end());
  fwht_inplace(std::span<double>(e));
  return e;
}

double mmd_pauli(std::span<const double> exp_a, std::span<const double> exp_b, const PauliCoefficients& coeffs) {
  require_full_table(exp_a, coeffs.n, "A");
  require_full_table(exp_b, coeffs.n, "B");
  Accumulator acc;
  for (std::size_t s = 0; s < exp_a.size(); ++s) {
    const double d = exp_a[s] - exp_b[s];
    acc.add(coeffs.of_mask(s) * d * d);
  }
  return acc.value();
}

double mmd_pauli_truncated(std::span<const std::uint64_t> masks, std::span<const double> values_a,
                           std::span<const double> values_b, const PauliCoefficients& coeffs) {
  if (values_a.size() != masks.size() || values_b.size() != masks.size()) {
    throw DataError("truncated expectation tables must match the subset family");
  }
  Accumulator acc;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    const double d = values_a[i] - values_b[i];
    acc.add(coeffs.of_mask(masks[i]) * d * d);
  }
  return acc.value();
}

double mmd_loss(const IqpCircuit& c, std::span<const double> data_exp, const PauliCoefficients& coeffs) {
  if (coeffs.n != c.n) throw ConfigError("kernel coefficients built for a different width");
  const auto model = all_z_expectations(c);
  return mmd_pauli(model, data_exp, coeffs);
}

LossAndGradient mmd_loss_and_gradient(const IqpCircuit& c, std::span<const double> data_exp,
                                      const PauliCoefficients& coeffs) {
  if (coeffs.n != c.n) throw ConfigError("kernel coefficients built for a different width");
  const IqpState st = simulate(c);
  const std::size_t dim = st.probs.size();
  require_full_table(data_exp, c.n, "data");

  std::vector<double> model = st.probs;
  fwht_inplace(std::span<double>(model));

  // dL/dp(z) = sum_s 2 lambda_s (E_s - D_s) chi_s(z)
  LossAndGradient out;
  Accumulator loss;
  std::vector<double> residual(dim);
  for (std::size_t s = 0; s < dim; ++s) {
    const double d = model[s] - data_exp[s];
    const double lam = coeffs.of_mask(s);
    loss.add(lam * d * d);
    residual[s] = 2.0 * lam * d;
  }
  out.loss = loss.value();
  fwht_inplace(std::span<double>(residual));

  // Back through p = |a|^2 and a = 2^-n WHT(f): B(x) = 2^-n sum_z chi_z(x) G(z) conj(a(z)).
  std::vector<std::complex<double>> back(dim);
  for (std::size_t z = 0; z < dim; ++z) back[z] = residual[z] * std::conj(st.amplitude[z]);
  fwht_inplace(std::span<std::complex<double>>(back));
  const double scale = std::ldexp(1.0, -c.n);

  // With df/dtheta_s = i chi_s f:  dL/dtheta_s = -2 sum_x chi_s(x) Im(f(x) B(x)).
  std::vector<double> h(dim);
  for (std::size_t x = 0; x < dim; ++x) h[x] = std::imag(st.phase[x] * back[x]) * scale;
  fwht_inplace(std::span<double>(h));

  out.gradient.reserve(c.size());
  for (const auto& g : c.generators) out.gradient.push_back(-2.0 * h[g.mask]);
  return out;
}

std::vector<double> mmd_gradient(const IqpCircuit& c, std::span<const double> data_exp,
                                 const PauliCoefficients& coeffs) {
  return mmd_loss_and_gradient(c, data_exp, coeffs).gradient;
}

}  // namespace ccmap
