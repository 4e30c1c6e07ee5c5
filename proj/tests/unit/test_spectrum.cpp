#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"
#include "ccmap/spectrum.hpp"
#include "helpers.hpp"

using namespace ccmap;

namespace {

// P(s) straight from the definition, one subset at a time.
double brute_power(const std::vector<double>& p, int n, std::uint64_t s) {
  const double e = testutil::direct_character_mean(p, s) * std::ldexp(1.0, -n);
  return e * e;
}

}  // namespace

TEST(WalshPower, UniformPmf) {
  const auto p = EmpiricalPmf::from_dense(2, {0.25, 0.25, 0.25, 0.25});
  const auto w = walsh_power(p);
  EXPECT_NEAR(w[0], 1.0 / 16.0, 1e-15);
  for (std::size_t s = 1; s < 4; ++s) EXPECT_NEAR(w[s], 0.0, 1e-18);
}

TEST(WalshPower, PointMassAtZero) {
  const int n = 5;
  std::vector<double> m(32, 0.0);
  m[0] = 1.0;
  const auto w = walsh_power(EmpiricalPmf::from_dense(n, m));
  for (double x : w) EXPECT_NEAR(x, std::ldexp(1.0, -2 * n), 1e-18);
}

TEST(WalshPower, EvenParityThreeBits) {
  const auto w = walsh_power(testutil::even_parity_pmf(3));
  for (std::size_t s = 0; s < 8; ++s) {
    const double expect = (s == 0 || s == 7) ? 1.0 / 64.0 : 0.0;
    EXPECT_NEAR(w[s], expect, 1e-15) << s;
  }
}

TEST(WalshPower, MatchesDirectSum) {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 7; ++n) {
    const auto p = testutil::random_pmf(n, rng, 0.3);
    const auto w = walsh_power(EmpiricalPmf::from_dense(n, p));
    for (std::uint64_t s = 0; s < (1ULL << n); ++s) EXPECT_NEAR(w[s], brute_power(p, n, s), 1e-15);
  }
}

TEST(WalshPower, Parseval) {
  std::mt19937_64 rng(6);
  for (int n : {3, 8, 12}) {
    const auto p = testutil::random_pmf(n, rng, 0.5);
    const auto w = walsh_power(EmpiricalPmf::from_dense(n, p));
    double lhs = std::accumulate(w.begin(), w.end(), 0.0);
    double rhs = 0.0;
    for (double x : p) rhs += x * x;
    EXPECT_NEAR(lhs, std::ldexp(rhs, -n), 1e-15);
  }
}

TEST(WalshPower, CapacityLimit) {
  const auto p = empirical_pmf(iid_uniform(25, 10, 1));
  EXPECT_THROW(walsh_power(p), CapacityError);
}

TEST(OrderSpectrum, Examples) {
  auto m = order_spectrum(walsh_power(testutil::even_parity_pmf(3)), 3);
  EXPECT_NEAR(m.m[0], 0.5, 1e-12);
  EXPECT_NEAR(m.m[1], 0.0, 1e-12);
  EXPECT_NEAR(m.m[2], 0.0, 1e-12);
  EXPECT_NEAR(m.m[3], 0.5, 1e-12);
  m.validate();

  std::vector<double> point(64, 0.0);
  point[0] = 1.0;
  const auto mp = order_spectrum(walsh_power(EmpiricalPmf::from_dense(6, point)), 6);
  const auto b = binomial_baseline(6);
  for (int k = 0; k <= 6; ++k) EXPECT_NEAR(mp.m[static_cast<std::size_t>(k)], b.m[static_cast<std::size_t>(k)], 1e-15);

  const auto mu = order_spectrum(walsh_power(EmpiricalPmf::from_dense(2, {0.25, 0.25, 0.25, 0.25})), 2);
  EXPECT_NEAR(mu.m[0], 1.0, 1e-15);
}

TEST(OrderSpectrum, ZeroPowerIsAnError) {
  std::vector<double> zeros(8, 0.0);
  EXPECT_THROW(order_spectrum(zeros, 3), DataError);
}

TEST(BinomialBaseline, Values) {
  const auto b2 = binomial_baseline(2);
  EXPECT_DOUBLE_EQ(b2.m[0], 0.25);
  EXPECT_DOUBLE_EQ(b2.m[1], 0.5);
  EXPECT_DOUBLE_EQ(b2.m[2], 0.25);
  const auto b1 = binomial_baseline(1);
  EXPECT_DOUBLE_EQ(b1.m[0], 0.5);
  EXPECT_DOUBLE_EQ(b1.m[1], 0.5);
  for (int n = 1; n <= 64; ++n) {
    const auto b = binomial_baseline(n);
    EXPECT_NEAR(std::accumulate(b.m.begin(), b.m.end(), 0.0), 1.0, 1e-12) << n;
  }
  const auto wide = binomial_baseline(200);
  EXPECT_NEAR(std::accumulate(wide.m.begin(), wide.m.end(), 0.0), 1.0, 1e-10);
}

TEST(JsDivergence, IdentityAndSymmetry) {
  const auto b = binomial_baseline(9);
  EXPECT_NEAR(js_divergence(b, b), 0.0, 1e-15);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    OrderSpectrum x{9, std::vector<double>(10)}, y{9, std::vector<double>(10)};
    double sx = 0, sy = 0;
    for (int k = 0; k < 10; ++k) {
      sx += x.m[static_cast<std::size_t>(k)] = u(rng);
      sy += y.m[static_cast<std::size_t>(k)] = u(rng);
    }
    for (auto& v : x.m) v /= sx;
    for (auto& v : y.m) v /= sy;
    EXPECT_NEAR(js_divergence(x, y), js_divergence(y, x), 1e-15);
    EXPECT_GE(js_divergence(x, y), 0.0);
    EXPECT_LE(js_divergence(x, y), 1.0);
  }
}

TEST(JsDivergence, DeltaAtZeroVersusBaselineN16) {
  // 50-digit evaluation of the clipped, renormalised divergence.
  OrderSpectrum m{16, std::vector<double>(17, 0.0)};
  m.m[0] = 1.0;
  EXPECT_NEAR(js_divergence(m, binomial_baseline(16)), 0.99986692243518928088, 1e-12);
}

TEST(JsDivergence, WidthMismatch) {
  EXPECT_THROW(js_divergence(binomial_baseline(3), binomial_baseline(4)), DataError);
}

TEST(Qcli, EvenParityAboveIid) {
  const auto par = qcli_exact(testutil::even_parity_samples(8, 10000, 3)).qcli;
  const auto iid = qcli_exact(iid_uniform(8, 10000, 3)).qcli;
  EXPECT_GT(par, iid);
}

TEST(Qcli, PermutationInvariance) {
  const auto d = testutil::random_dataset(12, 3000, 8);
  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(2);
  for (int t = 0; t < 5; ++t) {
    std::shuffle(perm.begin(), perm.end(), rng);
    EXPECT_NEAR(qcli_exact(d.permute_bits(perm)).qcli, qcli_exact(d).qcli, 1e-12);
  }
}

TEST(Qcli, BoundedScale) {
  for (std::uint64_t s = 1; s <= 10; ++s) {
    const double q = qcli_exact(testutil::random_dataset(10, 500, s)).qcli;
    EXPECT_GE(q, 0.0);
    EXPECT_LE(q, 1.0);
  }
}

TEST(Qcli, FiniteSampleNullMatchesKrawtchoukExpectation) {
  // For i.i.d. fair bits, E[E_s^2] = 1/M for every s != 0, so the order-k sum of E_s^2
  // has mean C(n,k)/M and (chi-square approximation) variance 2 C(n,k)/M^2.
  const int n = 16;
  const std::size_t M = 10000;
  const int seeds = 10;
  std::vector<double> acc(n + 1, 0.0);
  for (int s = 1; s <= seeds; ++s) {
    const auto w = walsh_power(empirical_pmf(iid_uniform(n, M, static_cast<std::uint64_t>(s))));
    for (std::size_t mask = 1; mask < w.size(); ++mask) acc[static_cast<std::size_t>(std::popcount(mask))] += w[mask] * std::ldexp(1.0, 2 * n);
  }
  for (int k = 1; k <= n; ++k) {
    const double c = binomial(n, k);
    const double mean = acc[static_cast<std::size_t>(k)] / seeds;
    const double se = std::sqrt(2.0 * c / seeds) / static_cast<double>(M);
    EXPECT_NEAR(mean, c / static_cast<double>(M), 3.0 * se) << "k=" << k;
  }
}

TEST(McAllocation, EqualPerOrderWithCaps) {
  const auto a = mc_allocation(16, 20000);
  ASSERT_EQ(a.size(), 17u);
  EXPECT_EQ(std::accumulate(a.begin(), a.end(), std::size_t{0}), 20000u);
  for (int k = 0; k <= 16; ++k) EXPECT_LE(a[static_cast<std::size_t>(k)], binomial_saturating(16, k));
  EXPECT_EQ(a[0], 1u);
  EXPECT_EQ(a[1], 16u);
  // floor(20000/17) = 1176 is below C(16,8) = 12870, so the middle order gets at least that.
  EXPECT_GE(a[8], 1176u);

  // 2^14 = 16384 subsets fit in the default budget: every stratum is exhausted.
  const auto full = mc_allocation(14, 20000);
  for (int k = 0; k <= 14; ++k) EXPECT_EQ(full[static_cast<std::size_t>(k)], binomial_saturating(14, k));

  const auto small = mc_allocation(4, 1000);
  EXPECT_EQ(std::accumulate(small.begin(), small.end(), std::size_t{0}), 16u);
  EXPECT_THROW(mc_allocation(10, 10), ConfigError);
}

TEST(QcliMc, ExhaustedStrataGiveTheExactValue) {
  const auto d = testutil::random_dataset(8, 2000, 4);
  const auto exact = qcli_exact(d);
  const auto mc = qcli_mc(d, 256, 7);
  EXPECT_NEAR(mc.qcli, exact.qcli, 1e-12);
  for (int k = 0; k <= 8; ++k) EXPECT_NEAR(mc.m.m[static_cast<std::size_t>(k)], exact.m.m[static_cast<std::size_t>(k)], 1e-12);
}

TEST(QcliMc, DeterministicPerSeed) {
  const auto d = testutil::random_dataset(20, 1000, 4);
  const auto a = qcli_mc(d, 2000, 9);
  const auto b = qcli_mc(d, 2000, 9);
  EXPECT_EQ(a.qcli, b.qcli);
  EXPECT_EQ(a.m.m, b.m.m);
  EXPECT_THROW(qcli_mc(d, 20, 1), ConfigError);
}

TEST(QcliMc, WorksBeyondDenseLimit) {
  const auto d = testutil::random_dataset(40, 2000, 12);
  const auto r = qcli_mc(d, 4000, 1);
  r.m.validate();
  EXPECT_GT(r.qcli, 0.0);
}

TEST(QcliMc, CloseToExactAtN14) {
  for (auto make : {+[](std::uint64_t s) { return iid_uniform(14, 10000, s); },
                    +[](std::uint64_t s) { return testutil::random_dataset(14, 10000, s); }}) {
    const auto d = make(1);
    const double exact = qcli_exact(d).qcli;
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) acc += std::abs(qcli_mc(d, kDefaultMcBudget, seed).qcli - exact);
    EXPECT_LE(acc / 10.0, 0.02);
  }
}

// n=16: the middle orders are only partly sampled at the default budget
TEST(QcliMc, CloseToExactWhenSampling) {
  ASSERT_LT(mc_allocation(16, kDefaultMcBudget)[8], binomial(16, 8));
  for (auto make : {+[](std::uint64_t s) { return iid_uniform(16, 10000, s); },
                    +[](std::uint64_t s) { return testutil::even_parity_samples(16, 10000, s); }}) {
    const auto d = make(3);
    const double exact = qcli_exact(d).qcli;
    double acc = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) acc += std::abs(qcli_mc(d, kDefaultMcBudget, seed).qcli - exact);
    EXPECT_LE(acc / 10.0, 0.02);
  }
}

TEST(SecondOrder, ZeroAtBaselineAndAccurateNearIt) {
  const auto b = binomial_baseline(16);
  EXPECT_EQ(second_order_js(b, b), 0.0);
  EXPECT_EQ(tv_distance(b, b), 0.0);
  std::mt19937_64 rng(3);
  const double bmin = *std::min_element(b.m.begin(), b.m.end());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int t = 0; t < 20; ++t) {
    std::vector<double> d(17);
    for (auto& x : d) x = u(rng);
    const double mean = std::accumulate(d.begin(), d.end(), 0.0) / 17.0;
    double peak = 0.0;
    for (auto& x : d) peak = std::max(peak, std::abs(x -= mean));
    OrderSpectrum m = b;
    for (std::size_t k = 0; k < 17; ++k) m.m[k] += d[k] / peak * 0.01 * bmin;
    const double js = js_divergence(m, b, 0.0);
    EXPECT_LE(std::abs(js - second_order_js(m, b)) / js, 0.05);
    EXPECT_LE(tv_distance(m, b), std::sqrt(2.0 * std::log(2.0) * js) * 1.05);
  }
}
