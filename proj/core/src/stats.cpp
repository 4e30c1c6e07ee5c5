#include "ccmap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/students_t.hpp>

#include "ccmap/error.hpp"

namespace ccmap {

double mean(std::span<const double> x) {
  if (x.empty()) throw DataError("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return std::sqrt(acc / static_cast<double>(x.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw DataError("correlation needs two equal-length samples of size >= 2");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

Correlation spearman(std::span<const double> x, std::span<const double> y) {
  Correlation c;
  c.n = x.size();
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  c.rho = pearson(rx, ry);
  if (c.n < 3) return c;
  const double df = static_cast<double>(c.n - 2);
  const double denom = std::max(1e-300, 1.0 - c.rho * c.rho);
  const double t = c.rho * std::sqrt(df / denom);
  boost::math::students_t dist(df);
  c.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return c;
}

}  // namespace ccmap
