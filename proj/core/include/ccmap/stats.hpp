#pragma once

#include <span>
#include <vector>

namespace ccmap {

double mean(std::span<const double> x);
/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> x);

/// Ranks starting at 1; ties receive their average rank.
std::vector<double> average_ranks(std::span<const double> x);

double pearson(std::span<const double> x, std::span<const double> y);

struct Correlation {
  double rho = 0.0;
  double p_value = 1.0;  // two-sided, t approximation with n - 2 degrees of freedom
  std::size_t n = 0;
};

Correlation spearman(std::span<const double> x, std::span<const double> y);

}  // namespace ccmap
