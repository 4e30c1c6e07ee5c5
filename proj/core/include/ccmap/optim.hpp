#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ccmap {

enum class OptimMethod { adam, spsa };

OptimMethod parse_optim_method(std::string_view name);
std::string to_string(OptimMethod m);

struct OptimizerConfig {
  OptimMethod method = OptimMethod::adam;
  int steps = 5000;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // SPSA gains: a_k = a / (k + 1 + A)^0.602, c_k = c / (k + 1)^0.101
  double spsa_a = 0.2;
  double spsa_c = 0.1;
  double spsa_A = 10.0;
  std::uint64_t seed = 0;
  // 0 evaluates the exact loss; otherwise the number of samples per loss estimate.
  std::size_t batch_samples = 0;

  /// Throws ConfigError on steps < 0 or a nonpositive learning rate.
  void validate() const;
  std::string to_json() const;
  static OptimizerConfig from_json(const std::string& text);
};

/// Adam with per-parameter moments; frozen parameters are never touched. An empty mask freezes nothing.
class Adam {
 public:
  Adam(std::size_t size, const OptimizerConfig& cfg);
  void step(std::span<double> params, std::span<const double> grad, const std::vector<bool>& frozen);

 private:
  OptimizerConfig cfg_;
  std::vector<double> m_;
  std::vector<double> v_;
  int t_ = 0;
};

double spsa_gain_a(const OptimizerConfig& cfg, int k);
double spsa_gain_c(const OptimizerConfig& cfg, int k);

/// One SPSA minimisation step with Rademacher perturbations on the free parameters.
/// objective receives a parameter vector and an evaluation index (for fresh sampling seeds).
/// Returns the two objective values (plus, minus).
using SpsaObjective = std::function<double(std::span<const double>, std::uint64_t)>;
std::pair<double, double> spsa_step(std::vector<double>& params, const std::vector<bool>& frozen,
                                    const SpsaObjective& objective, const OptimizerConfig& cfg, int k,
                                    std::uint64_t stream);

/// Frozen mask of the given size from an index list; throws ConfigError on out-of-range indices.
std::vector<bool> frozen_mask(std::size_t size, std::span<const std::size_t> indices);

/// Checksum of a parameter vector (bit pattern), for run logs.
std::string param_checksum(std::span<const double> params);

}  // namespace ccmap
