#include "ccmap/optim.hpp"

#include <cmath>
#include <random>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

OptimMethod parse_optim_method(std::string_view name) {
  if (name == "adam") return OptimMethod::adam;
  if (name == "spsa") return OptimMethod::spsa;
  throw ConfigError("unknown optimizer \"" + std::string(name) + "\" (expected adam or spsa)");
}

std::string to_string(OptimMethod m) { return m == OptimMethod::adam ? "adam" : "spsa"; }

void OptimizerConfig::validate() const {
  if (steps < 0) throw ConfigError("steps must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("Adam betas must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("Adam epsilon must be > 0");
  if (!(spsa_a > 0.0) || !(spsa_c > 0.0) || !(spsa_A >= 0.0)) throw ConfigError("SPSA gains must be positive");
}

std::string OptimizerConfig::to_json() const {
  nlohmann::ordered_json j;
  j["method"] = to_string(method);
  j["steps"] = steps;
  j["learning_rate"] = learning_rate;
  j["beta1"] = beta1;
  j["beta2"] = beta2;
  j["epsilon"] = epsilon;
  j["spsa_a"] = spsa_a;
  j["spsa_c"] = spsa_c;
  j["spsa_A"] = spsa_A;
  j["seed"] = seed;
  j["batch_samples"] = batch_samples;
  return j.dump();
}

OptimizerConfig OptimizerConfig::from_json(const std::string& text) {
  OptimizerConfig c;
  try {
    const auto j = nlohmann::json::parse(text);
    c.method = parse_optim_method(j.value("method", std::string("adam")));
    c.steps = j.value("steps", c.steps);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.epsilon = j.value("epsilon", c.epsilon);
    c.spsa_a = j.value("spsa_a", c.spsa_a);
    c.spsa_c = j.value("spsa_c", c.spsa_c);
    c.spsa_A = j.value("spsa_A", c.spsa_A);
    c.seed = j.value("seed", c.seed);
    c.batch_samples = j.value("batch_samples", c.batch_samples);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid optimizer config: ") + e.what());
  }
  c.validate();
  return c;
}

Adam::Adam(std::size_t size, const OptimizerConfig& cfg) : cfg_(cfg), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad, const std::vector<bool>& frozen) {
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
  const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (!frozen.empty() && frozen[i]) continue;
    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * grad[i];
    v_[i] = cfg_.beta2 * v_[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
    params[i] -= cfg_.learning_rate * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + cfg_.epsilon);
  }
}

double spsa_gain_a(const OptimizerConfig& cfg, int k) {
  return cfg.spsa_a / std::pow(static_cast<double>(k) + 1.0 + cfg.spsa_A, 0.602);
}

double spsa_gain_c(const OptimizerConfig& cfg, int k) {
  return cfg.spsa_c / std::pow(static_cast<double>(k) + 1.0, 0.101);
}

std::pair<double, double> spsa_step(std::vector<double>& params, const std::vector<bool>& frozen,
                                    const SpsaObjective& objective, const OptimizerConfig& cfg, int k,
                                    std::uint64_t stream) {
  std::mt19937_64 rng(mix_seed(mix_seed(cfg.seed, stream), static_cast<std::uint64_t>(k)));
  std::bernoulli_distribution coin(0.5);
  std::vector<double> delta(params.size(), 0.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (frozen.empty() || !frozen[i]) delta[i] = coin(rng) ? 1.0 : -1.0;
  }
  const double ck = spsa_gain_c(cfg, k);
  const double ak = spsa_gain_a(cfg, k);
  std::vector<double> plus = params;
  std::vector<double> minus = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    plus[i] += ck * delta[i];
    minus[i] -= ck * delta[i];
  }
  const std::uint64_t eval = 2 * static_cast<std::uint64_t>(k);
  const double fp = objective(plus, eval);
  const double fm = objective(minus, eval + 1);
  const double g = (fp - fm) / (2.0 * ck);
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (frozen.empty() || !frozen[i]) params[i] -= ak * g * delta[i];
  }
  return {fp, fm};
}

std::vector<bool> frozen_mask(std::size_t size, std::span<const std::size_t> indices) {
  std::vector<bool> mask(size, false);
  for (std::size_t i : indices) {
    if (i >= size) throw ConfigError("frozen index " + std::to_string(i) + " out of range");
    mask[i] = true;
  }
  return mask;
}

std::string param_checksum(std::span<const double> params) {
  std::string_view bytes(reinterpret_cast<const char*>(params.data()), params.size_bytes());
  return hex64(fnv1a64(bytes));
}

}  // namespace ccmap
