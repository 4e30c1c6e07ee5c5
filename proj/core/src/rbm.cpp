#include "ccmap/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/error.hpp"

namespace ccmap {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

void hidden_probs(const RbmModel& m, std::span<const double> v, std::span<double> out) {
  const auto nh = static_cast<std::size_t>(m.n_hidden);
  for (std::size_t j = 0; j < nh; ++j) out[j] = m.hidden_bias[j];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    const double* w = &m.weights[i * nh];
    for (std::size_t j = 0; j < nh; ++j) out[j] += v[i] * w[j];
  }
  for (std::size_t j = 0; j < nh; ++j) out[j] = sigmoid(out[j]);
}

void visible_probs(const RbmModel& m, std::span<const double> h, std::span<double> out) {
  const auto nh = static_cast<std::size_t>(m.n_hidden);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double* w = &m.weights[i * nh];
    double a = m.visible_bias[i];
    for (std::size_t j = 0; j < nh; ++j) a += w[j] * h[j];
    out[i] = sigmoid(a);
  }
}

void bernoulli(std::span<const double> p, std::span<double> out, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t i = 0; i < p.size(); ++i) out[i] = u(rng) < p[i] ? 1.0 : 0.0;
}

std::vector<double> row_values(const BitDataset& d, std::size_t r) {
  std::vector<double> v(static_cast<std::size_t>(d.width()));
  for (int q = 0; q < d.width(); ++q) v[static_cast<std::size_t>(q)] = d.bit(r, q) ? 1.0 : 0.0;
  return v;
}

double mean_free_energy(const RbmModel& m, const BitDataset& d) {
  double acc = 0.0;
  for (std::size_t r = 0; r < d.size(); ++r) acc += m.free_energy(d.row(r));
  return acc / static_cast<double>(d.size());
}

}  // namespace

RbmModel RbmModel::zeros(int n_visible, int n_hidden) {
  if (n_visible < 1 || n_hidden < 1) throw ConfigError("RBM needs at least one visible and one hidden unit");
  RbmModel m;
  m.n_visible = n_visible;
  m.n_hidden = n_hidden;
  m.weights.assign(static_cast<std::size_t>(n_visible) * static_cast<std::size_t>(n_hidden), 0.0);
  m.visible_bias.assign(static_cast<std::size_t>(n_visible), 0.0);
  m.hidden_bias.assign(static_cast<std::size_t>(n_hidden), 0.0);
  return m;
}

std::vector<double> RbmModel::flat() const {
  std::vector<double> p;
  p.reserve(param_count());
  p.insert(p.end(), weights.begin(), weights.end());
  p.insert(p.end(), visible_bias.begin(), visible_bias.end());
  p.insert(p.end(), hidden_bias.begin(), hidden_bias.end());
  return p;
}

void RbmModel::set_flat(std::span<const double> p) {
  if (p.size() != param_count()) throw ConfigError("flat RBM parameter vector has the wrong length");
  auto it = p.begin();
  std::copy(it, it + static_cast<std::ptrdiff_t>(weights.size()), weights.begin());
  it += static_cast<std::ptrdiff_t>(weights.size());
  std::copy(it, it + n_visible, visible_bias.begin());
  it += n_visible;
  std::copy(it, it + n_hidden, hidden_bias.begin());
}

double RbmModel::free_energy(std::span<const std::uint64_t> row) const {
  const auto nh = static_cast<std::size_t>(n_hidden);
  std::vector<double> act(hidden_bias);
  double vis = 0.0;
  for (int i = 0; i < n_visible; ++i) {
    if (!((row[static_cast<std::size_t>(i / 64)] >> (i % 64)) & 1U)) continue;
    vis += visible_bias[static_cast<std::size_t>(i)];
    const double* w = &weights[static_cast<std::size_t>(i) * nh];
    for (std::size_t j = 0; j < nh; ++j) act[j] += w[j];
  }
  double f = -vis;
  for (double a : act) f -= softplus(a);
  return f;
}

void RbmModel::validate() const {
  for (double x : flat()) {
    if (!std::isfinite(x)) throw NumericError("RBM has non-finite parameters", to_json());
  }
}

std::string RbmModel::to_json() const {
  nlohmann::ordered_json j;
  j["n_visible"] = n_visible;
  j["n_hidden"] = n_hidden;
  j["flat_order"] = "weights_row_major,visible_bias,hidden_bias";
  auto& p = j["params"] = nlohmann::json::array();
  for (double x : flat()) p.push_back(std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr));
  return j.dump();
}

RbmModel RbmModel::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RbmModel m = zeros(j.at("n_visible").get<int>(), j.at("n_hidden").get<int>());
    m.set_flat(j.at("params").get<std::vector<double>>());
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid RBM JSON: ") + e.what());
  }
}

void RbmConfig::validate() const {
  if (n_hidden < 1) throw ConfigError("RBM hidden units must be >= 1");
  if (epochs < 0) throw ConfigError("RBM epochs must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("RBM learning rate must be > 0");
  if (cd_steps < 1) throw ConfigError("contrastive divergence steps must be >= 1");
  if (batch_size < 1) throw ConfigError("RBM batch size must be >= 1");
  if (!(init_scale >= 0.0)) throw ConfigError("RBM init scale must be >= 0");
}

std::string RbmConfig::to_json() const {
  nlohmann::ordered_json j;
  j["n_hidden"] = n_hidden;
  j["epochs"] = epochs;
  j["learning_rate"] = learning_rate;
  j["cd_steps"] = cd_steps;
  j["batch_size"] = batch_size;
  j["init_scale"] = init_scale;
  j["seed"] = seed;
  return j.dump();
}

RbmTrainResult rbm_train(const BitDataset& d, const RbmConfig& cfg, const std::vector<bool>& frozen) {
  cfg.validate();
  RbmModel m = RbmModel::zeros(d.width(), cfg.n_hidden);
  std::mt19937_64 rng(mix_seed(cfg.seed, 0x1a17));
  std::normal_distribution<double> normal(0.0, cfg.init_scale);
  for (double& w : m.weights) w = normal(rng);
  return rbm_train_from(m, d, cfg, frozen.empty() ? std::vector<bool>(m.param_count(), false) : frozen);
}

RbmTrainResult rbm_train_from(const RbmModel& init, const BitDataset& d, const RbmConfig& cfg,
                              const std::vector<bool>& frozen) {
  cfg.validate();
  if (d.width() != init.n_visible) {
    throw DataError("data width " + std::to_string(d.width()) + " does not match " + std::to_string(init.n_visible) +
                    " visible units");
  }
  if (!frozen.empty() && frozen.size() != init.param_count()) throw ConfigError("frozen mask does not match the RBM parameter count");

  RbmTrainResult out;
  out.model = init;
  RbmModel& m = out.model;
  const auto nv = static_cast<std::size_t>(m.n_visible);
  const auto nh = static_cast<std::size_t>(m.n_hidden);
  const std::size_t wcount = nv * nh;
  std::mt19937_64 rng(mix_seed(cfg.seed, 0xcd));

  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> grad(m.param_count());
  std::vector<double> ph0(nh), h(nh), phk(nh), pv(nv), vk(nv);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t b = start; b < end; ++b) {
        const auto v0 = row_values(d, order[b]);
        hidden_probs(m, v0, ph0);
        bernoulli(ph0, h, rng);
        for (int k = 0; k < cfg.cd_steps; ++k) {
          visible_probs(m, h, pv);
          bernoulli(pv, vk, rng);
          hidden_probs(m, vk, phk);
          if (k + 1 < cfg.cd_steps) bernoulli(phk, h, rng);
        }
        for (std::size_t i = 0; i < nv; ++i) {
          for (std::size_t j = 0; j < nh; ++j) grad[i * nh + j] += v0[i] * ph0[j] - vk[i] * phk[j];
          grad[wcount + i] += v0[i] - vk[i];
        }
        for (std::size_t j = 0; j < nh; ++j) grad[wcount + nv + j] += ph0[j] - phk[j];
      }
      const double scale = cfg.learning_rate / static_cast<double>(end - start);
      auto p = m.flat();
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (frozen.empty() || !frozen[i]) p[i] += scale * grad[i];
      }
      m.set_flat(p);
    }
    m.validate();
    out.free_energy_history.push_back(mean_free_energy(m, d));
  }
  return out;
}

BitDataset rbm_sample(const RbmModel& m, std::size_t shots, std::size_t burn_in, std::size_t thin,
                      std::uint64_t seed) {
  if (shots == 0) throw ConfigError("shots must be >= 1");
  if (thin == 0) throw ConfigError("thinning interval must be >= 1");
  const auto nv = static_cast<std::size_t>(m.n_visible);
  const auto nh = static_cast<std::size_t>(m.n_hidden);
  std::mt19937_64 rng(mix_seed(seed, 0x9bb5));
  std::vector<double> v(nv), pv(nv), h(nh), ph(nh);
  std::bernoulli_distribution coin(0.5);
  for (double& x : v) x = coin(rng) ? 1.0 : 0.0;
  const auto sweep = [&] {
    hidden_probs(m, v, ph);
    bernoulli(ph, h, rng);
    visible_probs(m, h, pv);
    bernoulli(pv, v, rng);
  };
  for (std::size_t i = 0; i < burn_in; ++i) sweep();
  const std::size_t stride = words_for_bits(m.n_visible);
  std::vector<std::uint64_t> words(shots * stride, 0);
  for (std::size_t s = 0; s < shots; ++s) {
    for (std::size_t t = 0; t < thin; ++t) sweep();
    for (std::size_t i = 0; i < nv; ++i) {
      if (v[i] != 0.0) words[s * stride + i / 64] |= std::uint64_t{1} << (i % 64);
    }
  }
  return BitDataset(m.n_visible, std::move(words));
}

OutputDistribution rbm_distribution(const RbmModel& m) {
  if (m.n_visible > kIqpDenseLimit) throw CapacityError("exact RBM marginal needs n_visible <= 20");
  const std::size_t dim = std::size_t{1} << m.n_visible;
  OutputDistribution out{m.n_visible, std::vector<double>(dim)};
  std::vector<double> logp(dim);
  double top = -std::numeric_limits<double>::infinity();
  for (std::uint64_t x = 0; x < dim; ++x) {
    logp[x] = -m.free_energy(std::span<const std::uint64_t>(&x, 1));
    top = std::max(top, logp[x]);
  }
  double z = 0.0;
  for (std::size_t x = 0; x < dim; ++x) z += (out.probs[x] = std::exp(logp[x] - top));
  for (double& p : out.probs) p /= z;
  return out;
}

RbmModel rbm_latent_interpolate(const std::vector<LatentAnchor>& anchors, const RbmModel& core, double tau) {
  const auto lat = interpolate_latent(anchors, tau).theta_lat;
  if (lat.size() > core.param_count()) throw ConfigError("latent block longer than the RBM parameter vector");
  auto p = core.flat();
  std::copy(lat.begin(), lat.end(), p.begin());
  RbmModel m = core;
  m.set_flat(p);
  return m;
}

}  // namespace ccmap
