#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ccmap/datasets.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/train.hpp"

namespace ccmap {

/// Binary RBM. Flat parameter order: weights row-major (visible x hidden), then visible
/// bias, then hidden bias. The latent block is defined on this order.
struct RbmModel {
  int n_visible = 0;
  int n_hidden = 0;
  std::vector<double> weights;
  std::vector<double> visible_bias;
  std::vector<double> hidden_bias;

  static RbmModel zeros(int n_visible, int n_hidden);

  std::size_t param_count() const noexcept { return weights.size() + visible_bias.size() + hidden_bias.size(); }
  std::vector<double> flat() const;
  void set_flat(std::span<const double> p);
  double weight(int v, int h) const {
    return weights[static_cast<std::size_t>(v) * static_cast<std::size_t>(n_hidden) + static_cast<std::size_t>(h)];
  }
  /// F(v) = -b.v - sum_j softplus(c_j + sum_i v_i W_ij), natural log units.
  double free_energy(std::span<const std::uint64_t> row) const;

  /// Throws NumericError on non-finite parameters.
  void validate() const;
  std::string to_json() const;
  static RbmModel from_json(const std::string& text);
};

struct RbmConfig {
  int n_hidden = 600;
  int epochs = 20;
  double learning_rate = 0.05;
  int cd_steps = 1;
  std::size_t batch_size = 64;
  double init_scale = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  std::string to_json() const;
};

struct RbmTrainResult {
  RbmModel model;
  std::vector<double> free_energy_history;  // mean data free energy after each epoch
};

/// Contrastive divergence from a small random initialisation.
RbmTrainResult rbm_train(const BitDataset& d, const RbmConfig& cfg, const std::vector<bool>& frozen = {});
/// Contrastive divergence warm-started from `init` (n_hidden taken from the model).
RbmTrainResult rbm_train_from(const RbmModel& init, const BitDataset& d, const RbmConfig& cfg,
                              const std::vector<bool>& frozen);

/// One block-Gibbs chain from a uniform random start: burn_in sweeps, then one sample every `thin` sweeps.
BitDataset rbm_sample(const RbmModel& m, std::size_t shots, std::size_t burn_in, std::size_t thin, std::uint64_t seed);

/// Exact visible marginal by enumeration (n_visible <= 20).
OutputDistribution rbm_distribution(const RbmModel& m);

inline constexpr std::size_t kDefaultLatentDim = 50;

/// Core model with its first d_lat flat parameters replaced by the interpolated latent block.
RbmModel rbm_latent_interpolate(const std::vector<LatentAnchor>& anchors, const RbmModel& core, double tau);

}  // namespace ccmap
