#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ccmap/datasets.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/mmd.hpp"
#include "ccmap/optim.hpp"

namespace ccmap {

struct StepRecord {
  int step = 0;
  double loss = 0.0;
  double qcli = -1.0;  // negative when not evaluated
  double cci = -1.0;
  std::string param_checksum;

  std::string to_json_line() const;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct TrainResult {
  IqpCircuit circuit;
  // loss_history[k] is the loss before update k; the last entry is the final loss.
  std::vector<double> loss_history;

  double initial_loss() const { return loss_history.front(); }
  double final_loss() const { return loss_history.back(); }
};

/// Minimises the MMD between the circuit and the data. Adam follows the exact analytic
/// gradient (with batch_samples > 0, against a fresh data minibatch each step); SPSA perturbs the
/// exact loss, or with batch_samples > 0 the sampled raw estimator. Frozen parameters never
/// change. A non-finite loss throws NumericError carrying a state dump.
TrainResult train_mmd(const IqpCircuit& c, const BitDataset& data, const KernelSpec& kernel,
                      const OptimizerConfig& opt, const std::vector<bool>& frozen,
                      const StepObserver& observer = {});

struct QcliPoint {
  int step = 0;
  double qcli = 0.0;
  double cci = 0.0;
};

struct QcliMaxResult {
  IqpCircuit circuit;
  std::vector<QcliPoint> trajectory;  // current circuit evaluated at steps 0..steps
};

/// SPSA ascent on the QCLI of fresh samples. CCI is only logged; the objective closure never
/// sees it.
QcliMaxResult maximize_qcli(const IqpCircuit& c, const OptimizerConfig& opt, std::size_t shots_per_eval,
                            const StepObserver& observer = {});

/// Latent block = first d_lat positions of the canonical ordering; core = the rest.
struct ParamPartition {
  std::vector<std::size_t> latent;
  std::vector<std::size_t> core;

  static ParamPartition leading(std::size_t total, std::size_t d_lat);
  std::size_t total() const noexcept { return latent.size() + core.size(); }
  void validate(std::size_t total_params) const;
  std::vector<bool> latent_frozen() const;  // freezes the latent block
  std::vector<bool> core_frozen() const;    // freezes the core block
};

struct LatentAnchor {
  double t = 0.0;
  std::vector<double> theta_lat;
};

struct LatentTrajectory {
  IqpCircuit circuit_template;  // canonical structure; its angles hold the core
  ParamPartition partition;
  std::vector<LatentAnchor> anchors;

  std::vector<double> core() const;
  /// Template with the latent block replaced by the given vector.
  IqpCircuit assemble(std::span<const double> theta_lat) const;
  void validate() const;

  std::string to_json() const;
  static LatentTrajectory from_json(const std::string& text);
};

struct FitCoreResult {
  LatentTrajectory trajectory;  // one anchor at t, latent block at its initial values
  TrainResult training;
};

/// Trains only the core; the latent block stays at the template's initial angles.
FitCoreResult fit_core(const IqpCircuit& template_circuit, const BitDataset& data, double t,
                       const ParamPartition& partition, const KernelSpec& kernel, const OptimizerConfig& opt,
                       const StepObserver& observer = {});

struct AdaptResult {
  LatentTrajectory trajectory;
  TrainResult training;
};

/// Warm-starts from the last anchor and trains only the latent block; appends an anchor at t.
AdaptResult adapt_latent(const LatentTrajectory& traj, const BitDataset& data, double t, const KernelSpec& kernel,
                         const OptimizerConfig& opt, const StepObserver& observer = {});

struct InterpolatedLatent {
  std::vector<double> theta_lat;
  bool extrapolated = false;
};

/// Piecewise-linear in tau; outside the anchor range extends the nearest segment (flagged).
/// Throws ConfigError with fewer than 2 anchors.
InterpolatedLatent interpolate_latent(const std::vector<LatentAnchor>& anchors, double tau);
InterpolatedLatent interpolate_latent(const LatentTrajectory& traj, double tau);

IqpCircuit circuit_at(const LatentTrajectory& traj, double tau);
BitDataset generate_snapshot(const LatentTrajectory& traj, double tau, std::size_t shots, std::uint64_t seed);

}  // namespace ccmap
