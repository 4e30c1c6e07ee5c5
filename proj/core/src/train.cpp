#include "ccmap/train.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <json.hpp>

#include "ccmap/bits.hpp"
#include "ccmap/cci.hpp"
#include "ccmap/error.hpp"
#include "ccmap/spectrum.hpp"

namespace ccmap {

namespace {

std::string state_dump(int step, double loss, std::span<const double> params) {
  using J = nlohmann::ordered_json;
  J j;
  j["step"] = step;
  j["loss"] = std::isfinite(loss) ? J(loss) : J(std::to_string(loss));
  j["param_checksum"] = param_checksum(params);
  auto& p = j["params"] = J::array();
  for (double x : params) p.push_back(std::isfinite(x) ? J(x) : J(std::to_string(x)));
  return j.dump();
}

void require_finite(int step, double loss, std::span<const double> params) {
  if (!std::isfinite(loss)) {
    throw NumericError("non-finite loss at step " + std::to_string(step), state_dump(step, loss, params));
  }
}

BitDataset minibatch(const BitDataset& data, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  std::vector<std::size_t> idx(count);
  for (auto& i : idx) i = pick(rng);
  return data.select(idx);
}

void check_frozen(const IqpCircuit& c, const std::vector<bool>& frozen) {
  if (!frozen.empty() && frozen.size() != c.size()) {
    throw ConfigError("frozen mask has " + std::to_string(frozen.size()) + " entries for " +
                      std::to_string(c.size()) + " parameters");
  }
}

}  // namespace

std::string StepRecord::to_json_line() const {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["loss"] = loss;
  if (qcli >= 0.0) j["qcli"] = qcli;
  if (cci >= 0.0) j["cci"] = cci;
  j["paramChecksum"] = param_checksum;
  return j.dump();
}

TrainResult train_mmd(const IqpCircuit& c, const BitDataset& data, const KernelSpec& kernel,
                      const OptimizerConfig& opt, const std::vector<bool>& frozen, const StepObserver& observer) {
  opt.validate();
  kernel.validate();
  c.validate();
  check_frozen(c, frozen);
  if (data.width() != c.n) {
    throw DataError("data width " + std::to_string(data.width()) + " does not match circuit width " +
                    std::to_string(c.n));
  }
  const PauliCoefficients coeffs = pauli_coefficients(c.n, kernel.sigma);
  const std::vector<double> target = empirical_z_expectations(data);

  TrainResult out;
  out.circuit = c;
  std::vector<double> params = c.params();
  const auto emit = [&](int step, double loss) {
    out.loss_history.push_back(loss);
    if (observer) observer({step, loss, -1.0, -1.0, param_checksum(params)});
  };

  if (opt.method == OptimMethod::adam) {
    Adam adam(params.size(), opt);
    for (int step = 0; step < opt.steps; ++step) {
      out.circuit.set_params(params);
      LossAndGradient lg;
      if (opt.batch_samples > 0) {
        const auto batch = minibatch(data, opt.batch_samples, mix_seed(opt.seed, static_cast<std::uint64_t>(step)));
        lg = mmd_loss_and_gradient(out.circuit, empirical_z_expectations(batch), coeffs);
      } else {
        lg = mmd_loss_and_gradient(out.circuit, target, coeffs);
      }
      require_finite(step, lg.loss, params);
      emit(step, lg.loss);
      adam.step(params, lg.gradient, frozen);
    }
  } else {
    const auto objective = [&](std::span<const double> theta, std::uint64_t eval) {
      IqpCircuit probe = out.circuit;
      probe.set_params(theta);
      if (opt.batch_samples == 0) return mmd_loss(probe, target, coeffs);
      const std::uint64_t s = mix_seed(opt.seed, 0x100000000ULL + eval);
      const auto model = sample(probe, opt.batch_samples, s);
      return mmd_raw(model, minibatch(data, opt.batch_samples, mix_seed(s, 1)), kernel);
    };
    for (int step = 0; step < opt.steps; ++step) {
      out.circuit.set_params(params);
      const double loss = mmd_loss(out.circuit, target, coeffs);
      require_finite(step, loss, params);
      emit(step, loss);
      const auto [fp, fm] = spsa_step(params, frozen, objective, opt, step, 0x7a11);
      if (!std::isfinite(fp) || !std::isfinite(fm)) require_finite(step, std::isfinite(fp) ? fm : fp, params);
    }
  }
  out.circuit.set_params(params);
  const double final_loss = mmd_loss(out.circuit, target, coeffs);
  require_finite(opt.steps, final_loss, params);
  emit(opt.steps, final_loss);
  return out;
}

QcliMaxResult maximize_qcli(const IqpCircuit& c, const OptimizerConfig& opt, std::size_t shots_per_eval,
                            const StepObserver& observer) {
  opt.validate();
  c.validate();
  if (opt.method != OptimMethod::spsa) {
    throw ConfigError("QCLI maximisation requires SPSA (the sampled objective has no gradient)");
  }
  if (shots_per_eval < 2) throw ConfigError("shots per evaluation must be >= 2");

  QcliMaxResult out;
  out.circuit = c;
  std::vector<double> params = c.params();
  const std::vector<bool> frozen(params.size(), false);

  // Objective sees only QCLI of fresh samples.
  const auto objective = [&](std::span<const double> theta, std::uint64_t eval) {
    IqpCircuit probe = c;
    probe.set_params(theta);
    const auto d = sample(probe, shots_per_eval, mix_seed(opt.seed, 0x200000000ULL + eval));
    return -qcli_exact(d).qcli;
  };
  const auto log_point = [&](int step) {
    out.circuit.set_params(params);
    const auto d = sample(out.circuit, shots_per_eval, mix_seed(opt.seed, 0x300000000ULL + static_cast<std::uint64_t>(step)));
    const auto pmf = empirical_pmf(d);
    const QcliPoint p{step, qcli_exact(pmf).qcli, cci(pmf).cci};
    out.trajectory.push_back(p);
    if (observer) observer({step, -p.qcli, p.qcli, p.cci, param_checksum(params)});
  };

  log_point(0);
  for (int step = 0; step < opt.steps; ++step) {
    spsa_step(params, frozen, objective, opt, step, 0x9c11);
    log_point(step + 1);
  }
  out.circuit.set_params(params);
  return out;
}

ParamPartition ParamPartition::leading(std::size_t total, std::size_t d_lat) {
  if (d_lat > total) {
    throw ConfigError("latent dimension " + std::to_string(d_lat) + " exceeds parameter count " +
                      std::to_string(total));
  }
  ParamPartition p;
  for (std::size_t i = 0; i < total; ++i) (i < d_lat ? p.latent : p.core).push_back(i);
  return p;
}

void ParamPartition::validate(std::size_t total_params) const {
  std::vector<int> seen(total_params, 0);
  for (const auto* block : {&latent, &core}) {
    for (std::size_t i : *block) {
      if (i >= total_params) throw ConfigError("partition index out of range");
      if (seen[i]++) throw ConfigError("partition blocks overlap");
    }
  }
  if (total() != total_params) throw ConfigError("partition does not cover every parameter");
}

std::vector<bool> ParamPartition::latent_frozen() const { return frozen_mask(total(), latent); }
std::vector<bool> ParamPartition::core_frozen() const { return frozen_mask(total(), core); }

std::vector<double> LatentTrajectory::core() const {
  const auto p = circuit_template.params();
  std::vector<double> out;
  out.reserve(partition.core.size());
  for (std::size_t i : partition.core) out.push_back(p[i]);
  return out;
}

IqpCircuit LatentTrajectory::assemble(std::span<const double> theta_lat) const {
  if (theta_lat.size() != partition.latent.size()) throw ConfigError("latent vector has the wrong length");
  IqpCircuit c = circuit_template;
  auto p = c.params();
  for (std::size_t k = 0; k < theta_lat.size(); ++k) p[partition.latent[k]] = theta_lat[k];
  c.set_params(p);
  return c;
}

void LatentTrajectory::validate() const {
  circuit_template.validate();
  partition.validate(circuit_template.size());
  for (std::size_t k = 0; k < anchors.size(); ++k) {
    if (anchors[k].theta_lat.size() != partition.latent.size()) throw ConfigError("anchor latent length mismatch");
    if (k > 0 && !(anchors[k].t > anchors[k - 1].t)) throw ConfigError("anchor times must be strictly increasing");
  }
}

std::string LatentTrajectory::to_json() const {
  nlohmann::ordered_json j;
  j["circuit_template"] = nlohmann::ordered_json::parse(circuit_template.to_json());
  j["latent_indices"] = partition.latent;
  j["core_indices"] = partition.core;
  auto& a = j["anchors"] = nlohmann::json::array();
  for (const auto& anchor : anchors) a.push_back({{"t", anchor.t}, {"theta_lat", anchor.theta_lat}});
  return j.dump(2);
}

LatentTrajectory LatentTrajectory::from_json(const std::string& text) {
  LatentTrajectory traj;
  try {
    const auto j = nlohmann::json::parse(text);
    traj.circuit_template = IqpCircuit::from_json(j.at("circuit_template").dump());
    traj.partition.latent = j.at("latent_indices").get<std::vector<std::size_t>>();
    traj.partition.core = j.at("core_indices").get<std::vector<std::size_t>>();
    for (const auto& a : j.at("anchors")) {
      traj.anchors.push_back({a.at("t").get<double>(), a.at("theta_lat").get<std::vector<double>>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid trajectory JSON: ") + e.what());
  }
  traj.validate();
  return traj;
}

FitCoreResult fit_core(const IqpCircuit& template_circuit, const BitDataset& data, double t,
                       const ParamPartition& partition, const KernelSpec& kernel, const OptimizerConfig& opt,
                       const StepObserver& observer) {
  partition.validate(template_circuit.size());
  if (!template_circuit.canonical) throw ConfigError("the latent block is defined on a canonical circuit");
  FitCoreResult out;
  out.training = train_mmd(template_circuit, data, kernel, opt, partition.latent_frozen(), observer);
  out.trajectory.circuit_template = out.training.circuit;
  out.trajectory.partition = partition;
  const auto p = template_circuit.params();
  LatentAnchor first{t, {}};
  for (std::size_t i : partition.latent) first.theta_lat.push_back(p[i]);
  out.trajectory.anchors.push_back(std::move(first));
  return out;
}

AdaptResult adapt_latent(const LatentTrajectory& traj, const BitDataset& data, double t, const KernelSpec& kernel,
                         const OptimizerConfig& opt, const StepObserver& observer) {
  if (traj.anchors.empty()) throw ConfigError("latent adaptation needs at least one anchor");
  if (!(t > traj.anchors.back().t)) throw ConfigError("new anchor time must follow the last anchor");
  AdaptResult out;
  const IqpCircuit start = traj.assemble(traj.anchors.back().theta_lat);
  out.training = train_mmd(start, data, kernel, opt, traj.partition.core_frozen(), observer);
  out.trajectory = traj;
  const auto p = out.training.circuit.params();
  LatentAnchor next{t, {}};
  for (std::size_t i : traj.partition.latent) next.theta_lat.push_back(p[i]);
  out.trajectory.anchors.push_back(std::move(next));
  return out;
}

InterpolatedLatent interpolate_latent(const std::vector<LatentAnchor>& anchors, double tau) {
  if (anchors.size() < 2) throw ConfigError("interpolation needs at least 2 anchors");
  if (!std::isfinite(tau)) throw ConfigError("interpolation time must be finite");
  std::size_t k = 0;
  while (k + 2 < anchors.size() && tau > anchors[k + 1].t) ++k;
  const auto& lo = anchors[k];
  const auto& hi = anchors[k + 1];
  InterpolatedLatent out;
  out.extrapolated = tau < anchors.front().t || tau > anchors.back().t;
  if (tau == lo.t) {
    out.theta_lat = lo.theta_lat;
    return out;
  }
  if (tau == hi.t) {
    out.theta_lat = hi.theta_lat;
    return out;
  }
  const double alpha = (tau - lo.t) / (hi.t - lo.t);
  out.theta_lat.resize(lo.theta_lat.size());
  for (std::size_t i = 0; i < out.theta_lat.size(); ++i) {
    out.theta_lat[i] = (1.0 - alpha) * lo.theta_lat[i] + alpha * hi.theta_lat[i];
  }
  return out;
}

InterpolatedLatent interpolate_latent(const LatentTrajectory& traj, double tau) {
  return interpolate_latent(traj.anchors, tau);
}

IqpCircuit circuit_at(const LatentTrajectory& traj, double tau) {
  return traj.assemble(interpolate_latent(traj, tau).theta_lat);
}

BitDataset generate_snapshot(const LatentTrajectory& traj, double tau, std::size_t shots, std::uint64_t seed) {
  return sample(circuit_at(traj, tau), shots, seed);
}

}  // namespace ccmap
