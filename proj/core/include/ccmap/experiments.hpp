#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ccmap/envelope.hpp"
#include "ccmap/optim.hpp"
#include "ccmap/rbm.hpp"
#include "ccmap/stats.hpp"

namespace ccmap {

/// Stable hash of a config's canonical JSON.
std::string config_hash(const std::string& canonical_json);

/// Gate count clipped to the subsets that exist; the clip is reported in every row.
std::size_t effective_gate_count(int n, std::size_t requested, int locality);

// ---------------------------------------------------------------- mismatch sweep

struct SweepConfig {
  std::string name = "sweep";
  int n = 10;
  std::vector<std::size_t> generator_gate_counts{20, 60, 120, 200};
  int generator_locality = 4;
  double generator_angle_range = 0.39269908169872414;  // pi/8
  // Each generator point is SPSA-boosted toward high QCLI for each of these step counts.
  std::vector<int> boost_steps{0, 20};
  OptimizerConfig boost{OptimMethod::spsa, 0, 1e-4, 0.9, 0.999, 1e-8, 0.3, 0.15, 5.0, 0, 0};
  std::size_t boost_shots = 5000;
  // Keep targets whose QCLI lies in [qcli_min, qcli_max].
  double qcli_min = 0.0;
  double qcli_max = 1.0;
  std::size_t target_samples = 10000;
  std::vector<std::size_t> learner_gate_counts{30, 60};
  int learner_locality = 2;
  OptimizerConfig learner{OptimMethod::adam, 500, 0.02, 0.9, 0.999, 1e-8, 0.2, 0.1, 10.0, 0, 0};
  double sigma = 0.0;  // 0 selects sqrt(n / 4)
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  int threads = 0;  // 0 selects the hardware concurrency

  void validate() const;
  std::string to_json() const;
  static SweepConfig from_json(const std::string& text);
  std::size_t point_count() const;
};

struct SweepRow {
  std::size_t point = 0;
  std::uint64_t seed = 0;
  std::size_t generator_gates = 0;
  int boost_steps = 0;
  double target_qcli = 0.0;
  bool kept = true;  // inside the QCLI filter
  std::size_t learner_gates_requested = 0;
  std::size_t learner_gates = 0;
  double initial_mmd = 0.0;
  double achieved_mmd = 0.0;
  std::string status = "ok";
  std::string config_hash;
};

std::string sweep_csv_header();
std::string sweep_csv_line(const SweepRow& r);

/// All rows of one generator point (one per learner size); reproduces the sweep rows exactly.
std::vector<SweepRow> run_sweep_point(const SweepConfig& cfg, std::size_t point);

using RowSink = std::function<void(const SweepRow&)>;
/// Runs every point on the worker pool. Failed points are recorded with status "error: ..."
/// and the sweep continues. Rows come back ordered by (point, learner).
std::vector<SweepRow> run_mismatch_sweep(const SweepConfig& cfg, const RowSink& sink = {});

struct TercileSummary {
  std::size_t learner_gates = 0;
  double bottom_mean = 0.0;
  double top_mean = 0.0;
  std::size_t bottom_count = 0;
  std::size_t top_count = 0;
};

/// Per learner size: mean achieved MMD in the bottom and top QCLI terciles of the kept rows.
std::vector<TercileSummary> tercile_summary(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------- coupling study

struct CouplingConfig {
  std::string name = "coupling";
  std::vector<int> sizes{8};
  std::size_t gates = 150;
  int locality = 2;
  double angle_range = 0.39269908169872414;  // pi/8
  std::size_t trajectories = 40;
  OptimizerConfig spsa{OptimMethod::spsa, 49, 1e-4, 0.9, 0.999, 1e-8, 0.3, 0.15, 5.0, 0, 0};
  std::size_t shots = 10000;
  std::uint64_t seed = 1;
  int threads = 0;

  void validate() const;
  std::string to_json() const;
  static CouplingConfig from_json(const std::string& text);
};

struct CouplingRow {
  int n = 0;
  std::size_t trajectory = 0;
  int step = 0;
  std::uint64_t seed = 0;
  std::size_t gates = 0;
  double qcli = 0.0;
  double cci = 0.0;
};

struct CouplingResult {
  std::vector<CouplingRow> rows;
  std::vector<std::pair<int, Correlation>> spearman;  // per system size
  std::string config_hash;
};

std::string coupling_csv(const CouplingResult& r);
CouplingResult run_coupling_study(const CouplingConfig& cfg);

// ---------------------------------------------------------------- temporal study

/// p_t = (1 - w) prod_i Bern(a_i) + w prod_i Bern(b_i), w = (t - t_first) / (t_last - t_first).
struct DriftingMixture {
  std::vector<double> a;
  std::vector<double> b;
  double t_first = 1.0;
  double t_last = 1000.0;

  static DriftingMixture from_seed(int n, std::uint64_t seed, double t_first, double t_last);
  double weight(double t) const;
  OutputDistribution distribution(double t) const;
  BitDataset sample(double t, std::size_t count, std::uint64_t seed) const;
};

struct TemporalConfig {
  std::string name = "temporal";
  int n = 10;
  int template_locality = 3;
  std::size_t d_lat = kDefaultLatentDim;
  std::vector<double> anchor_times{1, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000};
  std::vector<double> eval_times;  // empty selects the midpoints between anchors
  std::size_t train_samples = 5000;
  std::size_t heldout_samples = 5000;
  OptimizerConfig core_opt{OptimMethod::adam, 400, 0.05, 0.9, 0.999, 1e-8, 0.2, 0.1, 10.0, 0, 0};
  OptimizerConfig latent_opt{OptimMethod::adam, 200, 0.02, 0.9, 0.999, 1e-8, 0.2, 0.1, 10.0, 0, 0};
  double sigma = 0.0;
  double angle_range = 0.39269908169872414;
  std::vector<double> mixture_a;  // empty: drawn from the seed
  std::vector<double> mixture_b;
  std::vector<std::uint64_t> seeds{1};
  bool rbm_baseline = true;
  RbmConfig rbm{16, 30, 0.05, 1, 32, 0.01, 0};
  int rbm_latent_epochs = 10;
  int threads = 0;

  void validate() const;
  std::string to_json() const;
  static TemporalConfig from_json(const std::string& text);
  std::vector<double> effective_eval_times() const;
};

struct TemporalAnchorReport {
  double t = 0.0;
  double fit_loss = 0.0;    // final training loss at this anchor
  double anchor_mmd = 0.0;  // exact MMD of the anchor model to its training data
};

struct TemporalEvalReport {
  double tau = 0.0;
  double interp_mmd = 0.0;
  double nearest_mmd = 0.0;
  double nearest_t = 0.0;
  bool extrapolated = false;
};

/// Shared schema for the IQP model and the RBM baseline.
struct TemporalReport {
  std::string model;
  std::uint64_t seed = 0;
  double sigma = 0.0;
  std::size_t params = 0;
  std::vector<TemporalAnchorReport> anchors;
  std::vector<TemporalEvalReport> evals;
  double mean_interp_mmd = 0.0;
  double mean_nearest_mmd = 0.0;
  bool interp_wins = false;

  std::string to_json() const;
};

struct TemporalSeedResult {
  TemporalReport iqp;
  std::optional<TemporalReport> rbm;
  LatentTrajectory trajectory;
};

TemporalSeedResult run_temporal_seed(const TemporalConfig& cfg, std::uint64_t seed);
std::vector<TemporalSeedResult> run_temporal_study(const TemporalConfig& cfg);

/// Which study a preset file configures ("sweep", "coupling" or "temporal").
std::string preset_kind(const std::string& text);

}  // namespace ccmap
