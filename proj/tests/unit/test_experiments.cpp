#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ccmap/error.hpp"
#include "ccmap/experiments.hpp"

using namespace ccmap;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepConfig tiny_sweep() {
  SweepConfig c;
  c.n = 6;
  c.generator_gate_counts = {10, 30};
  c.generator_locality = 3;
  c.boost_steps = {0, 3};
  c.boost_shots = 500;
  c.target_samples = 2000;
  c.learner_gate_counts = {8, 21};
  c.learner.steps = 40;
  c.seeds = {1, 2};
  c.threads = 1;
  return c;
}

}  // namespace

TEST(Experiments, EffectiveGateCount) {
  EXPECT_EQ(effective_gate_count(8, 150, 2), 36u);
  EXPECT_EQ(effective_gate_count(10, 60, 2), 55u);
  EXPECT_EQ(effective_gate_count(10, 30, 2), 30u);
}

TEST(Sweep, ConfigJsonStrict) {
  const auto c = tiny_sweep();
  const auto back = SweepConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(c.point_count(), 8u);
  EXPECT_THROW(SweepConfig::from_json(R"({"n": 6, "bogus": 1})"), ConfigError);
  EXPECT_THROW(SweepConfig::from_json("{not json"), ConfigError);
  auto bad = c;
  bad.learner_locality = 3;
  EXPECT_THROW(bad.validate(), ConfigError);
}

TEST(Sweep, PointsReproduceAndThreadsAgree) {
  auto c = tiny_sweep();
  std::size_t streamed = 0;
  const auto rows = run_mismatch_sweep(c, [&](const SweepRow&) { ++streamed; });
  ASSERT_EQ(rows.size(), 16u);
  EXPECT_EQ(streamed, 16u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.status, "ok");
    EXPECT_LE(r.achieved_mmd, r.initial_mmd);
    EXPECT_LE(r.learner_gates, 21u);
  }
  const auto p5 = run_sweep_point(c, 5);
  ASSERT_EQ(p5.size(), 2u);
  EXPECT_EQ(sweep_csv_line(p5[0]), sweep_csv_line(rows[10]));
  EXPECT_EQ(sweep_csv_line(p5[1]), sweep_csv_line(rows[11]));
  c.threads = 3;
  const auto par = run_mismatch_sweep(c);
  for (std::size_t i = 0; i < rows.size(); ++i) EXPECT_EQ(sweep_csv_line(par[i]), sweep_csv_line(rows[i]));
  const auto header = sweep_csv_header(), line = sweep_csv_line(rows[0]);
  EXPECT_EQ(std::count(header.begin(), header.end(), ','), std::count(line.begin(), line.end(), ','));
}

TEST(Sweep, TercileSummaryByHand) {
  std::vector<SweepRow> rows;
  for (int i = 0; i < 7; ++i) {
    SweepRow r;
    r.learner_gates_requested = 30;
    r.target_qcli = 0.1 * i;
    r.achieved_mmd = 10.0 - i;
    rows.push_back(r);
  }
  rows[3].kept = false;
  rows.push_back(rows[0]);
  rows.back().status = "error: x";
  // kept ok rows: qcli 0,.1,.2,.4,.5,.6 -> thirds of size 2
  const auto s = tercile_summary(rows);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s[0].bottom_count, 2u);
  EXPECT_DOUBLE_EQ(s[0].bottom_mean, (10.0 + 9.0) / 2);
  EXPECT_DOUBLE_EQ(s[0].top_mean, (4.0 + 5.0) / 2);
}

TEST(Coupling, RowsAndCorrelation) {
  CouplingConfig c;
  c.sizes = {5};
  c.gates = 12;
  c.trajectories = 4;
  c.spsa.steps = 5;
  c.shots = 1000;
  c.threads = 2;
  const auto r = run_coupling_study(c);
  EXPECT_EQ(r.rows.size(), 4u * 6u);
  ASSERT_EQ(r.spearman.size(), 1u);
  EXPECT_EQ(r.spearman[0].first, 5);
  EXPECT_EQ(r.spearman[0].second.n, 24u);
  c.threads = 1;
  EXPECT_EQ(coupling_csv(run_coupling_study(c)), coupling_csv(r));
  EXPECT_EQ(CouplingConfig::from_json(c.to_json()).to_json(), c.to_json());
  c.spsa.method = OptimMethod::adam;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Drift, MixtureEndpoints) {
  const auto m = DriftingMixture::from_seed(4, 3, 1.0, 11.0);
  EXPECT_DOUBLE_EQ(m.weight(6.0), 0.5);
  const auto p0 = m.distribution(1.0).probs;
  EXPECT_NEAR(std::accumulate(p0.begin(), p0.end(), 0.0), 1.0, 1e-14);
  double prod = 1.0;
  for (double a : m.a) prod *= 1.0 - a;
  EXPECT_NEAR(p0[0], prod, 1e-15);
  const auto s = m.sample(11.0, 20000, 1);
  double ones = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) ones += s.bit(i, 0);
  EXPECT_NEAR(ones / 20000.0, m.b[0], 0.02);
}

TEST(Temporal, TinyRunHasSharedSchema) {
  TemporalConfig c;
  c.n = 5;
  c.d_lat = 6;
  c.anchor_times = {1, 50, 100};
  c.train_samples = 1000;
  c.heldout_samples = 1000;
  c.core_opt.steps = 30;
  c.latent_opt.steps = 20;
  c.rbm = RbmConfig{4, 3, 0.05, 1, 32, 0.01, 0};
  c.rbm_latent_epochs = 2;
  c.threads = 1;
  EXPECT_EQ(c.effective_eval_times(), (std::vector<double>{25.5, 75.0}));
  const auto r = run_temporal_seed(c, 2);
  EXPECT_EQ(r.iqp.model, "iqp");
  EXPECT_EQ(r.iqp.anchors.size(), 3u);
  EXPECT_EQ(r.iqp.evals.size(), 2u);
  ASSERT_TRUE(r.rbm.has_value());
  EXPECT_EQ(r.rbm->evals.size(), 2u);
  EXPECT_EQ(r.trajectory.anchors.size(), 3u);
  for (const auto& e : r.iqp.evals) {
    EXPECT_GE(e.interp_mmd, 0.0);
    EXPECT_FALSE(e.extrapolated);
  }
  EXPECT_EQ(r.iqp.to_json(), run_temporal_seed(c, 2).iqp.to_json());
  EXPECT_EQ(TemporalConfig::from_json(c.to_json()).to_json(), c.to_json());
}

TEST(Presets, AllParseAndKindsMatch) {
  int seen = 0;
  for (const auto& e : std::filesystem::directory_iterator(CCMAP_CONFIG_DIR)) {
    const auto text = slurp(e.path());
    const auto kind = preset_kind(text);
    if (kind == "sweep") SweepConfig::from_json(text).validate();
    else if (kind == "coupling") CouplingConfig::from_json(text).validate();
    else if (kind == "temporal") TemporalConfig::from_json(text).validate();
    else ADD_FAILURE() << e.path();
    ++seen;
  }
  EXPECT_EQ(seen, 6);
  EXPECT_THROW(preset_kind(R"({"n": 3})"), ConfigError);
}
