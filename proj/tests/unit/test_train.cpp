#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccmap/error.hpp"
#include "ccmap/iqp.hpp"
#include "ccmap/train.hpp"
#include "helpers.hpp"

using namespace ccmap;

namespace {

// same structure, fresh angles; all-zero is a stationary point so avoid it
IqpCircuit scrambled(IqpCircuit c, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  std::vector<double> p(c.size());
  for (auto& x : p) x = u(rng);
  c.set_params(p);
  return c;
}

OptimizerConfig adam(int steps, double lr) {
  OptimizerConfig o;
  o.steps = steps;
  o.learning_rate = lr;
  return o;
}

}  // namespace

TEST(TrainMmd, AdamLearnsAReachableTarget) {
  const auto target = random_circuit(6, 21, 2, 5, 0.6);
  const auto data = sample(target, 20000, 1);
  std::size_t calls = 0;
  const auto r = train_mmd(scrambled(target, 77), data, {default_sigma(6), MmdEstimator::biased}, adam(300, 0.05), {},
                           [&](const StepRecord&) { ++calls; });
  EXPECT_EQ(r.loss_history.size(), 301u);
  EXPECT_EQ(calls, 301u);
  EXPECT_LT(r.final_loss(), 0.1 * r.initial_loss());
}

TEST(TrainMmd, FrozenParametersStayPut) {
  const auto c = random_circuit(5, 10, 2, 2, 0.4);
  const auto data = testutil::random_dataset(5, 500, 3);
  const std::vector<std::size_t> idx{0, 4, 9};
  const auto frozen = frozen_mask(c.size(), idx);
  for (auto method : {OptimMethod::adam, OptimMethod::spsa}) {
    auto opt = adam(30, 0.05);
    opt.method = method;
    const auto r = train_mmd(c, data, {1.0, MmdEstimator::biased}, opt, frozen);
    for (std::size_t i : idx) EXPECT_EQ(r.circuit.generators[i].theta, c.generators[i].theta);
    EXPECT_NE(r.circuit.generators[1].theta, c.generators[1].theta);
  }
  EXPECT_THROW(train_mmd(c, data, {1.0, MmdEstimator::biased}, adam(1, 0.1), std::vector<bool>(3, false)), ConfigError);
}

TEST(TrainMmd, SpsaReducesExactLoss) {
  const auto target = random_circuit(5, 15, 2, 7, 0.6);
  const auto data = sample(target, 20000, 2);
  OptimizerConfig o;
  o.method = OptimMethod::spsa;
  o.steps = 400;
  o.spsa_a = 0.3;
  o.spsa_c = 0.1;
  o.seed = 4;
  const auto r = train_mmd(scrambled(target, 77), data, {default_sigma(5), MmdEstimator::biased}, o, {});
  EXPECT_LT(r.final_loss(), 0.5 * r.initial_loss());
}

TEST(TrainMmd, DeterministicAndBatched) {
  const auto c = random_circuit(6, 12, 2, 1);
  const auto data = testutil::random_dataset(6, 2000, 1);
  auto o = adam(20, 0.05);
  o.batch_samples = 256;
  o.seed = 9;
  const auto a = train_mmd(c, data, {1.2, MmdEstimator::biased}, o, {});
  const auto b = train_mmd(c, data, {1.2, MmdEstimator::biased}, o, {});
  EXPECT_EQ(a.circuit.params(), b.circuit.params());
  EXPECT_EQ(a.loss_history, b.loss_history);
  o.method = OptimMethod::spsa;
  const auto s1 = train_mmd(c, data, {1.2, MmdEstimator::unbiased}, o, {});
  const auto s2 = train_mmd(c, data, {1.2, MmdEstimator::unbiased}, o, {});
  EXPECT_EQ(s1.circuit.params(), s2.circuit.params());
}

TEST(TrainMmd, WidthMismatch) {
  const auto c = random_circuit(4, 5, 2, 1);
  EXPECT_THROW(train_mmd(c, iid_uniform(5, 10, 1), {1.0, MmdEstimator::biased}, adam(1, 0.1), {}), DataError);
}

TEST(StepRecord, JsonLine) {
  const StepRecord r{3, 0.5, -1.0, 0.25, "abc"};
  const auto line = r.to_json_line();
  EXPECT_NE(line.find("\"step\":3"), std::string::npos);
  EXPECT_EQ(line.find("qcli"), std::string::npos);
  EXPECT_NE(line.find("\"cci\":0.25"), std::string::npos);
}

TEST(MaximizeQcli, TrajectoryShapeAndClimb) {
  const auto c = random_circuit(6, 21, 2, 3, 0.1);
  OptimizerConfig o;
  o.method = OptimMethod::spsa;
  o.steps = 60;
  o.spsa_a = 0.5;
  o.spsa_c = 0.2;
  o.seed = 2;
  const auto r = maximize_qcli(c, o, 4000);
  ASSERT_EQ(r.trajectory.size(), 61u);
  for (const auto& p : r.trajectory) {
    EXPECT_GE(p.qcli, 0.0);
    EXPECT_GE(p.cci, 0.0);
    EXPECT_LE(p.cci, 1.0);
  }
  EXPECT_GT(r.trajectory.back().qcli, r.trajectory.front().qcli);
  EXPECT_THROW(maximize_qcli(c, adam(5, 0.1), 100), ConfigError);
}

TEST(Partition, Leading) {
  const auto p = ParamPartition::leading(5, 2);
  EXPECT_EQ(p.latent, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(p.core, (std::vector<std::size_t>{2, 3, 4}));
  EXPECT_EQ(p.latent_frozen(), (std::vector<bool>{true, true, false, false, false}));
  EXPECT_THROW(ParamPartition::leading(3, 4), ConfigError);
  ParamPartition overlap{{0, 1}, {1, 2}};
  EXPECT_THROW(overlap.validate(3), ConfigError);
  ParamPartition gap{{0}, {2}};
  EXPECT_THROW(gap.validate(3), ConfigError);
}

TEST(Latent, FitThenAdapt) {
  auto tmpl = full_template(5, 2);
  tmpl.set_params(std::vector<double>(tmpl.size(), 0.05));
  const auto part = ParamPartition::leading(tmpl.size(), 6);
  const KernelSpec k{default_sigma(5), MmdEstimator::biased};
  const auto d0 = testutil::random_dataset(5, 3000, 1);
  const auto fit = fit_core(tmpl, d0, 1.0, part, k, adam(50, 0.05));
  ASSERT_EQ(fit.trajectory.anchors.size(), 1u);
  EXPECT_EQ(fit.trajectory.anchors[0].t, 1.0);
  for (std::size_t i = 0; i < 6; ++i) {
    EXPECT_EQ(fit.trajectory.anchors[0].theta_lat[i], 0.05);
    EXPECT_EQ(fit.trajectory.circuit_template.generators[i].theta, 0.05);
  }
  const auto core_before = fit.trajectory.core();
  EXPECT_NE(core_before, std::vector<double>(core_before.size(), 0.05));

  const auto ad = adapt_latent(fit.trajectory, testutil::random_dataset(5, 3000, 2), 2.0, k, adam(50, 0.05));
  ASSERT_EQ(ad.trajectory.anchors.size(), 2u);
  EXPECT_EQ(ad.trajectory.core(), core_before);
  EXPECT_NE(ad.trajectory.anchors[1].theta_lat, ad.trajectory.anchors[0].theta_lat);
  EXPECT_THROW(adapt_latent(ad.trajectory, d0, 2.0, k, adam(1, 0.1)), ConfigError);

  const auto back = LatentTrajectory::from_json(ad.trajectory.to_json());
  EXPECT_EQ(back.core(), ad.trajectory.core());
  EXPECT_EQ(back.anchors[1].theta_lat, ad.trajectory.anchors[1].theta_lat);

  auto noncanon = tmpl;
  noncanon.canonical = false;
  EXPECT_THROW(fit_core(noncanon, d0, 1.0, part, k, adam(1, 0.1)), ConfigError);

  const auto s = generate_snapshot(ad.trajectory, 1.5, 100, 4);
  EXPECT_EQ(s.width(), 5);
  EXPECT_TRUE(s == generate_snapshot(ad.trajectory, 1.5, 100, 4));
}

TEST(Latent, Interpolation) {
  const std::vector<LatentAnchor> a{{0.0, {0.0, 1.0}}, {10.0, {1.0, 3.0}}, {20.0, {3.0, 3.0}}};
  auto mid = interpolate_latent(a, 5.0);
  EXPECT_FALSE(mid.extrapolated);
  EXPECT_DOUBLE_EQ(mid.theta_lat[0], 0.5);
  EXPECT_DOUBLE_EQ(mid.theta_lat[1], 2.0);
  EXPECT_EQ(interpolate_latent(a, 10.0).theta_lat, a[1].theta_lat);
  EXPECT_DOUBLE_EQ(interpolate_latent(a, 15.0).theta_lat[0], 2.0);
  auto past = interpolate_latent(a, 30.0);
  EXPECT_TRUE(past.extrapolated);
  EXPECT_DOUBLE_EQ(past.theta_lat[0], 5.0);
  auto before = interpolate_latent(a, -10.0);
  EXPECT_TRUE(before.extrapolated);
  EXPECT_DOUBLE_EQ(before.theta_lat[1], -1.0);
  EXPECT_THROW(interpolate_latent(std::vector<LatentAnchor>{a[0]}, 1.0), ConfigError);
}
