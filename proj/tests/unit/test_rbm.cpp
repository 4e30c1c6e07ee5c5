#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ccmap/error.hpp"
#include "ccmap/rbm.hpp"
#include "helpers.hpp"

using namespace ccmap;

namespace {

RbmModel random_model(int nv, int nh, std::uint64_t seed, double scale) {
  auto m = RbmModel::zeros(nv, nh);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, scale);
  auto p = m.flat();
  for (double& x : p) x = g(rng);
  m.set_flat(p);
  return m;
}

// p(v) by summing the joint Boltzmann weight over every hidden configuration.
std::vector<double> joint_marginal(const RbmModel& m) {
  const std::size_t nv = static_cast<std::size_t>(m.n_visible), nh = static_cast<std::size_t>(m.n_hidden);
  std::vector<double> p(std::size_t{1} << nv, 0.0);
  double z = 0;
  for (std::size_t v = 0; v < p.size(); ++v)
    for (std::size_t h = 0; h < (std::size_t{1} << nh); ++h) {
      double e = 0;
      for (std::size_t i = 0; i < nv; ++i) {
        if (!((v >> i) & 1)) continue;
        e += m.visible_bias[i];
        for (std::size_t j = 0; j < nh; ++j)
          if ((h >> j) & 1) e += m.weight(static_cast<int>(i), static_cast<int>(j));
      }
      for (std::size_t j = 0; j < nh; ++j)
        if ((h >> j) & 1) e += m.hidden_bias[j];
      p[v] += std::exp(e);
    }
  for (double x : p) z += x;
  for (double& x : p) x /= z;
  return p;
}

}  // namespace

TEST(Rbm, FreeEnergyByDefinition) {
  const auto m = random_model(3, 2, 1, 0.8);
  const std::uint64_t v = 0b101;
  double f = -(m.visible_bias[0] + m.visible_bias[2]);
  for (int j = 0; j < 2; ++j) f -= std::log1p(std::exp(m.hidden_bias[static_cast<std::size_t>(j)] + m.weight(0, j) + m.weight(2, j)));
  EXPECT_NEAR(m.free_energy(std::span<const std::uint64_t>(&v, 1)), f, 1e-14);
}

TEST(Rbm, ExactMarginalMatchesJointSum) {
  for (std::uint64_t s = 1; s <= 3; ++s) {
    const auto m = random_model(4, 3, s, 1.0);
    const auto got = rbm_distribution(m).probs;
    const auto want = joint_marginal(m);
    for (std::size_t v = 0; v < want.size(); ++v) EXPECT_NEAR(got[v], want[v], 1e-13);
  }
}

TEST(Rbm, FlatLayoutAndJson) {
  const auto m = random_model(3, 2, 4, 0.5);
  const auto p = m.flat();
  ASSERT_EQ(p.size(), m.param_count());
  EXPECT_EQ(p.size(), 3u * 2 + 3 + 2);
  EXPECT_EQ(p[1], m.weight(0, 1));
  EXPECT_EQ(p[6], m.visible_bias[0]);
  EXPECT_EQ(p[9], m.hidden_bias[0]);
  const auto back = RbmModel::from_json(m.to_json());
  EXPECT_EQ(back.flat(), p);
  auto bad = m;
  bad.weights[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(bad.validate(), NumericError);
  EXPECT_THROW(RbmModel::zeros(0, 3), ConfigError);
}

TEST(Rbm, TrainingConcentratesMass) {
  const auto d = BitDataset::from_strings(std::vector<std::string>{"0000", "1111", "0000", "1111"});
  RbmConfig cfg{8, 400, 0.1, 1, 4, 0.1, 3};
  const auto r = rbm_train(d, cfg);
  EXPECT_EQ(r.free_energy_history.size(), 400u);
  const auto p = rbm_distribution(r.model).probs;
  EXPECT_GT(p[0] + p[15], 0.6);
  EXPECT_LT(r.free_energy_history.back(), r.free_energy_history.front());
}

TEST(Rbm, FrozenAndDeterministic) {
  const auto d = testutil::random_dataset(5, 200, 2);
  RbmConfig cfg{4, 5, 0.05, 1, 16, 0.01, 1};
  const auto init = random_model(5, 4, 9, 0.1);
  std::vector<bool> frozen(init.param_count(), false);
  for (std::size_t i = 0; i < 7; ++i) frozen[i] = true;
  const auto a = rbm_train_from(init, d, cfg, frozen);
  const auto b = rbm_train_from(init, d, cfg, frozen);
  EXPECT_EQ(a.model.flat(), b.model.flat());
  for (std::size_t i = 0; i < 7; ++i) EXPECT_EQ(a.model.flat()[i], init.flat()[i]);
  EXPECT_NE(a.model.flat()[10], init.flat()[10]);
  EXPECT_THROW(rbm_train_from(init, iid_uniform(4, 10, 1), cfg, {}), DataError);
  cfg.cd_steps = 0;
  EXPECT_THROW(rbm_train(d, cfg), ConfigError);
}

TEST(Rbm, GibbsSamplesFollowTheMarginal) {
  const auto m = random_model(4, 3, 6, 0.8);
  const auto p = rbm_distribution(m).probs;
  const auto s = rbm_sample(m, 40000, 200, 2, 3);
  EXPECT_TRUE(s == rbm_sample(m, 40000, 200, 2, 3));
  std::vector<double> f(16, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i) f[s.key(i)] += 1.0 / 40000.0;
  for (std::size_t v = 0; v < 16; ++v) EXPECT_NEAR(f[v], p[v], 0.015) << v;
}

TEST(Rbm, LatentInterpolationReplacesLeadingBlock) {
  const auto core = random_model(3, 2, 8, 0.5);
  const std::vector<LatentAnchor> anchors{{0.0, {0.0, 2.0}}, {1.0, {1.0, 4.0}}};
  const auto m = rbm_latent_interpolate(anchors, core, 0.5);
  const auto p = m.flat(), c = core.flat();
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 3.0);
  for (std::size_t i = 2; i < p.size(); ++i) EXPECT_EQ(p[i], c[i]);
}
