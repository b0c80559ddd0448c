#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>
#include <vector>

#include "mfp/objectives.hpp"

namespace {

mfp::Trajectory cruise(std::size_t n, double v, double dt) {
  mfp::Trajectory tr;
  tr.dt = dt;
  for (std::size_t k = 0; k < n; ++k) {
    tr.states.push_back({v * dt * static_cast<double>(k), v, 0.0, 0.0});
  }
  return tr;
}

mfp::FuturePrediction future(double p, std::vector<mfp::StObstacle> obs = {}) {
  return {p, std::move(obs), ""};
}

TEST(Satisfies, ClosedInTimeOpenInStation) {
  const auto f = future(1.0, {{1.0, 2.0, 10.0, 20.0}});
  EXPECT_FALSE(mfp::satisfies(f, 1.0, 15.0));
  EXPECT_FALSE(mfp::satisfies(f, 2.0, 15.0));
  EXPECT_TRUE(mfp::satisfies(f, 1.5, 10.0));
  EXPECT_TRUE(mfp::satisfies(f, 1.5, 20.0));
  EXPECT_TRUE(mfp::satisfies(f, 2.01, 15.0));
}

TEST(ComfortCost, SumsWeightedSquares) {
  mfp::Trajectory tr;
  tr.dt = 1.0;
  tr.states = {{0, 1, 2, 3}, {1, 2, 0, -1}};
  const mfp::CostWeights w{1.0, 0.5, 0.25, 0.0};
  EXPECT_DOUBLE_EQ(mfp::comfort_cost(tr, w),
                   (1 + 0.5 * 4 + 0.25 * 9) + (4 + 0 + 0.25 * 1));
}

TEST(TrajectoryReward, DisplacementMinusComfortOrCatastrophe) {
  const auto tr = cruise(5, 2.0, 0.5);
  const mfp::CostWeights w{0.5, 1.0, 0.1, 2.0};
  const auto r = mfp::trajectory_reward(tr, future(1.0), w);
  ASSERT_TRUE(r.has_value());
  EXPECT_DOUBLE_EQ(*r, 2.0 * 4.0 - 5 * 0.5 * 4.0);
  EXPECT_FALSE(mfp::trajectory_reward(tr, future(1.0, {{0.9, 1.1, 1.0, 3.0}}), w)
                   .has_value());
}

TEST(CombineRewards, WeightedSum) {
  const std::vector<double> p{0.5, 0.5};
  const std::vector<std::optional<double>> r{2.0, 4.0};
  const auto e = mfp::combine_rewards(p, r);
  EXPECT_DOUBLE_EQ(e.finite_value, 3.0);
  EXPECT_FALSE(e.catastrophic);
}

TEST(CombineRewards, CatastrophicOnlyWithPositiveMass) {
  const std::vector<std::optional<double>> r{1.0, std::nullopt};
  const auto hit = mfp::combine_rewards(std::vector{0.9, 0.1}, r);
  EXPECT_TRUE(hit.catastrophic);
  EXPECT_DOUBLE_EQ(hit.finite_value, 0.9);
  EXPECT_FALSE(mfp::combine_rewards(std::vector{1.0, 0.0}, r).catastrophic);
}

TEST(ExpectedReward, FeasibleEverywhereIsWeightedSum) {
  const auto tr = cruise(6, 1.0, 0.5);
  const std::vector futures{future(0.3), future(0.7, {{0, 3, 100, 110}})};
  const mfp::CostWeights w;
  const auto e = mfp::expected_reward(tr, futures, w);
  const double r = *mfp::trajectory_reward(tr, futures[0], w);
  EXPECT_FALSE(e.catastrophic);
  EXPECT_NEAR(e.finite_value, r, 1e-12);
}

TEST(ExpectedReward, ViolationIsCatastrophic) {
  const auto tr = cruise(6, 1.0, 0.5);
  const std::vector futures{future(0.9), future(0.1, {{0, 3, 0.4, 0.6}})};
  EXPECT_TRUE(mfp::expected_reward(tr, futures, {}).catastrophic);
}

TEST(UniformRevealPmf, SumsToOne) {
  const auto pmf = mfp::uniform_reveal_pmf(8);
  ASSERT_EQ(pmf.size(), 8u);
  for (double x : pmf) EXPECT_DOUBLE_EQ(x, 0.125);
}

TEST(FeasibilityProbability, PartiallyFeasibleSecondFuture) {
  mfp::Trajectory tr;
  tr.dt = 1.0;
  for (int k = 0; k < 10; ++k) tr.states.push_back({double(k), 1, 0, 0});
  // Future 1 blocks every sample from t = 5 on: 5 of 10 samples survive.
  const std::vector futures{future(0.8), future(0.2, {{4.5, 20, 0, 100}})};
  const auto pmf = mfp::uniform_reveal_pmf(10);
  EXPECT_NEAR(mfp::feasibility_probability(tr, futures, pmf),
              0.8 + 0.2 * 0.5, 1e-12);
  const auto mass = mfp::feasible_mass(tr, futures, pmf);
  EXPECT_NEAR(mass[0], 0.8, 1e-12);
  EXPECT_NEAR(mass[1], 0.1, 1e-12);
}

TEST(FeasibilityProbability, AllOrNothing) {
  const auto tr = cruise(10, 1.0, 0.5);
  const auto pmf = mfp::uniform_reveal_pmf(10);
  std::vector<double> skewed(10, 0.0);
  skewed[7] = 1.0;
  const std::vector free{future(0.6), future(0.4)};
  EXPECT_NEAR(mfp::feasibility_probability(tr, free, pmf), 1.0, 1e-12);
  EXPECT_NEAR(mfp::feasibility_probability(tr, free, skewed), 1.0, 1e-12);
  const mfp::StObstacle wall{0, 100, -1, 1000};
  const std::vector blocked{future(0.6, {wall}), future(0.4, {wall})};
  EXPECT_DOUBLE_EQ(mfp::feasibility_probability(tr, blocked, pmf), 0.0);
}

TEST(FeasibilityProbability, MonotoneInFeasibleSamples) {
  std::mt19937_64 rng(4);
  const auto tr = cruise(12, 1.0, 0.5);
  const auto pmf = mfp::uniform_reveal_pmf(12);
  for (int trial = 0; trial < 50; ++trial) {
    const double cut = 0.5 * static_cast<double>(rng() % 12);
    const std::vector wide{future(1.0, {{cut, 100, -1, 1000}})};
    const std::vector narrow{future(1.0, {{cut + 0.5, 100, -1, 1000}})};
    EXPECT_LE(mfp::feasibility_probability(tr, wide, pmf),
              mfp::feasibility_probability(tr, narrow, pmf));
  }
}

TEST(EntropyTerm, Examples) {
  EXPECT_NEAR(mfp::entropy_term(std::vector{0.5, 0.5}), std::log(2.0), 1e-15);
  EXPECT_DOUBLE_EQ(mfp::entropy_term(std::vector{1.0}), 0.0);
  EXPECT_DOUBLE_EQ(mfp::entropy_term(std::vector{0.0, 0.0}), 0.0);
}

TEST(EntropyObjective, RewardPlusEntropy) {
  const auto tr = cruise(8, 1.0, 0.5);
  const std::vector futures{future(0.5), future(0.5)};
  const auto pmf = mfp::uniform_reveal_pmf(8);
  const mfp::CostWeights w;
  const double reward = mfp::expected_reward(tr, futures, w).finite_value;
  EXPECT_NEAR(mfp::entropy_objective(tr, futures, pmf, w),
              reward + std::log(2.0), 1e-12);
}

}  // namespace
