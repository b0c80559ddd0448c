#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfp/multi_future_qp.hpp"
#include "mfp/scenario.hpp"

namespace mfp {

/// Ego trajectory: sample k sits at time k * dt from the trajectory start.
struct Trajectory {
  std::vector<StepState> states;
  double dt = 0.0;

  std::size_t size() const noexcept { return states.size(); }
};

/// True when (t, s) lies outside every obstacle of the future.
bool satisfies(const FuturePrediction& future, double t, double s) noexcept;

/// Sum of w_v v^2 + w_a a^2 + w_j j^2 over the trajectory.
double comfort_cost(const Trajectory& trajectory, const CostWeights& weights);

/// Reward under one future: w_disp * final station minus comfort cost, or
/// nullopt (a catastrophic, -infinity outcome) when any sample violates the
/// future's obstacles.
std::optional<double> trajectory_reward(const Trajectory& trajectory,
                                        const FuturePrediction& future,
                                        const CostWeights& weights);

struct ExpectedReward {
  /// Sum of p_i R_i over the futures with a finite reward.
  double finite_value = 0.0;
  /// Some future with p_i > 0 yields -infinity.
  bool catastrophic = false;
};

ExpectedReward combine_rewards(std::span<const double> probabilities,
                               std::span<const std::optional<double>> rewards);

ExpectedReward expected_reward(const Trajectory& trajectory,
                               std::span<const FuturePrediction> futures,
                               const CostWeights& weights);

/// pmf[k] = P(reveal at sample k); uniform over the trajectory by default.
std::vector<double> uniform_reveal_pmf(std::size_t steps);

/// Per-future mass P_i = p_i * sum_k pmf[k] * 1(sample k satisfies future i).
/// Ego transitions are deterministic, so no transition product appears.
std::vector<double> feasible_mass(const Trajectory& trajectory,
                                  std::span<const FuturePrediction> futures,
                                  std::span<const double> reveal_pmf);

/// Probability that the trajectory is inside the true future's feasible set
/// at the reveal time: sum_i P_i.
double feasibility_probability(const Trajectory& trajectory,
                               std::span<const FuturePrediction> futures,
                               std::span<const double> reveal_pmf);

/// -sum_i P_i log P_i with 0 log 0 = 0.
double entropy_term(std::span<const double> masses);

/// Finite part of the expected reward plus the entropy term.
double entropy_objective(const Trajectory& trajectory,
                         std::span<const FuturePrediction> futures,
                         std::span<const double> reveal_pmf,
                         const CostWeights& weights);

}  // namespace mfp
