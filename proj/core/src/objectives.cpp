#include "mfp/objectives.hpp"

#include <cmath>

#include "mfp/errors.hpp"

namespace mfp {

bool satisfies(const FuturePrediction& future, double t, double s) noexcept {
  for (const StObstacle& o : future.obstacles) {
    if (o.contains(t, s)) return false;
  }
  return true;
}

double comfort_cost(const Trajectory& trajectory, const CostWeights& weights) {
  double cost = 0.0;
  for (const StepState& x : trajectory.states) {
    cost += weights.w_v * x.v * x.v + weights.w_a * x.a * x.a +
            weights.w_j * x.j * x.j;
  }
  return cost;
}

std::optional<double> trajectory_reward(const Trajectory& trajectory,
                                        const FuturePrediction& future,
                                        const CostWeights& weights) {
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double t = static_cast<double>(k) * trajectory.dt;
    if (!satisfies(future, t, trajectory.states[k].s)) return std::nullopt;
  }
  const double final_s =
      trajectory.states.empty() ? 0.0 : trajectory.states.back().s;
  return weights.w_disp * final_s - comfort_cost(trajectory, weights);
}

ExpectedReward combine_rewards(std::span<const double> probabilities,
                               std::span<const std::optional<double>> rewards) {
  if (probabilities.size() != rewards.size()) {
    throw DimensionMismatch("one reward per probability required");
  }
  ExpectedReward out;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    if (rewards[i]) {
      out.finite_value += probabilities[i] * *rewards[i];
    } else if (probabilities[i] > 0.0) {
      out.catastrophic = true;
    }
  }
  return out;
}

ExpectedReward expected_reward(const Trajectory& trajectory,
                               std::span<const FuturePrediction> futures,
                               const CostWeights& weights) {
  std::vector<double> p;
  std::vector<std::optional<double>> r;
  for (const FuturePrediction& f : futures) {
    p.push_back(f.probability);
    r.push_back(trajectory_reward(trajectory, f, weights));
  }
  return combine_rewards(p, r);
}

std::vector<double> uniform_reveal_pmf(std::size_t steps) {
  if (steps == 0) return {};
  return std::vector<double>(steps, 1.0 / static_cast<double>(steps));
}

std::vector<double> feasible_mass(const Trajectory& trajectory,
                                  std::span<const FuturePrediction> futures,
                                  std::span<const double> reveal_pmf) {
  if (reveal_pmf.size() != trajectory.size()) {
    throw DimensionMismatch("reveal pmf must cover every trajectory sample");
  }
  std::vector<double> mass;
  mass.reserve(futures.size());
  for (const FuturePrediction& f : futures) {
    double inside = 0.0;
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
      const double t = static_cast<double>(k) * trajectory.dt;
      if (satisfies(f, t, trajectory.states[k].s)) inside += reveal_pmf[k];
    }
    mass.push_back(f.probability * inside);
  }
  return mass;
}

double feasibility_probability(const Trajectory& trajectory,
                               std::span<const FuturePrediction> futures,
                               std::span<const double> reveal_pmf) {
  double total = 0.0;
  for (double m : feasible_mass(trajectory, futures, reveal_pmf)) total += m;
  return total;
}

double entropy_term(std::span<const double> masses) {
  double h = 0.0;
  for (double m : masses) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

double entropy_objective(const Trajectory& trajectory,
                         std::span<const FuturePrediction> futures,
                         std::span<const double> reveal_pmf,
                         const CostWeights& weights) {
  const ExpectedReward r = expected_reward(trajectory, futures, weights);
  return r.finite_value +
         entropy_term(feasible_mass(trajectory, futures, reveal_pmf));
}

}  // namespace mfp
