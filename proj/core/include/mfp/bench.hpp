#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mfp/scenario.hpp"

namespace mfp {

struct BoundPair {
  std::vector<double> lb;
  std::vector<double> ub;
  double start = 0.0;
};

/// Feasible non-decreasing bounds cut by `k` random obstacles around a random
/// monotone reference trajectory that starts at 0.
BoundPair obstacle_bounds(std::size_t steps, std::size_t k,
                          std::mt19937_64& rng, double s_max = 200.0);

/// Geometric staircase upper bound (ub[t] = base^t - 1, lb = 0). Every split
/// peels about log_base(T) indices off the end of the current chord, so the
/// run time grows close to quadratically in the number of steps. base^(T-1)
/// must stay finite (T <= 512 for the default).
BoundPair staircase_bounds(std::size_t steps, double base = 4.0);

/// `k` obstacles with disjoint, increasing time windows and increasing
/// stations; each can be passed above or below independently, giving 2^k
/// corridors before pruning.
std::vector<StObstacle> staircase_obstacles(std::size_t k, double dt,
                                            std::size_t horizon_steps,
                                            double s_max = 200.0);

struct LatencyStats {
  std::size_t steps = 0;
  std::size_t k = 0;
  std::size_t samples = 0;
  double min_s = 0.0;
  double median_s = 0.0;
  double p99_s = 0.0;
};

/// Per-call wall time of approximate_profile over `repetitions` passes of
/// `inputs`.
LatencyStats time_profile(std::span<const BoundPair> inputs,
                          std::size_t repetitions);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

struct ScalingPoint {
  std::size_t x = 0;
  double median_s = 0.0;
};

struct BenchConfig {
  std::vector<std::size_t> steps{100};
  std::vector<std::size_t> ks{5};
  std::size_t repetitions = 200;
  std::size_t inputs = 50;
  std::uint64_t seed = 7;
  std::vector<std::size_t> staircase_steps{128, 256, 512};
  std::size_t k_scaling_steps = 1000;
  std::vector<std::size_t> k_scaling{4, 8, 16, 32};
};

struct BenchReport {
  std::vector<LatencyStats> random;
  std::vector<ScalingPoint> staircase;
  double staircase_slope = 0.0;
  std::vector<ScalingPoint> k_scaling;
  double k_slope = 0.0;
};

BenchReport bench_approx_profile(const BenchConfig& config = {});

}  // namespace mfp
