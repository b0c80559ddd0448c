#include "mfp/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "mfp/approx_profile.hpp"
#include "mfp/errors.hpp"

namespace mfp {

namespace {
volatile std::size_t bench_sink = 0;
}  // namespace

BoundPair obstacle_bounds(std::size_t steps, std::size_t k,
                          std::mt19937_64& rng, double s_max) {
  if (steps < 2) throw DimensionMismatch("need at least two steps");
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Reference: non-decreasing, starts at 0, stays well below s_max.
  std::vector<double> ref(steps, 0.0);
  const double mean_step = 0.5 * s_max / static_cast<double>(steps);
  for (std::size_t t = 1; t < steps; ++t) {
    ref[t] = ref[t - 1] + 2.0 * mean_step * unit(rng);
  }

  BoundPair b{std::vector<double>(steps, 0.0),
              std::vector<double>(steps, s_max), 0.0};
  std::uniform_int_distribution<std::size_t> index(0, steps - 1);
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t t0 = index(rng);
    std::size_t t1 = index(rng);
    if (t0 > t1) std::swap(t0, t1);
    const double gap = 0.5 + 4.0 * unit(rng);
    if (unit(rng) < 0.5) {
      // Passed below: cap the band until the window ends.
      const double cap = ref[t1] + gap;
      for (std::size_t t = 0; t <= t1; ++t) b.ub[t] = std::min(b.ub[t], cap);
    } else {
      // Passed above: raise the floor from the window start on.
      const double floor = std::max(0.0, ref[t0] - gap);
      for (std::size_t t = t0; t < steps; ++t) {
        b.lb[t] = std::max(b.lb[t], floor);
      }
    }
  }
  return b;
}

BoundPair staircase_bounds(std::size_t steps, double base) {
  if (steps < 2) throw DimensionMismatch("need at least two steps");
  BoundPair b{std::vector<double>(steps, 0.0), std::vector<double>(steps, 0.0),
              0.0};
  for (std::size_t t = 0; t < steps; ++t) {
    b.ub[t] = std::pow(base, static_cast<double>(t)) - 1.0;
  }
  return b;
}

std::vector<StObstacle> staircase_obstacles(std::size_t k, double dt,
                                            std::size_t horizon_steps,
                                            double s_max) {
  const double t_end = dt * static_cast<double>(horizon_steps - 1);
  const double window = t_end / static_cast<double>(k + 1);
  const double band = s_max / static_cast<double>(2 * k + 2);
  std::vector<StObstacle> out;
  for (std::size_t i = 0; i < k; ++i) {
    const double t_in = window * (static_cast<double>(i) + 0.5);
    const double s_in = band * static_cast<double>(2 * i + 1);
    out.push_back(
        StObstacle{t_in, t_in + 0.5 * window, s_in, s_in + 0.5 * band});
  }
  return out;
}

LatencyStats time_profile(std::span<const BoundPair> inputs,
                          std::size_t repetitions) {
  LatencyStats out;
  if (inputs.empty() || repetitions == 0) return out;
  std::vector<double> times;
  times.reserve(inputs.size() * repetitions);
  std::size_t sink = 0;
  for (std::size_t r = 0; r < repetitions; ++r) {
    for (const BoundPair& b : inputs) {
      const auto t0 = std::chrono::steady_clock::now();
      const ApproxProfile p = approximate_profile(b.lb, b.ub, b.start);
      const auto t1 = std::chrono::steady_clock::now();
      sink += p.vertices.size();
      times.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
  }
  std::sort(times.begin(), times.end());
  out.steps = inputs.front().lb.size();
  out.samples = times.size();
  bench_sink = sink;
  out.min_s = times.front();
  out.median_s = times[times.size() / 2];
  out.p99_s = times[std::min(times.size() - 1,
                             static_cast<std::size_t>(0.99 * times.size()))];
  return out;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw DimensionMismatch("need at least two matching points");
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchReport bench_approx_profile(const BenchConfig& config) {
  BenchReport report;
  std::mt19937_64 rng(config.seed);

  for (std::size_t steps : config.steps) {
    for (std::size_t k : config.ks) {
      std::vector<BoundPair> inputs;
      for (std::size_t i = 0; i < config.inputs; ++i) {
        inputs.push_back(obstacle_bounds(steps, k, rng));
      }
      LatencyStats s = time_profile(inputs, config.repetitions);
      s.k = k;
      report.random.push_back(s);
    }
  }

  std::vector<double> xs, ys;
  for (std::size_t steps : config.staircase_steps) {
    const BoundPair b = staircase_bounds(steps);
    const std::size_t reps = std::max<std::size_t>(5, config.repetitions / 10);
    const LatencyStats s = time_profile(std::span(&b, 1), reps);
    report.staircase.push_back({steps, s.median_s});
    xs.push_back(static_cast<double>(steps));
    ys.push_back(s.median_s);
  }
  if (xs.size() >= 2) report.staircase_slope = loglog_slope(xs, ys);

  xs.clear();
  ys.clear();
  for (std::size_t k : config.k_scaling) {
    std::vector<BoundPair> inputs;
    for (std::size_t i = 0; i < config.inputs; ++i) {
      inputs.push_back(obstacle_bounds(config.k_scaling_steps, k, rng));
    }
    const std::size_t reps = std::max<std::size_t>(3, config.repetitions / 20);
    const LatencyStats s = time_profile(inputs, reps);
    report.k_scaling.push_back({k, s.median_s});
    xs.push_back(static_cast<double>(k));
    ys.push_back(s.median_s);
  }
  if (xs.size() >= 2) report.k_slope = loglog_slope(xs, ys);
  return report;
}

}  // namespace mfp
