#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace oracle {

namespace {

using mfp::ProfileVertex;

struct Recursion {
  const std::vector<double>& lb;
  const std::vector<double>& ub;

  static double line(const ProfileVertex& a, const ProfileVertex& b,
                     std::size_t i) {
    if (i == a.index) return a.station;
    if (i == b.index) return b.station;
    const double w = static_cast<double>(i - a.index) /
                     static_cast<double>(b.index - a.index);
    return a.station + (b.station - a.station) * w;
  }

  static void join(std::vector<ProfileVertex>& left,
                   const std::vector<ProfileVertex>& right) {
    left.insert(left.end(), right.begin() + 1, right.end());
  }

  std::vector<ProfileVertex> lower(ProfileVertex p0, ProfileVertex pe,
                                   bool fresh) {
    double best = 0.0;
    std::size_t at = 0;
    for (std::size_t i = p0.index + 1; i < pe.index; ++i) {
      const double diff = line(p0, pe, i) - lb[i];
      if (diff < best) {
        best = diff;
        at = i;
      }
    }
    if (at == 0) {
      if (fresh) return upper(p0, pe, false);
      return {p0, pe};
    }
    const ProfileVertex mid{at, lb[at]};
    auto left = upper(p0, mid, true);
    join(left, upper(mid, pe, true));
    return left;
  }

  std::vector<ProfileVertex> upper(ProfileVertex p0, ProfileVertex pe,
                                   bool fresh) {
    double best = 0.0;
    std::size_t at = 0;
    for (std::size_t i = p0.index + 1; i < pe.index; ++i) {
      const double diff = ub[i] - line(p0, pe, i);
      if (diff < best) {
        best = diff;
        at = i;
      }
    }
    if (at == 0) {
      if (fresh) return lower(p0, pe, false);
      return {p0, pe};
    }
    const ProfileVertex mid{at, ub[at]};
    auto left = lower(p0, mid, true);
    join(left, lower(mid, pe, true));
    return left;
  }
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

}  // namespace

std::vector<ProfileVertex> recursive_profile(const std::vector<double>& lb,
                                             const std::vector<double>& ub,
                                             double start, double s_max) {
  const std::size_t n = lb.size();
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < n; ++t) {
    margin = std::min(margin, (ub[t] - lb[t]) / 2.0);
  }
  margin = std::max(0.0, std::min(margin, s_max / 2.0));
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (std::size_t t = 0; t < n; ++t) {
    lo[t] = lb[t] + margin;
    hi[t] = ub[t] - margin;
  }
  Recursion r{lo, hi};
  return r.lower({0, start}, {n - 1, hi[n - 1]}, true);
}

RandomBounds random_bounds(std::size_t steps, std::size_t k,
                           std::mt19937_64& rng) {
  RandomBounds b;
  b.path.resize(steps);
  double s = uniform(rng, 0.0, 5.0);
  for (std::size_t t = 0; t < steps; ++t) {
    b.path[t] = s;
    s += uniform(rng, 0.0, 3.0);
  }
  const double top = b.path.back() + 50.0;
  b.lb.assign(steps, 0.0);
  b.ub.assign(steps, top);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t t0 = pick(rng, 0, steps - 1);
    const std::size_t t1 =
        std::min(steps - 1, t0 + pick(rng, 0, std::max<std::size_t>(1, steps / 4)));
    const double gap = uniform(rng, 0.5, 10.0);
    if (rng() % 2 == 0) {
      const double cap = b.path[t1] + gap;
      for (std::size_t t = t0; t <= t1; ++t) b.ub[t] = std::min(b.ub[t], cap);
    } else {
      const double floor = std::max(0.0, b.path[t0] - gap);
      for (std::size_t t = t0; t <= t1; ++t) b.lb[t] = std::max(b.lb[t], floor);
    }
  }
  for (std::size_t t = steps - 1; t-- > 0;) b.ub[t] = std::min(b.ub[t], b.ub[t + 1]);
  for (std::size_t t = 1; t < steps; ++t) b.lb[t] = std::max(b.lb[t], b.lb[t - 1]);
  b.start = b.path[0];
  return b;
}

long grid_violation(const mfp::Corridor& corridor,
                    const std::vector<mfp::StObstacle>& obstacles, double dt,
                    double resolution) {
  for (std::size_t i = 0; i < corridor.steps(); ++i) {
    const double t = static_cast<double>(i) * dt;
    const auto first = static_cast<long>(std::floor(corridor.lb[i] / resolution));
    const auto last = static_cast<long>(std::ceil(corridor.ub[i] / resolution));
    for (long j = first; j <= last; ++j) {
      const double s = static_cast<double>(j) * resolution;
      if (!(s > corridor.lb[i] && s < corridor.ub[i])) continue;
      for (const auto& o : obstacles) {
        if (o.contains(t, s)) return static_cast<long>(i);
      }
    }
  }
  return -1;
}

BruteForce brute_force_qp(const mfp::Corridor& corridor,
                          const mfp::EgoState& ego, const mfp::Limits& limits,
                          double dt, const mfp::CostWeights& weights,
                          double step, double shrink) {
  const std::size_t n = corridor.steps();
  std::vector<double> grid;
  const auto count = static_cast<long>(
      std::floor((limits.a_max - limits.a_min) / step + 1e-9));
  for (long i = 0; i <= count; ++i) {
    grid.push_back(limits.a_min + static_cast<double>(i) * step);
  }
  std::vector<double> lo(n);
  std::vector<double> hi(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double e = t == 0 ? 0.0
                            : std::min(shrink, std::max(0.0, (corridor.ub[t] - corridor.lb[t]) / 2));
    lo[t] = corridor.lb[t] > 0.0 ? corridor.lb[t] + e : corridor.lb[t];
    hi[t] = corridor.ub[t] < limits.s_max ? corridor.ub[t] - e : corridor.ub[t];
  }

  BruteForce best;
  best.objective = std::numeric_limits<double>::infinity();
  std::vector<double> accel(n, 0.0);
  accel[0] = ego.a0;
  constexpr double tol = 1e-9;

  auto step_cost = [&](double v, double a, double j) {
    return weights.w_v * v * v + weights.w_a * a * a + weights.w_j * j * j;
  };
  // Depth-first over a_1..a_{n-1}; (s, v) at step t follow from step t-1.
  auto search = [&](auto&& self, std::size_t t, double s, double v,
                    double cost) -> void {
    if (t == n) {
      const double total = cost - weights.w_disp * s;
      if (total < best.objective) {
        best.objective = total;
        best.accel = accel;
        best.found = true;
      }
      return;
    }
    const double a_prev = accel[t - 1];
    const double s_t = s + v * dt + 0.5 * a_prev * dt * dt;
    const double v_t = v + a_prev * dt;
    if (v_t < -tol || v_t > limits.v_max + tol) return;
    if (s_t < lo[t] - tol || s_t > hi[t] + tol) return;
    for (double a : grid) {
      const double j = (a - a_prev) / dt;
      if (j < limits.j_min - tol || j > limits.j_max + tol) continue;
      accel[t] = a;
      self(self, t + 1, s_t, v_t, cost + step_cost(v_t, a, j));
    }
  };
  if (ego.s0 < lo[0] - tol || ego.s0 > hi[0] + tol) return best;
  search(search, 1, ego.s0, ego.v0, step_cost(ego.v0, ego.a0, 0.0));
  // The last station is fixed by the step before it, so the final
  // acceleration is searched only for its own cost above.
  return best;
}

std::size_t linear_scan_td(const std::vector<mfp::Corridor>& corridors,
                           const std::vector<double>& probabilities,
                           const mfp::EgoState& ego, const mfp::Limits& limits,
                           double dt, const mfp::PlannerConfig& config) {
  const std::size_t horizon = corridors.front().steps();
  const std::size_t top = std::min(config.td_max_steps, horizon - 1);
  std::size_t best = 0;
  for (std::size_t lock = 1; lock <= top; ++lock) {
    if (mfp::lock_feasible(corridors, probabilities, lock, ego, limits, dt,
                           config)) {
      best = lock;
    }
  }
  return best;
}

TdInstance random_td_instance(std::mt19937_64& rng) {
  mfp::PlannerConfig config;
  for (;;) {
    TdInstance in;
    in.dt = 0.5;
    in.limits = mfp::Limits{20.0, -6.0, 4.0, -20.0, 20.0, 300.0};
    in.ego = mfp::EgoState{0.0, uniform(rng, 2.0, 8.0), 0.0};
    const std::size_t steps = pick(rng, 10, 30);
    const std::size_t split = pick(rng, 3, steps - 2);
    const std::size_t release = pick(rng, split, steps - 1);
    const double v0 = in.ego.v0;
    const double u = v0 * v0 / 8.0 + v0 * 0.5 + uniform(rng, 1.0, 20.0);
    const double l = u + uniform(rng, 2.0, 10.0);

    mfp::Corridor below;
    below.lb.assign(steps, 0.0);
    below.ub.assign(steps, in.limits.s_max);
    for (std::size_t t = 0; t <= release; ++t) below.ub[t] = u;
    mfp::Corridor above;
    above.lb.assign(steps, 0.0);
    above.ub.assign(steps, in.limits.s_max);
    for (std::size_t t = split; t < steps; ++t) above.lb[t] = l;
    in.corridors = {below, above};
    const double p = uniform(rng, 0.2, 0.8);
    in.probabilities = {p, 1.0 - p};
    if (mfp::lock_feasible(in.corridors, in.probabilities, 1, in.ego,
                           in.limits, in.dt, config)) {
      return in;
    }
  }
}

mfp::ScenarioSpec random_battery_scenario(std::mt19937_64& rng,
                                          std::size_t horizon_steps) {
  mfp::ScenarioSpec spec;
  spec.dt = 0.25;
  spec.horizon_steps = horizon_steps;
  const double v0 = uniform(rng, 6.0, 10.0);
  spec.ego = mfp::EgoState{0.0, v0, 0.0};
  const double end = spec.dt * static_cast<double>(horizon_steps);

  const double p = uniform(rng, 0.55, 0.9);
  mfp::FuturePrediction clear{p, {}, "clear"};
  if (rng() % 2 == 0) {
    const double t_in = uniform(rng, 0.5 * end, 0.75 * end);
    const double s_in = v0 * t_in + uniform(rng, 5.0, 15.0);
    clear.obstacles.push_back({t_in, end, s_in, s_in + 5.0});
  }
  const double t_in = uniform(rng, 0.5, 2.0);
  const double t_out = std::min(end, t_in + uniform(rng, 1.5, 3.0));
  const double s_in = v0 * uniform(rng, t_in, t_in + 0.8) + 16.0;
  mfp::FuturePrediction cross{1.0 - p,
                              {{t_in, t_out, s_in, s_in + uniform(rng, 3.0, 6.0)}},
                              "cross"};
  spec.futures = {clear, cross};
  spec.reveal.mode = mfp::RevealModel::Mode::kFixed;
  spec.reveal.t_r_fixed = pick(rng, 4, 12);
  spec.true_future_index = 0;
  return spec;
}

mfp::ScenarioSpec realtime_scenario(std::size_t k, std::size_t m) {
  mfp::ScenarioSpec spec;
  spec.dt = 0.25;
  spec.horizon_steps = 40;
  spec.ego = mfp::EgoState{0.0, 8.0, 0.0};
  double total = 0.0;
  for (std::size_t f = 0; f < m; ++f) total += static_cast<double>(m - f);
  for (std::size_t f = 0; f < m; ++f) {
    mfp::FuturePrediction future;
    future.probability = static_cast<double>(m - f) / total;
    future.label = "f" + std::to_string(f);
    const double t_in = 2.0 + 0.05 * static_cast<double>(f);
    for (std::size_t i = 0; i < k; ++i) {
      const double s_in = 20.0 + 8.0 * static_cast<double>(i);
      future.obstacles.push_back({t_in, t_in + 1.0, s_in, s_in + 4.0});
    }
    spec.futures.push_back(std::move(future));
  }
  spec.reveal.mode = mfp::RevealModel::Mode::kFixed;
  spec.reveal.t_r_fixed = spec.horizon_steps - 1;
  return spec;
}

}  // namespace oracle
