#include "mfp/corridor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfp/approx_profile.hpp"
#include "mfp/errors.hpp"

namespace mfp {

namespace {

constexpr double kIndexSnap = 1e-9;
constexpr double kReachTolerance = 1e-9;

struct Considered {
  std::size_t input_index;
  IndexRange range;
  double s_in;
  double s_out;
  bool below_possible;
  bool above_possible;
};

struct Enumerator {
  const std::vector<Considered>& obstacles;
  std::size_t input_count;
  std::vector<Corridor>& out;

  // Decides obstacles from the most significant (last) down to bit 0, below
  // before above, which yields corridors in ascending code order.
  void descend(std::size_t remaining, std::vector<double>& lb,
               std::vector<double>& ub, std::vector<Side>& decisions,
               std::uint64_t code) {
    if (remaining == 0) {
      Corridor c;
      c.lb = lb;
      c.ub = ub;
      c.decisions = decisions;
      c.code = code;
      out.push_back(std::move(c));
      return;
    }
    const std::size_t bit = remaining - 1;
    const Considered& o = obstacles[bit];
    const auto last = static_cast<std::size_t>(o.range.last);
    const auto first = static_cast<std::size_t>(o.range.first);

    if (o.below_possible) {
      // Staying below until the obstacle leaves: ub <= s_in on [0, last].
      std::vector<double> ub2 = ub;
      bool ok = true;
      for (std::size_t t = 0; t <= last; ++t) {
        ub2[t] = std::min(ub2[t], o.s_in);
        if (lb[t] > ub2[t]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        decisions[o.input_index] = Side::kBelow;
        descend(remaining - 1, lb, ub2, decisions, code);
      }
    }
    if (o.above_possible) {
      // Ahead of the obstacle from its arrival on: lb >= s_out on [first, T).
      std::vector<double> lb2 = lb;
      bool ok = true;
      for (std::size_t t = first; t < lb2.size(); ++t) {
        lb2[t] = std::max(lb2[t], o.s_out);
        if (lb2[t] > ub[t]) {
          ok = false;
          break;
        }
      }
      if (ok) {
        decisions[o.input_index] = Side::kAbove;
        descend(remaining - 1, lb2, ub, decisions,
                code | (std::uint64_t{1} << bit));
      }
    }
    decisions[o.input_index] = Side::kIgnored;
  }
};

}  // namespace

bool Corridor::feasible() const noexcept {
  for (std::size_t t = 0; t < lb.size(); ++t) {
    if (lb[t] > ub[t]) return false;
  }
  return true;
}

IndexRange blocked_indices(const StObstacle& obstacle, double dt,
                           std::size_t steps) {
  const double first = std::floor(obstacle.t_in / dt + kIndexSnap);
  const double last = std::ceil(obstacle.t_out / dt - kIndexSnap);
  IndexRange r;
  r.first = static_cast<std::ptrdiff_t>(std::max(first, 0.0));
  r.last = static_cast<std::ptrdiff_t>(
      std::min(last, static_cast<double>(steps) - 1.0));
  if (last < 0.0) r.last = -1;
  return r;
}

std::vector<Corridor> enumerate_corridors(std::span<const StObstacle> obstacles,
                                          const Limits& limits, double dt,
                                          std::size_t steps) {
  if (steps < 2) throw DimensionMismatch("corridors need at least two steps");

  std::vector<Considered> considered;
  for (std::size_t i = 0; i < obstacles.size(); ++i) {
    const StObstacle& o = obstacles[i];
    const IndexRange range = blocked_indices(o, dt, steps);
    if (range.empty()) continue;
    if (o.s_in >= limits.s_max || o.s_out <= 0.0) continue;
    considered.push_back({i, range, o.s_in, o.s_out, o.s_in > 0.0,
                          o.s_out < limits.s_max});
  }
  if (considered.size() >= 63) {
    throw DimensionMismatch("too many obstacles to enumerate");
  }

  std::vector<double> lb(steps, 0.0);
  std::vector<double> ub(steps, limits.s_max);
  std::vector<Side> decisions(obstacles.size(), Side::kIgnored);
  std::vector<Corridor> out;
  Enumerator e{considered, obstacles.size(), out};
  e.descend(considered.size(), lb, ub, decisions, 0);
  return out;
}

Corridor monotonize(const Corridor& corridor) {
  Corridor out = corridor;
  const std::size_t n = out.steps();
  for (std::size_t t = 1; t < n; ++t) {
    out.lb[t] = std::max(out.lb[t], out.lb[t - 1]);
  }
  for (std::size_t t = n; t-- > 1;) {
    out.ub[t - 1] = std::min(out.ub[t - 1], out.ub[t]);
  }
  for (std::size_t t = 0; t < n; ++t) {
    if (out.lb[t] > out.ub[t]) {
      throw InfeasibleCorridor("monotonized bounds cross at index " +
                               std::to_string(t));
    }
  }
  return out;
}

Corridor intersect(std::span<const Corridor> corridors) {
  if (corridors.empty()) throw DimensionMismatch("nothing to intersect");
  Corridor out;
  out.lb = corridors.front().lb;
  out.ub = corridors.front().ub;
  if (corridors.size() == 1) {
    out.decisions = corridors.front().decisions;
    out.code = corridors.front().code;
  }
  for (const Corridor& c : corridors.subspan(1)) {
    if (c.steps() != out.steps() || c.ub.size() != out.steps()) {
      throw DimensionMismatch("corridor lengths differ");
    }
    for (std::size_t t = 0; t < out.steps(); ++t) {
      out.lb[t] = std::max(out.lb[t], c.lb[t]);
      out.ub[t] = std::min(out.ub[t], c.ub[t]);
    }
  }
  return out;
}

std::vector<Corridor> prune_infeasible(std::span<const Corridor> corridors,
                                       const EgoState& ego,
                                       const Limits& limits, double dt) {
  std::vector<Corridor> kept;
  for (const Corridor& c : corridors) {
    try {
      approximate_profile(c.lb, c.ub, ego.s0, limits.s_max);
    } catch (const Infeasible&) {
      continue;
    }
    // Reaching lb[j] from at most ub[i] (from s0 at i = 0) never needs more
    // than v_max. Tracks min_i (ub[i] - v_max t_i) in one pass.
    bool reachable = true;
    double slack = ego.s0;
    for (std::size_t t = 0; t < c.steps(); ++t) {
      const double shift = limits.v_max * dt * static_cast<double>(t);
      if (t > 0) slack = std::min(slack, c.ub[t] - shift);
      if (c.lb[t] - shift > slack + kReachTolerance) {
        reachable = false;
        break;
      }
    }
    if (reachable) kept.push_back(c);
  }
  return kept;
}

}  // namespace mfp
