#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfp/scenario.hpp"

namespace mfp {

/// Which side of an obstacle a corridor passes on.
enum class Side : std::uint8_t { kIgnored, kBelow, kAbove };

/// One convex band of station bounds over the discretized horizon.
struct Corridor {
  std::vector<double> lb;
  std::vector<double> ub;
  /// One entry per input obstacle; kIgnored for obstacles that constrain
  /// nothing inside the horizon.
  std::vector<Side> decisions;
  /// Binary encoding of the decisions over the considered obstacles
  /// (below = 0, above = 1, obstacle order = bit significance ascending).
  std::uint64_t code = 0;

  std::size_t steps() const noexcept { return lb.size(); }
  /// lb[t] <= ub[t] everywhere.
  bool feasible() const noexcept;
};

struct CorridorSet {
  std::size_t future_index = 0;
  std::vector<Corridor> corridors;
};

/// Inclusive range of time indices an obstacle blocks, expanded outward to
/// whole steps. `first > last` when the obstacle misses the horizon.
struct IndexRange {
  std::ptrdiff_t first = 0;
  std::ptrdiff_t last = -1;
  bool empty() const noexcept { return first > last; }
};
IndexRange blocked_indices(const StObstacle& obstacle, double dt,
                           std::size_t steps);

/// All above/below corridors for an obstacle set, monotonized and with empty
/// bands dropped, ordered by ascending `code`. Obstacles outside the horizon
/// or the [0, s_max] station range are ignored; a side that would need
/// s < 0 or s > s_max is not enumerated.
std::vector<Corridor> enumerate_corridors(std::span<const StObstacle> obstacles,
                                          const Limits& limits, double dt,
                                          std::size_t steps);

/// ub'[t] = min_{z>=t} ub[z], lb'[t] = max_{z<=t} lb[z].
/// Throws InfeasibleCorridor when the result crosses.
Corridor monotonize(const Corridor& corridor);

/// Pointwise max of lb, min of ub. The result may be empty (lb > ub).
Corridor intersect(std::span<const Corridor> corridors);

/// Keeps corridors that admit an approximate profile from the ego station
/// and that a non-reversing profile starting at s0 can follow without
/// exceeding v_max: lb[j] - u[i] <= v_max (j - i) dt for all i <= j, with
/// u[0] = s0 and u[i] = ub[i] otherwise.
std::vector<Corridor> prune_infeasible(std::span<const Corridor> corridors,
                                       const EgoState& ego,
                                       const Limits& limits, double dt);

}  // namespace mfp
