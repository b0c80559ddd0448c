#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "mfp/corridor.hpp"
#include "mfp/qp_solver.hpp"
#include "mfp/scenario.hpp"

namespace mfp {

struct CostWeights {
  double w_v = 0.0;
  double w_a = 1.0;
  double w_j = 0.1;
  double w_disp = 1.0;
};

/// Kinematic state of one time step.
struct StepState {
  double s = 0.0;
  double v = 0.0;
  double a = 0.0;
  double j = 0.0;
  friend bool operator==(const StepState&, const StepState&) = default;
};

enum Channel : std::size_t { kStation = 0, kSpeed = 1, kAccel = 2, kJerk = 3 };
inline constexpr std::size_t kChannels = 4;

/// Variable layout: one prefix block of `prefix_steps` steps followed by
/// `futures` suffix blocks of `horizon - prefix_steps` steps, each step
/// holding (s, v, a, j) in that order.
struct QpLayout {
  std::size_t horizon = 0;
  std::size_t prefix_steps = 0;
  std::size_t futures = 0;

  std::size_t suffix_steps() const noexcept { return horizon - prefix_steps; }
  std::size_t steps() const noexcept {
    return prefix_steps + futures * suffix_steps();
  }
  std::size_t variables() const noexcept { return kChannels * steps(); }
  /// Variable of `channel` at absolute time index `t` on future `future`'s
  /// branch (the prefix is shared by every branch).
  std::size_t index(std::size_t future, std::size_t t,
                    Channel channel) const noexcept {
    const std::size_t step =
        t < prefix_steps ? t
                         : prefix_steps + future * suffix_steps() +
                               (t - prefix_steps);
    return kChannels * step + channel;
  }
};

struct QpProblem {
  QpLayout layout;
  QpData data;
  double dt = 0.0;
  std::vector<double> probabilities;
  /// Raw (unshrunk) corridors, one per future.
  std::vector<Corridor> corridors;
  std::size_t initial_rows = 0;
  std::size_t dynamics_rows = 0;
  std::size_t continuity_rows = 0;
  std::size_t equality_rows() const noexcept {
    return initial_rows + dynamics_rows + continuity_rows;
  }
};

inline constexpr double kDefaultBandShrink = 0.05;

/// Multi-future QP for one corridor per future, sharing the first
/// `prefix_steps` steps.
///
/// Dynamics: s' = s + v dt + a dt^2 / 2, v' = v + a dt, j' = (a' - a) / dt.
/// Cost: sum of w_v v^2 + w_a a^2 + w_j j^2 per step, suffix steps scaled by
/// their future's probability; each suffix's final station is rewarded with
/// -p_i w_disp. Prefix steps are bounded by the pointwise intersection of all
/// corridors, suffix steps by their own corridor. Bounds at steps >= 1 are
/// shrunk inward by min(band_shrink, half width); step 0 uses the raw band.
/// Bounds at s = 0 and s = s_max are road limits and are never shrunk.
///
/// Throws DimensionMismatch on inconsistent inputs and EmptyPrefixBand when
/// the intersection is empty before `prefix_steps`.
QpProblem build_qp(std::span<const Corridor> corridors,
                   std::span<const double> probabilities,
                   std::size_t prefix_steps, const EgoState& ego,
                   const Limits& limits, double dt, const CostWeights& weights,
                   double band_shrink = kDefaultBandShrink);

QpSolution solve_qp(const QpProblem& problem,
                    const SolverSettings& settings = {});

/// Shared prefix plus one suffix per future.
struct MultiFuturePlan {
  std::vector<StepState> prefix;
  std::vector<std::vector<StepState>> suffixes;
  std::size_t t_d_steps = 0;
  std::size_t candidate_id = 0;
  double objective = 0.0;
  std::vector<bool> feasible;
  std::vector<double> probabilities;
  /// Future whose branch is kept when the plan is reused as a fallback.
  std::size_t anchor = 0;
  /// Time index of prefix[0] in the caller's clock.
  std::size_t start_step = 0;
  std::size_t plan_id = 0;
  bool degraded = false;

  std::size_t futures() const noexcept { return suffixes.size(); }
  std::size_t horizon() const noexcept;
  /// Full trajectory (prefix then suffix) seen by `future`.
  std::vector<StepState> branch(std::size_t future) const;
};

inline constexpr double kSeamTolerance = 1e-6;
inline constexpr double kBoundCheckTolerance = 1e-5;

/// Unpacks an Optimal solution. Throws SeamViolation when a suffix does not
/// continue the prefix dynamics within kSeamTolerance.
MultiFuturePlan extract_plan(const QpSolution& solution,
                             const QpProblem& problem);

/// Largest |residual| of the three dynamics relations along `branch`.
double dynamics_residual(std::span<const StepState> branch, double dt);

/// Plain-text dump: a header line `mfp-qp <n> <m> <nnz(P)> <nnz(A)>`, then
/// `P i j value` triplets, `q i value`, `A i j value` triplets and
/// `bound i lower upper` rows.
void write_qp_text(std::ostream& os, const QpProblem& problem);

}  // namespace mfp
