#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfp/approx_profile.hpp"
#include "mfp/corridor.hpp"
#include "mfp/multi_future_qp.hpp"
#include "mfp/qp_solver.hpp"
#include "mfp/scenario.hpp"

namespace mfp {

enum class TdMode { kExact, kFixed };

struct PlannerConfig {
  TdMode td_mode = TdMode::kExact;
  std::size_t td_fixed_steps = 4;
  /// Longest prefix lock considered; clamped to horizon - 1 at plan time.
  std::size_t td_max_steps = 8;
  CostWeights weights;
  SolverSettings solver;
  double band_shrink = kDefaultBandShrink;
  /// Candidate-evaluation workers; 0 reads MFP_THREADS (default 1).
  std::size_t threads = 0;
};

/// Throws ValidationError when td_fixed_steps or td_max_steps are out of
/// order.
void validate_config(const PlannerConfig& config);

/// One corridor per future, chosen around an anchor corridor.
struct CandidateTuple {
  std::size_t id = 0;
  std::vector<std::size_t> corridor_index;
  std::vector<ApproxProfile> profiles;
  double distance = 0.0;
};

/// For every corridor of the anchor future, picks in each other future the
/// corridor whose sampled approximate profile is closest in squared error
/// (ties: lower index). Yields one tuple per anchor corridor.
/// Throws NoCorridor when a future has no corridor.
std::vector<CandidateTuple> pair_corridors(std::span<const CorridorSet> sets,
                                           const EgoState& ego,
                                           std::size_t anchor);

/// Necessary condition for a corridor to hold any trajectory of the QP
/// dynamics from `ego`: lb never exceeds the full-throttle (jerk-limited,
/// v_max-capped) station and ub never drops below the full-braking station.
/// A false result means every QP using the corridor is infeasible.
bool within_reach(const Corridor& corridor, const EgoState& ego,
                  const Limits& limits, double dt);

/// Most probable future, lowest index on ties.
std::size_t most_probable(std::span<const double> probabilities) noexcept;

struct DecisionSearch {
  std::size_t t_d_steps = 0;
  QpProblem problem;
  QpSolution solution;
  /// Number of QPs solved during the search.
  std::size_t solves = 0;
};

/// Lock length search for one candidate tuple that also keeps the QP solved
/// at the returned length. Exact mode binary-searches the largest feasible
/// L in [1, td_max]; fixed mode tries min(td_fixed, td_max) and halves on
/// infeasibility. Throws NoFeasibleLock when L = 1 is infeasible.
DecisionSearch search_decision_time(std::span<const Corridor> corridors,
                                    std::span<const double> probabilities,
                                    const EgoState& ego, const Limits& limits,
                                    double dt, const PlannerConfig& config);

std::size_t compute_decision_time(std::span<const Corridor> corridors,
                                  std::span<const double> probabilities,
                                  const EgoState& ego, const Limits& limits,
                                  double dt, const PlannerConfig& config);

/// True when build_qp + solve_qp at this lock length ends Optimal.
bool lock_feasible(std::span<const Corridor> corridors,
                   std::span<const double> probabilities,
                   std::size_t prefix_steps, const EgoState& ego,
                   const Limits& limits, double dt,
                   const PlannerConfig& config);

/// Everything the planner sees in one cycle. Obstacle times are relative to
/// the snapshot (t = 0 is now).
struct PlanningSnapshot {
  std::size_t time_index = 0;
  EgoState ego;
  Limits limits;
  double dt = 0.25;
  std::size_t horizon_steps = 40;
  std::vector<FuturePrediction> futures;
};

struct PlanDiagnostics {
  std::vector<std::size_t> corridors_per_future;
  std::size_t candidates = 0;
  std::size_t optimal_candidates = 0;
  std::size_t qp_solves = 0;
};

/// One planning cycle. Returns the lowest-objective optimal candidate (ties:
/// lowest tuple id). When no candidate is optimal, falls back to
/// `previous` reindexed to the snapshot time with `degraded` set, or throws
/// NoPlan.
MultiFuturePlan plan(const PlanningSnapshot& snapshot,
                     const PlannerConfig& config,
                     const MultiFuturePlan* previous = nullptr,
                     PlanDiagnostics* diagnostics = nullptr);

/// `previous` shifted to `time_index`, keeping its anchor branch and
/// extending it with maximum braking to `horizon_steps`.
MultiFuturePlan reindex_fallback(const MultiFuturePlan& previous,
                                 std::size_t time_index,
                                 std::size_t horizon_steps,
                                 const Limits& limits, double dt);

/// Jerk-limited stop from `ego`, `horizon_steps` long.
std::vector<StepState> braking_trajectory(const EgoState& ego,
                                          const Limits& limits, double dt,
                                          std::size_t horizon_steps);

/// Holds the previous plan between cycles. Not safe for concurrent plan()
/// calls.
class Planner {
 public:
  explicit Planner(PlannerConfig config);

  /// Plans and remembers the result (including degraded fallbacks).
  MultiFuturePlan plan(const PlanningSnapshot& snapshot);

  const std::optional<MultiFuturePlan>& previous() const noexcept {
    return previous_;
  }
  const PlanDiagnostics& diagnostics() const noexcept { return diagnostics_; }
  const PlannerConfig& config() const noexcept { return config_; }
  void reset() noexcept { previous_.reset(); }
  /// Replaces the remembered plan (used by policies that synthesize plans).
  void remember(MultiFuturePlan plan) { previous_ = std::move(plan); }

 private:
  PlannerConfig config_;
  std::optional<MultiFuturePlan> previous_;
  PlanDiagnostics diagnostics_;
  std::size_t next_id_ = 0;
};

/// Worker count from MFP_THREADS, at least 1.
std::size_t threads_from_env();

}  // namespace mfp
