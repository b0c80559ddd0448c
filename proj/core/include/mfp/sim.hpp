#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mfp/multi_future_qp.hpp"
#include "mfp/planner.hpp"
#include "mfp/scenario.hpp"

namespace mfp {

enum class PolicyId {
  kDelayed,
  kMostProbable,
  kConservative,
  kExpectationUnlocked,
};

std::string_view to_string(PolicyId policy) noexcept;
std::optional<PolicyId> parse_policy(std::string_view name) noexcept;
inline constexpr PolicyId kAllPolicies[] = {
    PolicyId::kDelayed, PolicyId::kMostProbable, PolicyId::kConservative,
    PolicyId::kExpectationUnlocked};

enum class TerminalStatus { kCompleted, kCollision, kPlannerFailure };
std::string_view to_string(TerminalStatus status) noexcept;

/// Where the executed step of a cycle came from.
enum class CycleSource { kOptimal, kDegraded, kBraking, kNone };
std::string_view to_string(CycleSource source) noexcept;

struct SimRecord {
  std::size_t step = 0;
  double t = 0.0;
  StepState state;
  /// -1 when no plan was made in this cycle.
  long plan_id = -1;
  std::size_t t_d_steps = 0;
  bool revealed = false;
  std::size_t candidate_id = 0;
  CycleSource source = CycleSource::kNone;
  /// One bit per scenario future: the executed sample avoids its obstacles.
  std::vector<bool> feasible;
  /// Futures in the plan of this cycle.
  std::size_t planned_futures = 0;
  double cycle_seconds = 0.0;
};

struct SimTrace {
  std::vector<SimRecord> records;
  TerminalStatus status = TerminalStatus::kCompleted;
  PolicyId policy = PolicyId::kDelayed;
  double dt = 0.0;
  std::size_t reveal_step = 0;
  std::size_t true_future = 0;
  std::string message;
};

/// Closed loop at dt over the scenario horizon. Each cycle replans over a
/// receding horizon of `horizon_steps`, executes one step of the plan and
/// advances. From the sampled reveal step on, every policy plans against the
/// true future alone. Ends at the horizon, on collision with a true-future
/// obstacle, or when the planner has nothing to execute.
SimTrace simulate(const ScenarioSpec& scenario, PolicyId policy,
                  const PlannerConfig& config, std::uint64_t seed);

/// Columns: step,t,s,v,a,j,plan_id,t_d_steps,revealed,candidate_id,status.
/// `status` is the cycle source on running rows and the terminal status on
/// the last row. Fixed precision, so equal traces give equal bytes.
void write_trace_csv(std::ostream& os, const SimTrace& trace);
std::string trace_csv(const SimTrace& trace);

struct Metrics {
  bool collision = false;
  double final_displacement = 0.0;
  double min_acceleration = 0.0;
  double max_abs_jerk = 0.0;
  /// Time of the first cycle whose executed step was not shared by every
  /// planned future (or the last record time when that never happened).
  double decision_delay = 0.0;
  std::vector<double> cycle_seconds;
  TerminalStatus status = TerminalStatus::kCompleted;
};

Metrics evaluate_metrics(const SimTrace& trace, const ScenarioSpec& scenario);

/// True when (t, s) lies inside an obstacle of the scenario's true future.
bool collides(const ScenarioSpec& scenario, double t, double s);

/// Snapshot of the scenario at step k: obstacles shifted to the snapshot
/// clock and dropped once they lie in the past.
std::vector<FuturePrediction> shift_futures(
    const std::vector<FuturePrediction>& futures, double offset);

}  // namespace mfp
