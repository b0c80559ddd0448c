#include "mfp/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "mfp/errors.hpp"
#include "mfp/objectives.hpp"

namespace mfp {

std::string_view to_string(PolicyId policy) noexcept {
  switch (policy) {
    case PolicyId::kDelayed:
      return "delayed";
    case PolicyId::kMostProbable:
      return "most_probable";
    case PolicyId::kConservative:
      return "conservative";
    case PolicyId::kExpectationUnlocked:
      return "expectation_unlocked";
  }
  return "unknown";
}

std::optional<PolicyId> parse_policy(std::string_view name) noexcept {
  for (PolicyId p : kAllPolicies) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view to_string(TerminalStatus status) noexcept {
  switch (status) {
    case TerminalStatus::kCompleted:
      return "completed";
    case TerminalStatus::kCollision:
      return "collision";
    case TerminalStatus::kPlannerFailure:
      return "planner_failure";
  }
  return "unknown";
}

std::string_view to_string(CycleSource source) noexcept {
  switch (source) {
    case CycleSource::kOptimal:
      return "optimal";
    case CycleSource::kDegraded:
      return "degraded";
    case CycleSource::kBraking:
      return "braking";
    case CycleSource::kNone:
      return "none";
  }
  return "unknown";
}

std::vector<FuturePrediction> shift_futures(
    const std::vector<FuturePrediction>& futures, double offset) {
  std::vector<FuturePrediction> out;
  out.reserve(futures.size());
  for (const FuturePrediction& f : futures) {
    FuturePrediction g{f.probability, {}, f.label};
    for (const StObstacle& o : f.obstacles) {
      if (o.t_out - offset < 0.0) continue;
      g.obstacles.push_back(StObstacle{std::max(0.0, o.t_in - offset),
                                       o.t_out - offset, o.s_in, o.s_out});
    }
    out.push_back(std::move(g));
  }
  return out;
}

bool collides(const ScenarioSpec& scenario, double t, double s) {
  const auto futures = scenario.joint_futures();
  return !satisfies(futures.at(scenario.true_future_index), t, s);
}

namespace {

std::vector<FuturePrediction> policy_futures(
    PolicyId policy, const std::vector<FuturePrediction>& futures,
    std::size_t truth, bool revealed) {
  if (revealed) {
    FuturePrediction f = futures[truth];
    f.probability = 1.0;
    return {f};
  }
  switch (policy) {
    case PolicyId::kDelayed:
    case PolicyId::kExpectationUnlocked:
      return futures;
    case PolicyId::kMostProbable: {
      std::vector<double> p;
      for (const auto& f : futures) p.push_back(f.probability);
      FuturePrediction f = futures[most_probable(p)];
      f.probability = 1.0;
      return {f};
    }
    case PolicyId::kConservative: {
      FuturePrediction all{1.0, {}, "conservative"};
      for (const auto& f : futures) {
        for (const auto& o : f.obstacles) {
          if (std::find(all.obstacles.begin(), all.obstacles.end(), o) ==
              all.obstacles.end()) {
            all.obstacles.push_back(o);
          }
        }
      }
      return {all};
    }
  }
  return futures;
}

PlannerConfig policy_config(PolicyId policy, PlannerConfig config) {
  if (policy == PolicyId::kExpectationUnlocked) {
    config.td_mode = TdMode::kFixed;
    config.td_fixed_steps = 1;
    config.td_max_steps = 1;
  }
  return config;
}

std::string fixed(double x) {
  char buf[64];
  // Avoid "-0.000000" so equal trajectories print equal text.
  if (std::abs(x) < 5e-7) x = 0.0;
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace

SimTrace simulate(const ScenarioSpec& scenario, PolicyId policy,
                  const PlannerConfig& config, std::uint64_t seed) {
  validate_scenario(scenario);
  const std::vector<FuturePrediction> futures = scenario.joint_futures();
  const std::size_t horizon = scenario.horizon_steps;
  const double dt = scenario.dt;
  const Limits& limits = scenario.limits;

  SimTrace trace;
  trace.policy = policy;
  trace.dt = dt;
  trace.true_future = scenario.true_future_index;
  trace.reveal_step = sample_reveal_time(scenario.reveal, seed);

  Planner planner(policy_config(policy, config));
  const FuturePrediction& truth = futures[scenario.true_future_index];

  StepState x{scenario.ego.s0, scenario.ego.v0,
              std::clamp(scenario.ego.a0, limits.a_min, limits.a_max), 0.0};
  x.a = std::max(x.a, -x.v / dt);

  for (std::size_t k = 0; k < horizon; ++k) {
    SimRecord rec;
    rec.step = k;
    rec.t = static_cast<double>(k) * dt;
    rec.state = x;
    rec.revealed = k >= trace.reveal_step;
    for (const FuturePrediction& f : futures) {
      rec.feasible.push_back(satisfies(f, rec.t, x.s));
    }

    if (!satisfies(truth, rec.t, x.s)) {
      trace.status = TerminalStatus::kCollision;
      trace.records.push_back(std::move(rec));
      break;
    }
    if (k + 1 == horizon) {
      trace.status = TerminalStatus::kCompleted;
      trace.records.push_back(std::move(rec));
      break;
    }

    PlanningSnapshot snapshot;
    snapshot.time_index = k;
    snapshot.ego = EgoState{x.s, x.v, x.a};
    snapshot.limits = limits;
    snapshot.dt = dt;
    snapshot.horizon_steps = horizon;
    snapshot.futures = shift_futures(
        policy_futures(policy, futures, scenario.true_future_index,
                       rec.revealed),
        rec.t);

    std::vector<StepState> branch;
    const auto start = std::chrono::steady_clock::now();
    try {
      MultiFuturePlan plan;
      if (policy == PolicyId::kConservative) {
        try {
          plan = mfp::plan(snapshot, planner.config());
          plan.plan_id = static_cast<std::size_t>(k);
          rec.source = CycleSource::kOptimal;
        } catch (const NoPlan&) {
          plan.prefix = braking_trajectory(snapshot.ego, limits, dt, horizon);
          plan.probabilities = {1.0};
          rec.source = CycleSource::kBraking;
        }
      } else {
        plan = planner.plan(snapshot);
        rec.source =
            plan.degraded ? CycleSource::kDegraded : CycleSource::kOptimal;
      }
      rec.plan_id = rec.source == CycleSource::kBraking
                        ? -1
                        : static_cast<long>(plan.plan_id);
      rec.t_d_steps = plan.t_d_steps;
      rec.candidate_id = plan.candidate_id;
      rec.planned_futures = std::max<std::size_t>(1, plan.futures());
      branch = plan.branch(plan.anchor);
    } catch (const Error& e) {
      rec.cycle_seconds = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      trace.status = TerminalStatus::kPlannerFailure;
      trace.message = e.what();
      trace.records.push_back(std::move(rec));
      break;
    }
    rec.cycle_seconds = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    trace.records.push_back(std::move(rec));

    // Integrate one step with the planned acceleration kept inside the box.
    double a_next = branch.size() > 1 ? branch[1].a : x.a;
    a_next = std::clamp(a_next, limits.a_min, limits.a_max);
    a_next = std::clamp(a_next, x.a + limits.j_min * dt,
                        x.a + limits.j_max * dt);
    StepState next;
    next.s = x.s + x.v * dt + 0.5 * x.a * dt * dt;
    next.v = std::max(0.0, x.v + x.a * dt);
    next.a = std::max(a_next, -next.v / dt);
    next.j = (next.a - x.a) / dt;
    x = next;
  }
  return trace;
}

void write_trace_csv(std::ostream& os, const SimTrace& trace) {
  os << "step,t,s,v,a,j,plan_id,t_d_steps,revealed,candidate_id,status\n";
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    const SimRecord& r = trace.records[i];
    const bool last = i + 1 == trace.records.size();
    os << r.step << ',' << fixed(r.t) << ',' << fixed(r.state.s) << ','
       << fixed(r.state.v) << ',' << fixed(r.state.a) << ','
       << fixed(r.state.j) << ',' << r.plan_id << ',' << r.t_d_steps << ','
       << (r.revealed ? 1 : 0) << ',' << r.candidate_id << ','
       << (last ? to_string(trace.status) : to_string(r.source)) << '\n';
  }
}

std::string trace_csv(const SimTrace& trace) {
  std::ostringstream os;
  write_trace_csv(os, trace);
  return os.str();
}

Metrics evaluate_metrics(const SimTrace& trace, const ScenarioSpec& scenario) {
  Metrics m;
  m.status = trace.status;
  if (trace.records.empty()) return m;
  const auto futures = scenario.joint_futures();
  const FuturePrediction& truth = futures.at(scenario.true_future_index);

  m.final_displacement =
      trace.records.back().state.s - trace.records.front().state.s;
  m.min_acceleration = trace.records.front().state.a;
  bool decided = false;
  for (const SimRecord& r : trace.records) {
    if (!satisfies(truth, r.t, r.state.s)) m.collision = true;
    m.min_acceleration = std::min(m.min_acceleration, r.state.a);
    m.max_abs_jerk = std::max(m.max_abs_jerk, std::abs(r.state.j));
    if (r.source != CycleSource::kNone) m.cycle_seconds.push_back(r.cycle_seconds);
    const bool distinct =
        r.revealed || r.planned_futures == 1 ||
        (r.source != CycleSource::kNone && r.t_d_steps <= 1);
    if (!decided && distinct) {
      m.decision_delay = r.t;
      decided = true;
    }
  }
  if (!decided) m.decision_delay = trace.records.back().t;
  return m;
}

}  // namespace mfp
