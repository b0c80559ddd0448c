#include "mfp/planner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <string>
#include <thread>

#include "mfp/errors.hpp"

namespace mfp {

namespace {

std::size_t effective_td_max(const PlannerConfig& config, std::size_t horizon) {
  return std::clamp<std::size_t>(config.td_max_steps, 1, horizon - 1);
}

std::optional<std::pair<QpProblem, QpSolution>> attempt_lock(
    std::span<const Corridor> corridors, std::span<const double> probabilities,
    std::size_t prefix_steps, const EgoState& ego, const Limits& limits,
    double dt, const PlannerConfig& config, std::size_t& solves) {
  QpProblem problem;
  try {
    problem = build_qp(corridors, probabilities, prefix_steps, ego, limits, dt,
                       config.weights, config.band_shrink);
  } catch (const EmptyPrefixBand&) {
    return std::nullopt;
  }
  QpSolution solution = solve_qp(problem, config.solver);
  ++solves;
  if (solution.status != SolverStatus::kOptimal) return std::nullopt;
  return std::pair{std::move(problem), std::move(solution)};
}

template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

struct CandidateResult {
  std::optional<MultiFuturePlan> plan;
  std::size_t solves = 0;
};

}  // namespace

std::size_t threads_from_env() {
  if (const char* env = std::getenv("MFP_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return 1;
}

void validate_config(const PlannerConfig& config) {
  if (config.td_max_steps < 1) {
    throw ValidationError("td_max_steps", "must be >= 1");
  }
  if (config.td_fixed_steps < 1 || config.td_fixed_steps > config.td_max_steps) {
    throw ValidationError("td_fixed_steps", "must lie in [1, td_max_steps]");
  }
  const CostWeights& w = config.weights;
  if (w.w_v < 0.0 || w.w_a < 0.0 || w.w_j < 0.0 || w.w_disp < 0.0) {
    throw ValidationError("weights", "must be non-negative");
  }
  if (w.w_v + w.w_a + w.w_j + w.w_disp <= 0.0) {
    throw ValidationError("weights", "at least one weight must be positive");
  }
}

std::size_t most_probable(std::span<const double> probabilities) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probabilities.size(); ++i) {
    if (probabilities[i] > probabilities[best]) best = i;
  }
  return best;
}

std::vector<CandidateTuple> pair_corridors(std::span<const CorridorSet> sets,
                                           const EgoState& ego,
                                           std::size_t anchor) {
  if (anchor >= sets.size()) throw DimensionMismatch("anchor out of range");
  for (std::size_t f = 0; f < sets.size(); ++f) {
    if (sets[f].corridors.empty()) throw NoCorridor(f);
  }

  // Approximate profiles and their dense samples, per future per corridor.
  std::vector<std::vector<ApproxProfile>> profiles(sets.size());
  std::vector<std::vector<std::vector<double>>> samples(sets.size());
  for (std::size_t f = 0; f < sets.size(); ++f) {
    for (const Corridor& c : sets[f].corridors) {
      ApproxProfile p;
      std::vector<double> dense;
      try {
        p = approximate_profile(c.lb, c.ub, ego.s0);
        dense = sample_profile(p, c.steps());
      } catch (const Error&) {
        // Left empty; never the closest match.
      }
      profiles[f].push_back(std::move(p));
      samples[f].push_back(std::move(dense));
    }
  }

  const auto distance = [](const std::vector<double>& a,
                           const std::vector<double>& b) {
    if (a.empty() || b.empty() || a.size() != b.size()) {
      return std::numeric_limits<double>::infinity();
    }
    double d = 0.0;
    for (std::size_t t = 0; t < a.size(); ++t) d += (a[t] - b[t]) * (a[t] - b[t]);
    return d;
  };

  std::vector<CandidateTuple> tuples;
  for (std::size_t a = 0; a < sets[anchor].corridors.size(); ++a) {
    CandidateTuple tuple;
    tuple.id = a;
    const auto& ref = samples[anchor][a];
    for (std::size_t f = 0; f < sets.size(); ++f) {
      if (f == anchor) {
        tuple.corridor_index.push_back(a);
        tuple.profiles.push_back(profiles[anchor][a]);
        continue;
      }
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < samples[f].size(); ++c) {
        const double d = distance(ref, samples[f][c]);
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      tuple.corridor_index.push_back(best);
      tuple.profiles.push_back(profiles[f][best]);
      tuple.distance += best_d;
    }
    tuples.push_back(std::move(tuple));
  }
  return tuples;
}

DecisionSearch search_decision_time(std::span<const Corridor> corridors,
                                    std::span<const double> probabilities,
                                    const EgoState& ego, const Limits& limits,
                                    double dt, const PlannerConfig& config) {
  if (corridors.empty()) throw DimensionMismatch("no corridors");
  const std::size_t horizon = corridors.front().steps();
  if (horizon < 2) throw DimensionMismatch("horizon must be >= 2 steps");
  const std::size_t td_max = effective_td_max(config, horizon);

  DecisionSearch out;
  const auto attempt = [&](std::size_t lock) {
    return attempt_lock(corridors, probabilities, lock, ego, limits, dt, config,
                        out.solves);
  };
  const auto accept = [&](std::size_t lock,
                          std::pair<QpProblem, QpSolution>&& r) {
    out.t_d_steps = lock;
    out.problem = std::move(r.first);
    out.solution = std::move(r.second);
  };

  if (config.td_mode == TdMode::kFixed) {
    for (std::size_t lock = std::min(config.td_fixed_steps, td_max); lock >= 1;
         lock /= 2) {
      if (auto r = attempt(lock)) {
        accept(lock, std::move(*r));
        return out;
      }
    }
    throw NoFeasibleLock("no feasible lock length in fixed mode");
  }

  if (auto r = attempt(td_max)) {
    accept(td_max, std::move(*r));
    return out;
  }
  if (td_max == 1) throw NoFeasibleLock("lock length 1 is infeasible");
  auto first = attempt(1);
  if (!first) throw NoFeasibleLock("lock length 1 is infeasible");
  accept(1, std::move(*first));
  // Invariant: lo feasible, hi infeasible.
  std::size_t lo = 1;
  std::size_t hi = td_max;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (auto r = attempt(mid)) {
      accept(mid, std::move(*r));
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return out;
}

std::size_t compute_decision_time(std::span<const Corridor> corridors,
                                  std::span<const double> probabilities,
                                  const EgoState& ego, const Limits& limits,
                                  double dt, const PlannerConfig& config) {
  return search_decision_time(corridors, probabilities, ego, limits, dt, config)
      .t_d_steps;
}

bool lock_feasible(std::span<const Corridor> corridors,
                   std::span<const double> probabilities,
                   std::size_t prefix_steps, const EgoState& ego,
                   const Limits& limits, double dt,
                   const PlannerConfig& config) {
  std::size_t solves = 0;
  return attempt_lock(corridors, probabilities, prefix_steps, ego, limits, dt,
                      config, solves)
      .has_value();
}

bool within_reach(const Corridor& corridor, const EgoState& ego,
                  const Limits& limits, double dt) {
  constexpr double tol = 1e-6;
  double s_hi = ego.s0, v_hi = ego.v0, a_hi = ego.a0;
  double s_lo = ego.s0, v_lo = ego.v0, a_lo = ego.a0;
  double lo_floor = ego.s0;
  for (std::size_t t = 1; t < corridor.steps(); ++t) {
    const double up = s_hi + v_hi * dt + 0.5 * a_hi * dt * dt;
    s_hi = std::min(up, s_hi + limits.v_max * dt);
    v_hi += a_hi * dt;
    a_hi = std::min(limits.a_max, a_hi + limits.j_max * dt);

    s_lo += v_lo * dt + 0.5 * a_lo * dt * dt;
    v_lo += a_lo * dt;
    a_lo = std::max(limits.a_min, a_lo + limits.j_min * dt);
    // Speed is never negative, so station never decreases.
    lo_floor = std::max(lo_floor, s_lo);

    if (corridor.lb[t] > s_hi + tol || corridor.ub[t] < lo_floor - tol) {
      return false;
    }
  }
  return true;
}

std::vector<StepState> braking_trajectory(const EgoState& ego,
                                          const Limits& limits, double dt,
                                          std::size_t horizon_steps) {
  std::vector<StepState> out;
  out.reserve(horizon_steps);
  StepState x{ego.s0, ego.v0, ego.a0, 0.0};
  // The current acceleration must not reverse the ego within one step.
  x.a = std::max(x.a, -x.v / dt);
  out.push_back(x);
  while (out.size() < horizon_steps) {
    StepState next;
    next.s = x.s + x.v * dt + 0.5 * x.a * dt * dt;
    next.v = std::max(0.0, x.v + x.a * dt);
    double a = std::max(limits.a_min, x.a + limits.j_min * dt);
    a = std::max(a, -next.v / dt);
    next.a = std::min(a, limits.a_max);
    next.j = (next.a - x.a) / dt;
    out.push_back(next);
    x = next;
  }
  return out;
}

MultiFuturePlan reindex_fallback(const MultiFuturePlan& previous,
                                 std::size_t time_index,
                                 std::size_t horizon_steps,
                                 const Limits& limits, double dt) {
  const std::size_t shift =
      time_index > previous.start_step ? time_index - previous.start_step : 0;
  const std::vector<StepState> branch = previous.branch(previous.anchor);

  std::vector<StepState> states;
  if (shift < branch.size()) {
    states.assign(branch.begin() + static_cast<std::ptrdiff_t>(shift),
                  branch.end());
  } else {
    // Past the end of the old plan: continue braking from its last state.
    const StepState& last = branch.back();
    const auto tail = braking_trajectory(EgoState{last.s, last.v, last.a},
                                         limits, dt,
                                         shift - branch.size() + 2);
    states.push_back(tail.back());
  }
  if (states.size() > horizon_steps) states.resize(horizon_steps);
  if (states.size() < horizon_steps) {
    const StepState& last = states.back();
    const auto tail = braking_trajectory(EgoState{last.s, last.v, last.a},
                                         limits, dt,
                                         horizon_steps - states.size() + 1);
    states.insert(states.end(), tail.begin() + 1, tail.end());
  }

  MultiFuturePlan out;
  out.prefix = std::move(states);
  out.t_d_steps = previous.t_d_steps > shift ? previous.t_d_steps - shift : 1;
  out.candidate_id = previous.candidate_id;
  out.objective = previous.objective;
  out.probabilities = {1.0};
  out.feasible = {};
  out.anchor = 0;
  out.start_step = time_index;
  out.plan_id = previous.plan_id;
  out.degraded = true;
  return out;
}

MultiFuturePlan plan(const PlanningSnapshot& snapshot,
                     const PlannerConfig& config,
                     const MultiFuturePlan* previous,
                     PlanDiagnostics* diagnostics) {
  validate_config(config);
  const std::size_t horizon = snapshot.horizon_steps;
  if (horizon < 2) throw DimensionMismatch("horizon must be >= 2 steps");
  if (snapshot.futures.empty()) throw NoPlan("no futures to plan against");

  PlanDiagnostics diag;
  const auto fallback = [&](const std::string& why) -> MultiFuturePlan {
    if (diagnostics) *diagnostics = diag;
    if (!previous) throw NoPlan(why);
    return reindex_fallback(*previous, snapshot.time_index, horizon,
                            snapshot.limits, snapshot.dt);
  };

  std::vector<double> probabilities;
  double total = 0.0;
  for (const auto& f : snapshot.futures) total += f.probability;
  for (const auto& f : snapshot.futures) {
    probabilities.push_back(f.probability / total);
  }

  std::vector<CorridorSet> sets;
  for (std::size_t i = 0; i < snapshot.futures.size(); ++i) {
    const auto all = enumerate_corridors(snapshot.futures[i].obstacles,
                                         snapshot.limits, snapshot.dt, horizon);
    CorridorSet set{i, prune_infeasible(all, snapshot.ego, snapshot.limits,
                                        snapshot.dt)};
    diag.corridors_per_future.push_back(set.corridors.size());
    sets.push_back(std::move(set));
  }
  for (const auto& set : sets) {
    if (set.corridors.empty()) {
      return fallback("future " + std::to_string(set.future_index) +
                      " has no feasible corridor");
    }
  }

  const std::size_t anchor = most_probable(probabilities);
  const std::vector<CandidateTuple> tuples =
      pair_corridors(sets, snapshot.ego, anchor);
  diag.candidates = tuples.size();

  std::vector<CandidateResult> results(tuples.size());
  const std::size_t workers =
      config.threads > 0 ? config.threads : threads_from_env();
  parallel_for(tuples.size(), workers, [&](std::size_t k) {
    const CandidateTuple& tuple = tuples[k];
    std::vector<Corridor> corridors;
    for (std::size_t f = 0; f < sets.size(); ++f) {
      corridors.push_back(sets[f].corridors[tuple.corridor_index[f]]);
    }
    for (const Corridor& c : corridors) {
      if (!within_reach(c, snapshot.ego, snapshot.limits, snapshot.dt)) return;
    }
    try {
      DecisionSearch search =
          search_decision_time(corridors, probabilities, snapshot.ego,
                               snapshot.limits, snapshot.dt, config);
      results[k].solves = search.solves;
      MultiFuturePlan p = extract_plan(search.solution, search.problem);
      p.candidate_id = tuple.id;
      p.anchor = anchor;
      p.start_step = snapshot.time_index;
      results[k].plan = std::move(p);
    } catch (const NoFeasibleLock&) {
    } catch (const SeamViolation&) {
    }
  });

  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < results.size(); ++k) {
    diag.qp_solves += results[k].solves;
    if (!results[k].plan) continue;
    ++diag.optimal_candidates;
    if (!best || results[k].plan->objective < results[*best].plan->objective) {
      best = k;
    }
  }
  if (!best) return fallback("no candidate tuple produced an optimal plan");
  if (diagnostics) *diagnostics = diag;
  return std::move(*results[*best].plan);
}

Planner::Planner(PlannerConfig config) : config_(std::move(config)) {
  validate_config(config_);
}

MultiFuturePlan Planner::plan(const PlanningSnapshot& snapshot) {
  MultiFuturePlan result =
      mfp::plan(snapshot, config_, previous_ ? &*previous_ : nullptr,
                &diagnostics_);
  if (!result.degraded) result.plan_id = next_id_++;
  previous_ = result;
  return result;
}

}  // namespace mfp
