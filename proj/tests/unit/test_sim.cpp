#include <gtest/gtest.h>

#include <random>
#include <sstream>
#include <string>

#include "mfp/objectives.hpp"
#include "mfp/scenario.hpp"
#include "mfp/sim.hpp"
#include "support/oracles.hpp"

namespace {

mfp::ScenarioSpec load(const char* name) {
  return mfp::load_scenario(std::string(MFP_SCENARIO_DIR) + "/" + name);
}

mfp::PlannerConfig single_thread() {
  mfp::PlannerConfig c;
  c.threads = 1;
  return c;
}

mfp::ScenarioSpec single_future(std::size_t steps = 20) {
  mfp::ScenarioSpec spec;
  spec.ego = {0, 6, 0};
  spec.dt = 0.25;
  spec.horizon_steps = steps;
  spec.futures = {{1.0, {{2.0, 3.0, 40.0, 50.0}}, "only"}};
  spec.reveal.mode = mfp::RevealModel::Mode::kFixed;
  spec.reveal.t_r_fixed = 5;
  return spec;
}

TEST(Policy, NamesRoundTrip) {
  for (auto p : mfp::kAllPolicies) {
    EXPECT_EQ(mfp::parse_policy(mfp::to_string(p)), p);
  }
  EXPECT_FALSE(mfp::parse_policy("yolo").has_value());
}

TEST(Simulate, SingleFutureIdenticalAcrossPolicies) {
  const auto spec = single_future();
  std::string first;
  for (auto p : mfp::kAllPolicies) {
    auto trace = mfp::simulate(spec, p, single_thread(), 3);
    EXPECT_EQ(trace.status, mfp::TerminalStatus::kCompleted);
    std::string csv = mfp::trace_csv(trace);
    // Compare the kinematics only; plan ids and t_d differ by policy.
    std::string kin;
    for (const auto& r : trace.records) {
      kin += std::to_string(r.state.s) + "," + std::to_string(r.state.v) + ";";
    }
    if (first.empty()) first = kin;
    EXPECT_EQ(kin, first) << mfp::to_string(p);
  }
}

TEST(Simulate, PedestrianCrossing) {
  const auto spec = load("pedestrian.json");
  ASSERT_EQ(spec.true_future_index, 1u);
  const auto delayed =
      mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 1);
  EXPECT_EQ(delayed.status, mfp::TerminalStatus::kCompleted) << delayed.message;
  EXPECT_FALSE(mfp::evaluate_metrics(delayed, spec).collision);
  const auto greedy =
      mfp::simulate(spec, mfp::PolicyId::kMostProbable, single_thread(), 1);
  EXPECT_EQ(greedy.status, mfp::TerminalStatus::kCollision);
  EXPECT_TRUE(mfp::evaluate_metrics(greedy, spec).collision);
}

TEST(Simulate, ConservativeGivesUpProgressWhenStraight) {
  auto spec = load("pedestrian.json");
  spec.true_future_index = 0;
  const auto delayed =
      mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 1);
  const auto cautious =
      mfp::simulate(spec, mfp::PolicyId::kConservative, single_thread(), 1);
  ASSERT_EQ(delayed.status, mfp::TerminalStatus::kCompleted);
  ASSERT_EQ(cautious.status, mfp::TerminalStatus::kCompleted);
  EXPECT_LT(mfp::evaluate_metrics(cautious, spec).final_displacement,
            mfp::evaluate_metrics(delayed, spec).final_displacement);
}

TEST(Simulate, TraceInvariants) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    auto spec = oracle::random_battery_scenario(rng, 16);
    spec.true_future_index = trial % 2;
    for (auto p : mfp::kAllPolicies) {
      const auto trace = mfp::simulate(spec, p, single_thread(), 5);
      ASSERT_FALSE(trace.records.empty());
      bool revealed = false;
      for (std::size_t i = 0; i < trace.records.size(); ++i) {
        const auto& r = trace.records[i];
        EXPECT_EQ(r.step, i);
        EXPECT_NEAR(r.t, spec.dt * static_cast<double>(i), 1e-12);
        if (revealed) EXPECT_TRUE(r.revealed);
        revealed = r.revealed;
        EXPECT_EQ(r.revealed, i >= trace.reveal_step);
        EXPECT_GE(r.state.v, -1e-9);
        EXPECT_EQ(r.feasible.size(), spec.futures.size());
      }
    }
  }
}

TEST(Simulate, DeterministicForEqualSeeds) {
  auto spec = load("pedestrian.json");
  spec.reveal.mode = mfp::RevealModel::Mode::kPmf;
  spec.reveal.pmf = mfp::uniform_reveal_pmf(spec.horizon_steps);
  for (auto p : mfp::kAllPolicies) {
    const auto a = mfp::trace_csv(mfp::simulate(spec, p, single_thread(), 9));
    const auto b = mfp::trace_csv(mfp::simulate(spec, p, single_thread(), 9));
    EXPECT_EQ(a, b);
  }
  const auto x = mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 9);
  const auto y = mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 9);
  EXPECT_EQ(x.reveal_step, y.reveal_step);
}

TEST(Simulate, RevealCollapsesToTruth) {
  const auto spec = load("pedestrian.json");
  const auto trace =
      mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 1);
  EXPECT_EQ(trace.reveal_step, 8u);
  for (const auto& r : trace.records) {
    if (r.revealed && r.source != mfp::CycleSource::kNone) {
      EXPECT_EQ(r.planned_futures, 1u) << r.step;
    }
  }
  EXPECT_EQ(trace.records.front().planned_futures, 2u);
}

TEST(TraceCsv, HeaderAndTerminalStatus) {
  const auto spec = single_future(12);
  const auto trace =
      mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 0);
  std::istringstream in(mfp::trace_csv(trace));
  std::string line, last;
  std::getline(in, line);
  EXPECT_EQ(line, "step,t,s,v,a,j,plan_id,t_d_steps,revealed,candidate_id,status");
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    last = line;
    ++rows;
  }
  EXPECT_EQ(rows, trace.records.size());
  EXPECT_EQ(last.substr(last.rfind(',') + 1), "completed");
}

TEST(Metrics, StationaryEgoWithoutObstacles) {
  mfp::ScenarioSpec spec;
  spec.ego = {0, 0, 0};
  spec.dt = 0.25;
  spec.horizon_steps = 10;
  spec.futures = {{1.0, {}, ""}};
  mfp::SimTrace trace;
  for (std::size_t k = 0; k < 10; ++k) {
    mfp::SimRecord r;
    r.step = k;
    r.t = 0.25 * static_cast<double>(k);
    trace.records.push_back(r);
  }
  const auto m = mfp::evaluate_metrics(trace, spec);
  EXPECT_DOUBLE_EQ(m.final_displacement, 0.0);
  EXPECT_FALSE(m.collision);
}

TEST(Metrics, PassingThroughObstacleIsCollision) {
  mfp::ScenarioSpec spec;
  spec.dt = 1.0;
  spec.horizon_steps = 5;
  spec.futures = {{1.0, {{1.5, 2.5, 1.0, 3.0}}, ""}};
  mfp::SimTrace trace;
  for (std::size_t k = 0; k < 5; ++k) {
    mfp::SimRecord r;
    r.step = k;
    r.t = static_cast<double>(k);
    r.state.s = static_cast<double>(k);
    r.state.v = 1.0;
    trace.records.push_back(r);
  }
  const auto m = mfp::evaluate_metrics(trace, spec);
  EXPECT_TRUE(m.collision);
  EXPECT_DOUBLE_EQ(m.final_displacement, 4.0);
  EXPECT_TRUE(mfp::collides(spec, 2.0, 2.0));
  EXPECT_FALSE(mfp::collides(spec, 2.0, 3.0));
}

TEST(Metrics, DecisionDelayReadFromTrace) {
  const auto spec = load("pedestrian.json");
  const auto trace =
      mfp::simulate(spec, mfp::PolicyId::kDelayed, single_thread(), 1);
  // First executed step whose lock no longer covers the next step.
  double expected = trace.records.back().t;
  for (const auto& r : trace.records) {
    if (r.revealed || r.planned_futures == 1 ||
        (r.source != mfp::CycleSource::kNone && r.t_d_steps <= 1)) {
      expected = r.t;
      break;
    }
  }
  const auto m = mfp::evaluate_metrics(trace, spec);
  EXPECT_DOUBLE_EQ(m.decision_delay, expected);
  EXPECT_GT(m.decision_delay, 0.0);
  EXPECT_LE(m.decision_delay, 2.0);
}

TEST(ShiftFutures, MovesClockAndDropsPast) {
  const std::vector<mfp::FuturePrediction> f{
      {1.0, {{1.0, 2.0, 5, 6}, {3.0, 4.0, 7, 8}}, "x"}};
  const auto s = mfp::shift_futures(f, 2.5);
  ASSERT_EQ(s[0].obstacles.size(), 1u);
  EXPECT_DOUBLE_EQ(s[0].obstacles[0].t_in, 0.5);
  EXPECT_DOUBLE_EQ(s[0].obstacles[0].t_out, 1.5);
  EXPECT_EQ(s[0].label, "x");
}

}  // namespace
