#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "mfp/bench.hpp"
#include "mfp/errors.hpp"
#include "mfp/planner.hpp"
#include "mfp/scenario.hpp"
#include "mfp/sim.hpp"
#include "mfp/svg.hpp"
#include "mfp/theory.hpp"

namespace mfp {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct Options {
  std::string scenario;
  std::string policy = "delayed";
  std::string td_mode = "exact";
  std::size_t td_fixed = 4;
  std::size_t td_max = 8;
  std::uint64_t seed = 0;
  std::string out;
  std::string svg;
  std::string dump_qp;
  double eps_abs = 1e-6;
  double eps_rel = 1e-6;
  std::size_t reps = 200;
};

void add_planner_options(CLI::App* app, Options& o) {
  app->add_option("--td-mode", o.td_mode, "Decision time search")
      ->check(CLI::IsMember({"exact", "fixed"}));
  app->add_option("--td-fixed", o.td_fixed, "Lock length in fixed mode")
      ->check(CLI::PositiveNumber);
  app->add_option("--td-max", o.td_max, "Longest lock length")
      ->check(CLI::PositiveNumber);
  app->add_option("--eps-abs", o.eps_abs, "Solver absolute tolerance")
      ->check(CLI::PositiveNumber);
  app->add_option("--eps-rel", o.eps_rel, "Solver relative tolerance")
      ->check(CLI::NonNegativeNumber);
}

PlannerConfig make_config(const Options& o) {
  PlannerConfig c;
  c.td_mode = o.td_mode == "fixed" ? TdMode::kFixed : TdMode::kExact;
  c.td_fixed_steps = o.td_fixed;
  c.td_max_steps = o.td_max;
  c.solver.eps_abs = o.eps_abs;
  c.solver.eps_rel = o.eps_rel;
  validate_config(c);
  return c;
}

bool open_out(const std::string& path, std::ofstream& file, std::ostream& err) {
  file.open(path, std::ios::binary);
  if (!file) err << "error: cannot write " << path << '\n';
  return static_cast<bool>(file);
}

json states_json(const std::vector<StepState>& states) {
  json out = json::array();
  for (const StepState& x : states) out.push_back({x.s, x.v, x.a, x.j});
  return out;
}

PlanningSnapshot initial_snapshot(const ScenarioSpec& spec) {
  PlanningSnapshot snap;
  snap.ego = spec.ego;
  snap.limits = spec.limits;
  snap.dt = spec.dt;
  snap.horizon_steps = spec.horizon_steps;
  snap.futures = spec.joint_futures();
  return snap;
}

// Corridors of the selected tuple, rebuilt the way the planner built them.
std::vector<Corridor> selected_corridors(const PlanningSnapshot& snap,
                                         const MultiFuturePlan& plan) {
  std::vector<CorridorSet> sets;
  std::vector<double> p;
  for (std::size_t i = 0; i < snap.futures.size(); ++i) {
    const auto all = enumerate_corridors(snap.futures[i].obstacles,
                                         snap.limits, snap.dt,
                                         snap.horizon_steps);
    sets.push_back({i, prune_infeasible(all, snap.ego, snap.limits, snap.dt)});
    p.push_back(snap.futures[i].probability);
  }
  const auto tuples = pair_corridors(sets, snap.ego, most_probable(p));
  std::vector<Corridor> out;
  const CandidateTuple& tuple = tuples.at(plan.candidate_id);
  for (std::size_t f = 0; f < sets.size(); ++f) {
    out.push_back(sets[f].corridors[tuple.corridor_index[f]]);
  }
  return out;
}

int cmd_plan(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioSpec spec = load_scenario(o.scenario);
  const PlannerConfig config = make_config(o);
  const PlanningSnapshot snap = initial_snapshot(spec);

  PlanDiagnostics diag;
  MultiFuturePlan plan;
  try {
    plan = mfp::plan(snap, config, nullptr, &diag);
  } catch (const NoPlan& e) {
    err << "planner failure: " << e.what() << '\n';
    return kExitPlannerFailure;
  }

  json j;
  j["t_d_steps"] = plan.t_d_steps;
  j["candidate_id"] = plan.candidate_id;
  j["objective"] = plan.objective;
  j["probabilities"] = plan.probabilities;
  j["feasible"] = plan.feasible;
  j["prefix"] = states_json(plan.prefix);
  j["suffixes"] = json::array();
  for (const auto& s : plan.suffixes) j["suffixes"].push_back(states_json(s));
  j["diagnostics"] = {{"corridors_per_future", diag.corridors_per_future},
                      {"candidates", diag.candidates},
                      {"optimal_candidates", diag.optimal_candidates},
                      {"qp_solves", diag.qp_solves}};

  if (o.out.empty()) {
    out << j.dump(2) << '\n';
  } else {
    std::ofstream file;
    if (!open_out(o.out, file, err)) return kExitUsage;
    file << j.dump(2) << '\n';
  }

  if (!o.svg.empty() || !o.dump_qp.empty()) {
    const std::vector<Corridor> corridors = selected_corridors(snap, plan);
    if (!o.svg.empty()) {
      StGraph g = make_st_graph(snap.futures, spec.limits, spec.dt,
                                spec.horizon_steps);
      g.corridors = corridors;
      g.prefix = plan.prefix;
      g.suffixes = plan.suffixes;
      std::ofstream file;
      if (!open_out(o.svg, file, err)) return kExitUsage;
      write_svg(file, g);
    }
    if (!o.dump_qp.empty()) {
      std::vector<double> p;
      for (const auto& f : snap.futures) p.push_back(f.probability);
      const QpProblem problem =
          build_qp(corridors, p, plan.t_d_steps, spec.ego, spec.limits,
                   spec.dt, config.weights, config.band_shrink);
      std::ofstream file;
      if (!open_out(o.dump_qp, file, err)) return kExitUsage;
      write_qp_text(file, problem);
    }
  }
  return kExitOk;
}

void print_metrics(std::ostream& os, const Metrics& m) {
  os << "status=" << to_string(m.status)
     << " collision=" << (m.collision ? "true" : "false")
     << " final_displacement=" << m.final_displacement
     << " min_acceleration=" << m.min_acceleration
     << " max_abs_jerk=" << m.max_abs_jerk
     << " decision_delay=" << m.decision_delay << '\n';
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const ScenarioSpec spec = load_scenario(o.scenario);
  const PlannerConfig config = make_config(o);
  const auto policy = parse_policy(o.policy);
  if (!policy) {
    err << "error: unknown policy " << o.policy << '\n';
    return kExitUsage;
  }
  const SimTrace trace = simulate(spec, *policy, config, o.seed);
  const Metrics metrics = evaluate_metrics(trace, spec);

  if (o.out.empty()) {
    write_trace_csv(out, trace);
  } else {
    std::ofstream file;
    if (!open_out(o.out, file, err)) return kExitUsage;
    write_trace_csv(file, trace);
    print_metrics(out, metrics);
  }
  if (!o.svg.empty()) {
    StGraph g = make_st_graph(spec.joint_futures(), spec.limits, spec.dt,
                              spec.horizon_steps);
    for (const SimRecord& r : trace.records) g.executed.push_back(r.state);
    std::ofstream file;
    if (!open_out(o.svg, file, err)) return kExitUsage;
    write_svg(file, g);
  }
  if (trace.status == TerminalStatus::kPlannerFailure) {
    err << "planner failure: " << trace.message << '\n';
    return kExitPlannerFailure;
  }
  return kExitOk;
}

int cmd_theory(std::ostream& out, std::ostream& err) {
  try {
    const TheoryReport r = decision_time_enumeration();
    out << "cells=" << r.cells.size() << " violations=" << r.violations
        << " case4_cells=" << r.case4_cells
        << " case1_cells=" << r.case_cells[0]
        << " case2_cells=" << r.case_cells[1]
        << " case3_cells=" << r.case_cells[2]
        << " max_finite_loss=" << r.max_finite_loss << '\n';
    return kExitOk;
  } catch (const AssertionFailure& e) {
    err << "decision-time check failed: " << e.what() << '\n';
    return kExitPlannerFailure;
  }
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
  BenchConfig config;
  config.repetitions = o.reps;
  config.seed = o.seed;
  std::ofstream file;
  if (!o.out.empty() && !open_out(o.out, file, err)) return kExitUsage;
  std::ostream& os = o.out.empty() ? out : file;
  const BenchReport r = bench_approx_profile(config);
  os << "series,T,k,samples,min_s,median_s,p99_s\n";
  for (const LatencyStats& s : r.random) {
    os << "random," << s.steps << ',' << s.k << ',' << s.samples << ','
       << s.min_s << ',' << s.median_s << ',' << s.p99_s << '\n';
  }
  for (const ScalingPoint& p : r.staircase) {
    os << "staircase," << p.x << ",0,,," << p.median_s << ",\n";
  }
  for (const ScalingPoint& p : r.k_scaling) {
    os << "obstacles," << config.k_scaling_steps << ',' << p.x << ",,,"
       << p.median_s << ",\n";
  }
  err << "staircase_slope=" << r.staircase_slope << " k_slope=" << r.k_slope
      << '\n';
  return kExitOk;
}

int cmd_batch(const Options& o, std::ostream& out, std::ostream& err) {
  const PlannerConfig config = make_config(o);
  std::vector<PolicyId> policies;
  if (o.policy == "all") {
    policies.assign(std::begin(kAllPolicies), std::end(kAllPolicies));
  } else if (const auto p = parse_policy(o.policy)) {
    policies.push_back(*p);
  } else {
    err << "error: unknown policy " << o.policy << '\n';
    return kExitUsage;
  }
  if (!fs::is_directory(o.scenario)) {
    err << "error: " << o.scenario << " is not a directory\n";
    return kExitUsage;
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(o.scenario)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::ofstream file;
  if (!o.out.empty() && !open_out(o.out, file, err)) return kExitUsage;
  std::ostream& os = o.out.empty() ? out : file;
  os << "scenario,policy,status,collision,final_displacement,min_acceleration,"
        "max_abs_jerk,decision_delay\n";
  bool failed = false;
  for (const fs::path& path : files) {
    const ScenarioSpec spec = load_scenario(path);
    for (PolicyId policy : policies) {
      const SimTrace trace = simulate(spec, policy, config, o.seed);
      const Metrics m = evaluate_metrics(trace, spec);
      failed = failed || trace.status == TerminalStatus::kPlannerFailure;
      os << path.filename().string() << ',' << to_string(policy) << ','
         << to_string(m.status) << ',' << (m.collision ? 1 : 0) << ','
         << m.final_displacement << ',' << m.min_acceleration << ','
         << m.max_abs_jerk << ',' << m.decision_delay << '\n';
    }
  }
  return failed ? kExitPlannerFailure : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Delayed-decision multi-future speed planner", "mfp"};
  app.require_subcommand(1);
  Options o;

  auto* plan = app.add_subcommand("plan", "Run one planning cycle");
  plan->add_option("--scenario", o.scenario, "Scenario JSON")->required();
  plan->add_option("--out", o.out, "Plan JSON (default: stdout)");
  plan->add_option("--svg", o.svg, "ST-graph SVG");
  plan->add_option("--dump-qp", o.dump_qp, "Text dump of the selected QP");
  add_planner_options(plan, o);

  auto* sim = app.add_subcommand("simulate", "Closed-loop simulation");
  sim->add_option("--scenario", o.scenario, "Scenario JSON")->required();
  sim->add_option("--policy", o.policy, "delayed | most_probable | "
                                        "conservative | expectation_unlocked");
  sim->add_option("--seed", o.seed, "Reveal-time seed");
  sim->add_option("--out", o.out, "Trace CSV (default: stdout)");
  sim->add_option("--svg", o.svg, "ST-graph SVG of the executed trajectory");
  add_planner_options(sim, o);

  auto* theory = app.add_subcommand("theory", "Two-future decision-time grid");

  auto* bench = app.add_subcommand("bench", "Approximate-profile latency");
  bench->add_option("--reps", o.reps, "Repetitions")->check(CLI::PositiveNumber);
  bench->add_option("--seed", o.seed, "Input seed");
  bench->add_option("--out", o.out, "Latency CSV (default: stdout)");

  auto* batch = app.add_subcommand("batch", "Simulate every scenario in a directory");
  batch->add_option("--scenario", o.scenario, "Scenario directory")->required();
  batch->add_option("--policy", o.policy, "Policy name or 'all'");
  batch->add_option("--seed", o.seed, "Reveal-time seed");
  batch->add_option("--out", o.out, "Summary CSV (default: stdout)");
  add_planner_options(batch, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*plan) return cmd_plan(o, out, err);
    if (*sim) return cmd_simulate(o, out, err);
    if (*theory) return cmd_theory(out, err);
    if (*bench) return cmd_bench(o, out, err);
    if (*batch) return cmd_batch(o, out, err);
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitPlannerFailure;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv) {
  return run_cli(argc, argv, std::cout, std::cerr);
}

}  // namespace mfp
