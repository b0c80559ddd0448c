#include "mfp/multi_future_qp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>

#include "mfp/errors.hpp"

namespace mfp {

namespace {

using Triplet = Eigen::Triplet<double>;

class RowBuilder {
 public:
  std::size_t add(std::initializer_list<std::pair<std::size_t, double>> terms,
                  double lo, double hi) {
    const std::size_t row = lower_.size();
    for (const auto& [col, value] : terms) {
      triplets_.emplace_back(static_cast<int>(row), static_cast<int>(col),
                             value);
    }
    lower_.push_back(lo);
    upper_.push_back(hi);
    return row;
  }

  std::size_t rows() const noexcept { return lower_.size(); }

  void finish(std::size_t cols, QpData& data) const {
    data.A.resize(static_cast<Eigen::Index>(rows()),
                  static_cast<Eigen::Index>(cols));
    data.A.setFromTriplets(triplets_.begin(), triplets_.end());
    data.A.makeCompressed();
    data.l = Eigen::Map<const Eigen::VectorXd>(
        lower_.data(), static_cast<Eigen::Index>(lower_.size()));
    data.u = Eigen::Map<const Eigen::VectorXd>(
        upper_.data(), static_cast<Eigen::Index>(upper_.size()));
  }

 private:
  std::vector<Triplet> triplets_;
  std::vector<double> lower_;
  std::vector<double> upper_;
};

void add_dynamics(RowBuilder& rows, const QpLayout& layout, std::size_t future,
                  std::size_t t_prev, std::size_t t_next, double dt) {
  const auto var = [&](std::size_t t, Channel c) {
    return layout.index(future, t, c);
  };
  rows.add({{var(t_next, kStation), 1.0},
            {var(t_prev, kStation), -1.0},
            {var(t_prev, kSpeed), -dt},
            {var(t_prev, kAccel), -0.5 * dt * dt}},
           0.0, 0.0);
  rows.add({{var(t_next, kSpeed), 1.0},
            {var(t_prev, kSpeed), -1.0},
            {var(t_prev, kAccel), -dt}},
           0.0, 0.0);
  rows.add({{var(t_next, kJerk), 1.0},
            {var(t_next, kAccel), -1.0 / dt},
            {var(t_prev, kAccel), 1.0 / dt}},
           0.0, 0.0);
}

// Only obstacle edges move; the road start and s_max stay put.
std::pair<double, double> shrunk(double lo, double hi, double shrink,
                                 double s_max) {
  const double e = std::min(shrink, std::max(0.0, 0.5 * (hi - lo)));
  return {lo > 0.0 ? lo + e : lo, hi < s_max ? hi - e : hi};
}

}  // namespace

QpProblem build_qp(std::span<const Corridor> corridors,
                   std::span<const double> probabilities,
                   std::size_t prefix_steps, const EgoState& ego,
                   const Limits& limits, double dt, const CostWeights& weights,
                   double band_shrink) {
  if (corridors.empty()) throw DimensionMismatch("no corridors");
  if (probabilities.size() != corridors.size()) {
    throw DimensionMismatch("one probability per corridor required");
  }
  const std::size_t horizon = corridors.front().steps();
  for (const Corridor& c : corridors) {
    if (c.lb.size() != horizon || c.ub.size() != horizon) {
      throw DimensionMismatch("corridor lengths differ");
    }
  }
  if (horizon < 2) throw DimensionMismatch("horizon must be >= 2 steps");
  if (prefix_steps < 1 || prefix_steps >= horizon) {
    throw DimensionMismatch("prefix length " + std::to_string(prefix_steps) +
                            " outside [1, " + std::to_string(horizon - 1) +
                            "]");
  }
  if (!(dt > 0.0)) throw DimensionMismatch("dt must be positive");

  QpProblem problem;
  problem.layout = QpLayout{horizon, prefix_steps, corridors.size()};
  problem.dt = dt;
  problem.probabilities.assign(probabilities.begin(), probabilities.end());
  problem.corridors.assign(corridors.begin(), corridors.end());
  const QpLayout& layout = problem.layout;
  const std::size_t m = corridors.size();

  const Corridor shared = intersect(corridors);
  for (std::size_t t = 0; t < prefix_steps; ++t) {
    if (shared.lb[t] > shared.ub[t]) throw EmptyPrefixBand(t);
  }

  // Cost.
  const std::size_t n = layout.variables();
  std::vector<Triplet> p_trip;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto add_step_cost = [&](std::size_t future, std::size_t t,
                                 double weight) {
    const double w[] = {0.0, weights.w_v, weights.w_a, weights.w_j};
    for (std::size_t c = kSpeed; c <= kJerk; ++c) {
      if (w[c] * weight == 0.0) continue;
      const auto idx =
          static_cast<int>(layout.index(future, t, static_cast<Channel>(c)));
      p_trip.emplace_back(idx, idx, 2.0 * w[c] * weight);
    }
  };
  for (std::size_t t = 0; t < prefix_steps; ++t) add_step_cost(0, t, 1.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = prefix_steps; t < horizon; ++t) {
      add_step_cost(i, t, probabilities[i]);
    }
    q[static_cast<Eigen::Index>(layout.index(i, horizon - 1, kStation))] -=
        probabilities[i] * weights.w_disp;
  }
  problem.data.P.resize(static_cast<Eigen::Index>(n),
                        static_cast<Eigen::Index>(n));
  problem.data.P.setFromTriplets(p_trip.begin(), p_trip.end());
  problem.data.P.makeCompressed();
  problem.data.q = std::move(q);

  RowBuilder rows;
  // Initial conditions.
  rows.add({{layout.index(0, 0, kStation), 1.0}}, ego.s0, ego.s0);
  rows.add({{layout.index(0, 0, kSpeed), 1.0}}, ego.v0, ego.v0);
  rows.add({{layout.index(0, 0, kAccel), 1.0}}, ego.a0, ego.a0);
  problem.initial_rows = 3;

  std::size_t before = rows.rows();
  for (std::size_t t = 1; t < prefix_steps; ++t) {
    add_dynamics(rows, layout, 0, t - 1, t, dt);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = prefix_steps + 1; t < horizon; ++t) {
      add_dynamics(rows, layout, i, t - 1, t, dt);
    }
  }
  problem.dynamics_rows = rows.rows() - before;

  before = rows.rows();
  for (std::size_t i = 0; i < m; ++i) {
    add_dynamics(rows, layout, i, prefix_steps - 1, prefix_steps, dt);
  }
  problem.continuity_rows = rows.rows() - before;

  // Station bounds.
  const auto station_row = [&](std::size_t future, std::size_t t, double lo,
                               double hi) {
    const auto [l, u] = t == 0 ? std::pair{lo, hi} : shrunk(lo, hi, band_shrink, limits.s_max);
    rows.add({{layout.index(future, t, kStation), 1.0}}, l, u);
  };
  for (std::size_t t = 0; t < prefix_steps; ++t) {
    station_row(0, t, shared.lb[t], shared.ub[t]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = prefix_steps; t < horizon; ++t) {
      station_row(i, t, corridors[i].lb[t], corridors[i].ub[t]);
    }
  }

  // Box limits on every step variable.
  const auto box_rows = [&](std::size_t future, std::size_t t) {
    rows.add({{layout.index(future, t, kSpeed), 1.0}}, 0.0, limits.v_max);
    rows.add({{layout.index(future, t, kAccel), 1.0}}, limits.a_min,
             limits.a_max);
    rows.add({{layout.index(future, t, kJerk), 1.0}}, limits.j_min,
             limits.j_max);
  };
  for (std::size_t t = 0; t < prefix_steps; ++t) box_rows(0, t);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t t = prefix_steps; t < horizon; ++t) box_rows(i, t);
  }

  rows.finish(n, problem.data);
  return problem;
}

QpSolution solve_qp(const QpProblem& problem, const SolverSettings& settings) {
  return solve_qp(problem.data, settings);
}

std::size_t MultiFuturePlan::horizon() const noexcept {
  return prefix.size() + (suffixes.empty() ? 0 : suffixes.front().size());
}

std::vector<StepState> MultiFuturePlan::branch(std::size_t future) const {
  std::vector<StepState> out = prefix;
  if (future < suffixes.size()) {
    out.insert(out.end(), suffixes[future].begin(), suffixes[future].end());
  }
  return out;
}

double dynamics_residual(std::span<const StepState> branch, double dt) {
  double worst = 0.0;
  for (std::size_t t = 1; t < branch.size(); ++t) {
    const StepState& p = branch[t - 1];
    const StepState& c = branch[t];
    worst = std::max(worst,
                     std::abs(c.s - (p.s + p.v * dt + 0.5 * p.a * dt * dt)));
    worst = std::max(worst, std::abs(c.v - (p.v + p.a * dt)));
    worst = std::max(worst, std::abs(c.j - (c.a - p.a) / dt) * dt);
  }
  return worst;
}

MultiFuturePlan extract_plan(const QpSolution& solution,
                             const QpProblem& problem) {
  if (solution.status != SolverStatus::kOptimal) {
    throw Error(std::string("cannot extract a plan from a ") +
                to_string(solution.status) + " solution");
  }
  const QpLayout& layout = problem.layout;
  if (static_cast<std::size_t>(solution.x.size()) != layout.variables()) {
    throw DimensionMismatch("solution size does not match the layout");
  }
  const auto state_at = [&](std::size_t future, std::size_t t) {
    const auto v = [&](Channel c) {
      return solution.x[static_cast<Eigen::Index>(layout.index(future, t, c))];
    };
    return StepState{v(kStation), v(kSpeed), v(kAccel), v(kJerk)};
  };

  MultiFuturePlan plan;
  plan.t_d_steps = layout.prefix_steps;
  plan.objective = solution.objective;
  plan.probabilities = problem.probabilities;
  for (std::size_t t = 0; t < layout.prefix_steps; ++t) {
    plan.prefix.push_back(state_at(0, t));
  }
  for (std::size_t i = 0; i < layout.futures; ++i) {
    std::vector<StepState> suffix;
    for (std::size_t t = layout.prefix_steps; t < layout.horizon; ++t) {
      suffix.push_back(state_at(i, t));
    }
    const StepState seam[] = {plan.prefix.back(), suffix.front()};
    const double r = dynamics_residual(seam, problem.dt);
    if (!(r <= kSeamTolerance)) {
      throw SeamViolation("future " + std::to_string(i) +
                          " seam residual " + std::to_string(r));
    }
    plan.suffixes.push_back(std::move(suffix));
  }
  for (std::size_t i = 0; i < layout.futures; ++i) {
    const std::vector<StepState> b = plan.branch(i);
    const Corridor& c = problem.corridors[i];
    bool ok = true;
    for (std::size_t t = 0; t < b.size(); ++t) {
      if (b[t].s < c.lb[t] - kBoundCheckTolerance ||
          b[t].s > c.ub[t] + kBoundCheckTolerance) {
        ok = false;
        break;
      }
    }
    plan.feasible.push_back(ok);
  }
  std::size_t anchor = 0;
  for (std::size_t i = 1; i < plan.probabilities.size(); ++i) {
    if (plan.probabilities[i] > plan.probabilities[anchor]) anchor = i;
  }
  plan.anchor = anchor;
  return plan;
}

void write_qp_text(std::ostream& os, const QpProblem& problem) {
  const QpData& d = problem.data;
  os.precision(17);
  os << "mfp-qp " << d.variables() << ' ' << d.constraints() << ' '
     << d.P.nonZeros() << ' ' << d.A.nonZeros() << '\n';
  os << "layout " << problem.layout.horizon << ' '
     << problem.layout.prefix_steps << ' ' << problem.layout.futures << '\n';
  for (int k = 0; k < d.P.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d.P, k); it; ++it) {
      os << "P " << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  for (Eigen::Index i = 0; i < d.q.size(); ++i) {
    if (d.q[i] != 0.0) os << "q " << i << ' ' << d.q[i] << '\n';
  }
  for (int k = 0; k < d.A.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(d.A, k); it; ++it) {
      os << "A " << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
  for (Eigen::Index i = 0; i < d.l.size(); ++i) {
    os << "bound " << i << ' ' << d.l[i] << ' ' << d.u[i] << '\n';
  }
}

}  // namespace mfp
