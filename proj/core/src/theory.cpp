#include "mfp/theory.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mfp/errors.hpp"

namespace mfp {

TheoryGrid TheoryGrid::defaults() {
  TheoryGrid g;
  for (int i = 0; i < 10; ++i) g.p1.push_back(0.05 + 0.1 * i);
  g.payoffs = {{1.0, 5.0}, {5.0, 1.0}};
  g.reveal_times = {0.5, 1.0, 2.0, 3.0, 4.0};
  const double times[] = {0.0, 1.0, 2.0, 3.0, 4.0};
  for (std::size_t a = 0; a < 5; ++a) {
    for (std::size_t d = a + 1; d < 5; ++d) {
      g.decision_times.emplace_back(times[a], times[d]);
    }
  }
  return g;
}

double belief_in_truth(double prior, double t, double t_reveal, double rate) {
  if (t >= t_reveal) return 1.0;
  return prior + (1.0 - prior) * (1.0 - std::exp(-rate * t));
}

bool chooses_f1(double p1, bool truth_is_f1, double t, double t_reveal,
                double rate) {
  const double prior = truth_is_f1 ? p1 : 1.0 - p1;
  const double b = belief_in_truth(prior, t, t_reveal, rate);
  const double belief_f1 = truth_is_f1 ? b : 1.0 - b;
  return belief_f1 >= 0.5;
}

TheoryCell evaluate_cell(double p1, double k1, double k2, double t_reveal,
                         double t_a, double t_d, double rate) {
  if (!(t_a < t_d)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "cell needs t_a < t_d (t_a=%g, t_d=%g)",
                  t_a, t_d);
    throw AssertionFailure(buf);
  }
  TheoryCell c{p1, k1, k2, t_reveal, t_a, t_d, {}, 0.0, 0.0, 0.0, 0.0};
  for (const bool truth_f1 : {true, false}) {
    const double weight = truth_f1 ? p1 : 1.0 - p1;
    const bool early_right =
        chooses_f1(p1, truth_f1, t_a, t_reveal, rate) == truth_f1;
    const bool late_right =
        chooses_f1(p1, truth_f1, t_d, t_reveal, rate) == truth_f1;
    std::size_t which = 0;
    if (late_right && early_right) {
      which = 0;
    } else if (!late_right && !early_right) {
      which = 1;
    } else if (late_right) {
      which = 2;
    } else {
      which = 3;
    }
    c.case_mass[which] += weight;
  }
  c.p_catastrophe_early = c.case_mass[1] + c.case_mass[2];
  c.p_catastrophe_late = c.case_mass[1] + c.case_mass[3];
  c.finite_loss = c.case_mass[0] * k1;
  c.finite_gain = c.case_mass[2] * k2;
  return c;
}

std::string describe(const TheoryCell& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "p1=%g k1=%g k2=%g t_R=%g t_a=%g t_d=%g P(cat|t_a)=%g "
                "P(cat|t_d)=%g case4=%g",
                c.p1, c.k1, c.k2, c.t_reveal, c.t_a, c.t_d,
                c.p_catastrophe_early, c.p_catastrophe_late, c.case_mass[3]);
  return buf;
}

TheoryReport decision_time_enumeration(const TheoryGrid& grid) {
  TheoryReport report;
  report.cells.reserve(grid.cells());
  for (double p1 : grid.p1) {
    for (const auto& [k1, k2] : grid.payoffs) {
      for (double t_r : grid.reveal_times) {
        for (const auto& [t_a, t_d] : grid.decision_times) {
          const TheoryCell c =
              evaluate_cell(p1, k1, k2, t_r, t_a, t_d, grid.belief_rate);
          if (c.p_catastrophe_late > c.p_catastrophe_early) {
            ++report.violations;
            throw AssertionFailure("late decision more catastrophic: " +
                                   describe(c));
          }
          if (c.case_mass[3] > 0.0) {
            ++report.case4_cells;
            throw AssertionFailure("case 4 occurred: " + describe(c));
          }
          for (std::size_t i = 0; i < 4; ++i) {
            if (c.case_mass[i] > 0.0) ++report.case_cells[i];
          }
          report.max_finite_loss = std::max(report.max_finite_loss, c.finite_loss);
          report.cells.push_back(c);
        }
      }
    }
  }
  return report;
}

}  // namespace mfp
