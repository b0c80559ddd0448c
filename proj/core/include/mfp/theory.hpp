#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace mfp {

/// Two futures, f1 and f2. Deciding means committing to the trajectory of
/// one of them; committing to the false one is catastrophic.
struct TheoryGrid {
  std::vector<double> p1;
  /// (k1, k2): finite loss of waiting when the early choice was right, and
  /// finite reward of the late choice when the early one was wrong.
  std::vector<std::pair<double, double>> payoffs;
  std::vector<double> reveal_times;
  /// (t_a, t_d) with t_a < t_d.
  std::vector<std::pair<double, double>> decision_times;
  /// Rate at which belief in the true future approaches 1 before reveal.
  double belief_rate = 0.5;

  /// 10 priors x 2 payoff pairs x 5 reveal times x 10 decision pairs.
  static TheoryGrid defaults();
  std::size_t cells() const noexcept {
    return p1.size() * payoffs.size() * reveal_times.size() *
           decision_times.size();
  }
};

/// Belief placed on the true future at time t: the prior at t = 0, rising
/// monotonically, and 1 from the reveal time on.
double belief_in_truth(double prior, double t, double t_reveal, double rate);

/// Rational choice: true picks f1, the option with belief >= 0.5.
bool chooses_f1(double p1, bool truth_is_f1, double t, double t_reveal,
                double rate);

struct TheoryCell {
  double p1 = 0.0;
  double k1 = 0.0;
  double k2 = 0.0;
  double t_reveal = 0.0;
  double t_a = 0.0;
  double t_d = 0.0;
  /// Probability mass of each case, indexed 0..3 for Cases 1..4.
  /// Case 1: both right. Case 2: both wrong. Case 3: late right, early
  /// wrong. Case 4: late wrong, early right.
  std::array<double, 4> case_mass{};
  double p_catastrophe_early = 0.0;
  double p_catastrophe_late = 0.0;
  /// Finite expected loss of waiting (Case 1 mass times k1).
  double finite_loss = 0.0;
  /// Finite part of the expected gain of waiting (Case 3 mass times k2).
  double finite_gain = 0.0;
};

TheoryCell evaluate_cell(double p1, double k1, double k2, double t_reveal,
                         double t_a, double t_d, double rate);

struct TheoryReport {
  std::vector<TheoryCell> cells;
  std::size_t violations = 0;
  std::size_t case4_cells = 0;
  /// Cells in which each case has positive mass.
  std::array<std::size_t, 4> case_cells{};
  double max_finite_loss = 0.0;
};

/// Evaluates every cell. Throws AssertionFailure naming the first cell where
/// deciding late is more often catastrophic than deciding early, or where
/// Case 4 has positive mass, or when some cell has t_a >= t_d.
TheoryReport decision_time_enumeration(const TheoryGrid& grid = TheoryGrid::defaults());

std::string describe(const TheoryCell& cell);

}  // namespace mfp
