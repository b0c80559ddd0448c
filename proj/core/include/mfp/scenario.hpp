#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mfp {

/// Ego state along the fixed path.
struct EgoState {
  double s0 = 0.0;  // station, m
  double v0 = 0.0;  // speed, m/s
  double a0 = 0.0;  // acceleration, m/s^2
  friend bool operator==(const EgoState&, const EgoState&) = default;
};

struct Limits {
  double v_max = 15.0;
  double a_min = -6.0;
  double a_max = 3.0;
  double j_min = -10.0;
  double j_max = 10.0;
  double s_max = 200.0;
  friend bool operator==(const Limits&, const Limits&) = default;
};

/// Blocked rectangle in (time, station) space.
struct StObstacle {
  double t_in = 0.0;
  double t_out = 0.0;
  double s_in = 0.0;
  double s_out = 0.0;

  /// Closed in time, open in station: touching the rectangle edge along s is
  /// not a collision.
  bool contains(double t, double s) const noexcept {
    return t >= t_in && t <= t_out && s > s_in && s < s_out;
  }
  friend bool operator==(const StObstacle&, const StObstacle&) = default;
};

/// One (joint or per-agent) prediction: probability plus obstacle set.
struct FuturePrediction {
  double probability = 1.0;
  std::vector<StObstacle> obstacles;
  std::string label;
  friend bool operator==(const FuturePrediction&,
                         const FuturePrediction&) = default;
};

struct RevealModel {
  enum class Mode { kFixed, kPmf };
  Mode mode = Mode::kFixed;
  std::size_t t_r_fixed = 0;
  std::vector<double> pmf;  // pmf[t] = P(t_R = t), t a time index
  friend bool operator==(const RevealModel&, const RevealModel&) = default;
};

struct ScenarioSpec {
  EgoState ego;
  Limits limits;
  double dt = 0.25;
  std::size_t horizon_steps = 40;
  /// Per-agent prediction lists; empty when `futures` is given directly.
  std::vector<std::vector<FuturePrediction>> agents;
  /// Joint futures; empty when `agents` is given.
  std::vector<FuturePrediction> futures;
  RevealModel reveal;
  std::size_t true_future_index = 0;

  /// Joint futures, composing `agents` when the per-agent form is used.
  std::vector<FuturePrediction> joint_futures() const;
  friend bool operator==(const ScenarioSpec&, const ScenarioSpec&) = default;
};

inline constexpr double kProbabilityTolerance = 1e-9;
inline constexpr std::size_t kDefaultJointFutureCap = 64;

/// Parses and validates a scenario from JSON text.
ScenarioSpec parse_scenario(std::string_view text);
/// Reads and parses a scenario file.
ScenarioSpec load_scenario(const std::filesystem::path& path);
/// Canonical JSON text; parse_scenario(serialize_scenario(x)) == x.
std::string serialize_scenario(const ScenarioSpec& spec);
/// Throws ValidationError on the first broken invariant.
void validate_scenario(const ScenarioSpec& spec);

/// Cartesian product of per-agent predictions. Joint probability is the
/// product of the members, joint obstacle set the union. Agent 0 varies
/// slowest. Labels are joined with '+'.
std::vector<FuturePrediction> compose_joint_futures(
    const std::vector<std::vector<FuturePrediction>>& agents,
    std::size_t cap = kDefaultJointFutureCap);

/// Fixed mode ignores the seed; pmf mode draws with a seeded mt19937_64.
std::size_t sample_reveal_time(const RevealModel& reveal, std::uint64_t seed);

}  // namespace mfp
