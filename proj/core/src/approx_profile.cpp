#include "mfp/approx_profile.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mfp/errors.hpp"

namespace mfp {

namespace {

enum class Check { kLower, kUpper };

struct Task {
  Check check;
  ProfileVertex start;
  ProfileVertex end;
  bool new_split;
};

// Deepest violation over the open interval (start, end). Returns end.index
// when nothing is violated. Ties go to the smallest index.
std::size_t deepest_violation(std::span<const double> bound, Check check,
                              const ProfileVertex& start,
                              const ProfileVertex& end) {
  std::size_t worst = end.index;
  double worst_diff = 0.0;
  for (std::size_t i = start.index + 1; i < end.index; ++i) {
    const double proposal = interpolate(start, end, i);
    const double diff =
        check == Check::kLower ? proposal - bound[i] : bound[i] - proposal;
    if (diff < worst_diff) {
      worst_diff = diff;
      worst = i;
    }
  }
  return worst;
}

std::vector<ProfileVertex> run_splits(std::span<const double> lb,
                                      std::span<const double> ub,
                                      ProfileVertex start, ProfileVertex end,
                                      Check first, bool new_split) {
  if (lb.size() != ub.size()) {
    throw DimensionMismatch("lower and upper bounds differ in length");
  }
  if (start.index >= end.index || end.index >= lb.size()) {
    throw DimensionMismatch("split end points must satisfy start < end < T");
  }

  std::vector<ProfileVertex> out;
  out.reserve(end.index - start.index + 1);
  out.push_back(start);
  std::vector<Task> stack;
  stack.reserve(64);
  stack.push_back({first, start, end, new_split});
  const std::size_t max_splits = lb.size();
  std::size_t splits = 0;

  while (!stack.empty()) {
    const Task task = stack.back();
    stack.pop_back();
    const auto bound = task.check == Check::kLower ? lb : ub;
    const std::size_t at = deepest_violation(bound, task.check, task.start,
                                             task.end);
    if (at == task.end.index) {
      if (task.new_split) {
        const Check other =
            task.check == Check::kLower ? Check::kUpper : Check::kLower;
        stack.push_back({other, task.start, task.end, false});
      } else {
        out.push_back(task.end);
      }
      continue;
    }
    if (++splits > max_splits) {
      throw RecursionDepthExceeded("approximate profile exceeded " +
                                   std::to_string(max_splits) + " splits");
    }
    const ProfileVertex pivot{at, bound[at]};
    const Check other =
        task.check == Check::kLower ? Check::kUpper : Check::kLower;
    // Second half first so the left half is processed next.
    stack.push_back({other, pivot, task.end, true});
    stack.push_back({other, task.start, pivot, true});
  }
  return out;
}

}  // namespace

double interpolate(const ProfileVertex& a, const ProfileVertex& b,
                   std::size_t index) noexcept {
  if (index == a.index) return a.station;
  if (index == b.index) return b.station;
  const double w = static_cast<double>(index - a.index) /
                   static_cast<double>(b.index - a.index);
  return a.station + (b.station - a.station) * w;
}

std::vector<ProfileVertex> lower_split(std::span<const double> lb,
                                       std::span<const double> ub,
                                       ProfileVertex start, ProfileVertex end,
                                       bool new_split) {
  return run_splits(lb, ub, start, end, Check::kLower, new_split);
}

std::vector<ProfileVertex> upper_split(std::span<const double> lb,
                                       std::span<const double> ub,
                                       ProfileVertex start, ProfileVertex end,
                                       bool new_split) {
  return run_splits(lb, ub, start, end, Check::kUpper, new_split);
}

ApproxProfile approximate_profile(std::span<const double> lb,
                                  std::span<const double> ub,
                                  double start_station, double s_max) {
  if (lb.size() != ub.size()) {
    throw DimensionMismatch("lower and upper bounds differ in length");
  }
  if (lb.size() < 2) throw DimensionMismatch("need at least two time steps");

  const std::size_t steps = lb.size();
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t < steps; ++t) {
    if (lb[t] > ub[t]) {
      throw Infeasible("bounds cross at index " + std::to_string(t));
    }
    margin = std::min(margin, 0.5 * (ub[t] - lb[t]));
  }
  if (start_station < lb[0] || start_station > ub[0]) {
    throw Infeasible("start station outside the band at index 0");
  }
  margin = std::clamp(margin, 0.0, std::max(0.0, 0.5 * s_max));

  std::vector<double> lb_pad(steps);
  std::vector<double> ub_pad(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    lb_pad[t] = lb[t] + margin;
    ub_pad[t] = ub[t] - margin;
  }

  const ProfileVertex start{0, start_station};
  const ProfileVertex end{steps - 1, ub_pad[steps - 1]};
  return ApproxProfile{lower_split(lb_pad, ub_pad, start, end, true), margin};
}

std::vector<double> sample_profile(std::span<const ProfileVertex> vertices,
                                   std::size_t steps) {
  std::vector<double> out(steps, 0.0);
  if (vertices.empty()) return out;
  std::size_t seg = 0;
  for (std::size_t t = 0; t < steps; ++t) {
    while (seg + 1 < vertices.size() && vertices[seg + 1].index < t) ++seg;
    if (seg + 1 >= vertices.size() || t <= vertices[seg].index) {
      // Before the first or after the last vertex: hold the nearest value.
      out[t] = t <= vertices[seg].index ? vertices[seg].station
                                        : vertices.back().station;
    } else {
      out[t] = interpolate(vertices[seg], vertices[seg + 1], t);
    }
  }
  return out;
}

std::vector<double> sample_profile(const ApproxProfile& profile,
                                   std::size_t steps) {
  return sample_profile(profile.vertices, steps);
}

}  // namespace mfp
