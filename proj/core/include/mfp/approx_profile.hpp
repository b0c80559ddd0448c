#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace mfp {

/// Vertex of a piecewise-linear station profile: (time index, station).
struct ProfileVertex {
  std::size_t index = 0;
  double station = 0.0;
  friend bool operator==(const ProfileVertex&, const ProfileVertex&) = default;
};

/// Piecewise-linear station profile plus the inward padding that produced it.
///
/// Vertices are strictly increasing in index and start at index 0. The
/// profile is a screening device: it is guaranteed to stay within the bounds
/// it was built from, but it is not monotone and carries no dynamics.
struct ApproxProfile {
  std::vector<ProfileVertex> vertices;
  double margin = 0.0;
};

/// Station of the chord a->b at `index`. Every consumer that samples a
/// profile goes through this so the bound checks and the samples agree
/// bit for bit.
double interpolate(const ProfileVertex& a, const ProfileVertex& b,
                   std::size_t index) noexcept;

/// Max-min-margin piecewise-linear profile inside [lb, ub].
///
/// Pads both bounds inward by min_t (ub - lb) / 2 (capped to [0, s_max / 2]),
/// anchors the end at the padded upper bound of the last index and runs the
/// alternating lower/upper split from `start_station`. Only indices strictly
/// between segment end points are checked, so a start that sits inside the
/// raw band but outside the padded band is accepted.
///
/// Throws Infeasible when lb > ub anywhere or the start lies outside
/// [lb[0], ub[0]]; DimensionMismatch on unequal or too short inputs.
ApproxProfile approximate_profile(
    std::span<const double> lb, std::span<const double> ub,
    double start_station,
    double s_max = std::numeric_limits<double>::infinity());

/// Splits the chord start->end at its deepest lower-bound violation and
/// alternates with upper_split until every segment passes both checks.
/// With `new_split` set, a violation-free chord is still handed to
/// upper_split once before being accepted.
std::vector<ProfileVertex> lower_split(std::span<const double> lb,
                                       std::span<const double> ub,
                                       ProfileVertex start, ProfileVertex end,
                                       bool new_split);

/// Mirror of lower_split: splits at the deepest upper-bound violation onto
/// ub and recurses through lower_split.
std::vector<ProfileVertex> upper_split(std::span<const double> lb,
                                       std::span<const double> ub,
                                       ProfileVertex start, ProfileVertex end,
                                       bool new_split);

/// Dense samples at indices 0..steps-1.
std::vector<double> sample_profile(const ApproxProfile& profile,
                                   std::size_t steps);
std::vector<double> sample_profile(std::span<const ProfileVertex> vertices,
                                   std::size_t steps);

}  // namespace mfp
