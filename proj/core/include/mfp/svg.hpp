#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mfp/corridor.hpp"
#include "mfp/multi_future_qp.hpp"
#include "mfp/scenario.hpp"

namespace mfp {

/// Content of one ST-graph drawing. Times are seconds from the drawing
/// origin; obstacles use the same clock.
struct StGraph {
  double dt = 0.25;
  std::size_t horizon_steps = 0;
  double s_max = 0.0;
  std::vector<FuturePrediction> futures;
  /// Optional, one per future.
  std::vector<Corridor> corridors;
  /// Optional plan: prefix and per-future suffixes.
  std::vector<StepState> prefix;
  std::vector<std::vector<StepState>> suffixes;
  /// Optional executed trajectory.
  std::vector<StepState> executed;
};

StGraph make_st_graph(const std::vector<FuturePrediction>& futures,
                      const Limits& limits, double dt,
                      std::size_t horizon_steps);

/// Standalone SVG: obstacles as rectangles tinted per future, corridor bands
/// as dashed outlines, prefix in black, suffixes in the future's colour.
void write_svg(std::ostream& os, const StGraph& graph);

}  // namespace mfp
