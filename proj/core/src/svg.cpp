#include "mfp/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <string>

namespace mfp {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMargin = 48.0;

const char* colour(std::size_t i) {
  static const char* palette[] = {"#d62728", "#1f77b4", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
  return palette[i % (sizeof palette / sizeof palette[0])];
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

struct Frame {
  double t_max;
  double s_max;
  double x(double t) const {
    return kMargin + (kWidth - 2 * kMargin) * t / t_max;
  }
  double y(double s) const {
    return kHeight - kMargin - (kHeight - 2 * kMargin) * s / s_max;
  }
};

void polyline(std::ostream& os, const Frame& f, double dt, std::size_t offset,
              const std::vector<StepState>& states, const char* stroke,
              const char* extra = "") {
  if (states.empty()) return;
  os << "<polyline fill=\"none\" stroke=\"" << stroke
     << "\" stroke-width=\"2\" " << extra << " points=\"";
  for (std::size_t k = 0; k < states.size(); ++k) {
    const double t = static_cast<double>(offset + k) * dt;
    os << num(f.x(t)) << ',' << num(f.y(states[k].s)) << ' ';
  }
  os << "\"/>\n";
}

}  // namespace

StGraph make_st_graph(const std::vector<FuturePrediction>& futures,
                      const Limits& limits, double dt,
                      std::size_t horizon_steps) {
  StGraph g;
  g.dt = dt;
  g.horizon_steps = horizon_steps;
  g.s_max = limits.s_max;
  g.futures = futures;
  return g;
}

void write_svg(std::ostream& os, const StGraph& graph) {
  double s_top = graph.s_max;
  const auto grow = [&](const std::vector<StepState>& v) {
    for (const auto& x : v) s_top = std::max(s_top, x.s);
  };
  grow(graph.prefix);
  grow(graph.executed);
  for (const auto& s : graph.suffixes) grow(s);
  const double t_top =
      std::max(graph.dt, graph.dt * static_cast<double>(
                                        std::max<std::size_t>(1, graph.horizon_steps) - 1));
  const Frame f{t_top, std::max(1.0, s_top)};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
     << "\" height=\"" << kHeight << "\" font-family=\"sans-serif\" "
     << "font-size=\"11\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  // Axes.
  os << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\""
     << num(f.x(t_top)) << "\" y2=\"" << num(f.y(0))
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\""
     << num(f.x(0)) << "\" y2=\"" << num(f.y(f.s_max))
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(f.x(t_top) - 30) << "\" y=\""
     << num(f.y(0) + 28) << "\">t [s]</text>\n";
  os << "<text x=\"8\" y=\"" << num(f.y(f.s_max) - 8) << "\">s [m]</text>\n";
  for (int i = 0; i <= 4; ++i) {
    const double t = t_top * i / 4.0;
    const double s = f.s_max * i / 4.0;
    os << "<text x=\"" << num(f.x(t) - 8) << "\" y=\"" << num(f.y(0) + 14)
       << "\">" << num(t) << "</text>\n";
    os << "<text x=\"4\" y=\"" << num(f.y(s) + 4) << "\">" << num(s)
       << "</text>\n";
  }

  for (std::size_t i = 0; i < graph.futures.size(); ++i) {
    for (const StObstacle& o : graph.futures[i].obstacles) {
      const double s_hi = std::min(o.s_out, f.s_max);
      os << "<rect x=\"" << num(f.x(o.t_in)) << "\" y=\"" << num(f.y(s_hi))
         << "\" width=\"" << num(f.x(o.t_out) - f.x(o.t_in))
         << "\" height=\"" << num(f.y(o.s_in) - f.y(s_hi)) << "\" fill=\""
         << colour(i) << "\" fill-opacity=\"0.3\" stroke=\"" << colour(i)
         << "\"/>\n";
    }
  }

  for (std::size_t i = 0; i < graph.corridors.size(); ++i) {
    const Corridor& c = graph.corridors[i];
    for (const auto* bound : {&c.lb, &c.ub}) {
      os << "<polyline fill=\"none\" stroke=\"" << colour(i)
         << "\" stroke-dasharray=\"4 3\" points=\"";
      for (std::size_t k = 0; k < bound->size(); ++k) {
        os << num(f.x(static_cast<double>(k) * graph.dt)) << ','
           << num(f.y(std::min((*bound)[k], f.s_max))) << ' ';
      }
      os << "\"/>\n";
    }
  }

  const std::size_t split = graph.prefix.empty() ? 0 : graph.prefix.size() - 1;
  for (std::size_t i = 0; i < graph.suffixes.size(); ++i) {
    std::vector<StepState> joined;
    if (!graph.prefix.empty()) joined.push_back(graph.prefix.back());
    joined.insert(joined.end(), graph.suffixes[i].begin(),
                  graph.suffixes[i].end());
    polyline(os, f, graph.dt, split, joined, colour(i));
  }
  polyline(os, f, graph.dt, 0, graph.prefix, "black");
  polyline(os, f, graph.dt, 0, graph.executed, "#444444",
           "stroke-dasharray=\"1 2\"");
  os << "</svg>\n";
}

}  // namespace mfp
