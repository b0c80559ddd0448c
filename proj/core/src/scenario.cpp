#include "mfp/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "mfp/errors.hpp"

namespace mfp {

namespace {

using nlohmann::json;

std::string format_number(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object()) throw ParseError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) {
    throw ParseError(path + ": missing key \"" + key + "\"");
  }
  return *it;
}

double get_number(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) {
    throw ParseError(path + "." + key + ": expected a number");
  }
  return v.get<double>();
}

std::size_t get_index(const json& j, const char* key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    throw ParseError(path + "." + key + ": expected a non-negative integer");
  }
  return v.get<std::size_t>();
}

StObstacle parse_obstacle(const json& j, const std::string& path) {
  return StObstacle{get_number(j, "t_in", path), get_number(j, "t_out", path),
                    get_number(j, "s_in", path), get_number(j, "s_out", path)};
}

FuturePrediction parse_prediction(const json& j, const std::string& path) {
  FuturePrediction f;
  f.probability = get_number(j, "p", path);
  if (auto it = j.find("label"); it != j.end()) {
    if (!it->is_string()) throw ParseError(path + ".label: expected a string");
    f.label = it->get<std::string>();
  }
  if (auto it = j.find("obstacles"); it != j.end()) {
    if (!it->is_array()) {
      throw ParseError(path + ".obstacles: expected an array");
    }
    for (std::size_t i = 0; i < it->size(); ++i) {
      f.obstacles.push_back(parse_obstacle(
          (*it)[i], path + ".obstacles[" + std::to_string(i) + "]"));
    }
  }
  return f;
}

std::vector<FuturePrediction> parse_prediction_list(const json& j,
                                                    const std::string& path) {
  if (!j.is_array()) throw ParseError(path + ": expected an array");
  std::vector<FuturePrediction> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(parse_prediction(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

json to_json(const StObstacle& o) {
  return json{{"t_in", o.t_in}, {"t_out", o.t_out}, {"s_in", o.s_in},
              {"s_out", o.s_out}};
}

json to_json(const FuturePrediction& f) {
  json obstacles = json::array();
  for (const auto& o : f.obstacles) obstacles.push_back(to_json(o));
  return json{{"p", f.probability}, {"label", f.label},
              {"obstacles", std::move(obstacles)}};
}

void check_probabilities(const std::vector<FuturePrediction>& preds,
                         const std::string& path) {
  if (preds.empty()) throw ValidationError(path, "needs at least one entry");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double p = preds[i].probability;
    if (!(p > 0.0 && p <= 1.0)) {
      throw ValidationError(path + "[" + std::to_string(i) + "].p",
                            "probability must lie in (0, 1]");
    }
    sum += p;
  }
  if (std::abs(sum - 1.0) > kProbabilityTolerance) {
    throw ValidationError(path, "probabilities sum to " + format_number(sum));
  }
}

void check_obstacles(const std::vector<FuturePrediction>& preds,
                     const std::string& path, double horizon_time,
                     double s_max) {
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const auto& obs = preds[i].obstacles;
    for (std::size_t k = 0; k < obs.size(); ++k) {
      const std::string where = path + "[" + std::to_string(i) +
                                "].obstacles[" + std::to_string(k) + "]";
      const auto& o = obs[k];
      if (!(o.t_in < o.t_out)) throw ValidationError(where, "t_in >= t_out");
      if (!(o.s_in < o.s_out)) throw ValidationError(where, "s_in >= s_out");
      if (o.t_out < 0.0 || o.t_in > horizon_time || o.s_out < 0.0 ||
          o.s_in > s_max) {
        throw ValidationError(where, "rectangle lies outside the horizon");
      }
    }
  }
}

}  // namespace

std::vector<FuturePrediction> ScenarioSpec::joint_futures() const {
  if (!futures.empty()) return futures;
  return compose_joint_futures(agents);
}

void validate_scenario(const ScenarioSpec& spec) {
  if (!(spec.ego.v0 >= 0.0)) throw ValidationError("ego.v0", "must be >= 0");
  if (!(spec.ego.s0 >= 0.0)) throw ValidationError("ego.s0", "must be >= 0");
  const Limits& l = spec.limits;
  if (!(l.v_max > 0.0)) throw ValidationError("limits.v_max", "must be > 0");
  if (!(l.a_min < 0.0 && 0.0 < l.a_max)) {
    throw ValidationError("limits.a_min", "need a_min < 0 < a_max");
  }
  if (!(l.j_min < 0.0 && 0.0 < l.j_max)) {
    throw ValidationError("limits.j_min", "need j_min < 0 < j_max");
  }
  if (!(l.s_max > 0.0)) throw ValidationError("limits.s_max", "must be > 0");
  if (!(spec.ego.s0 <= l.s_max)) {
    throw ValidationError("ego.s0", "must not exceed limits.s_max");
  }
  if (!(spec.dt > 0.0)) throw ValidationError("dt", "must be > 0");
  if (spec.horizon_steps < 2) {
    throw ValidationError("horizon_steps", "must be >= 2");
  }

  const bool has_agents = !spec.agents.empty();
  const bool has_futures = !spec.futures.empty();
  if (has_agents == has_futures) {
    throw ValidationError("agents/futures",
                          "exactly one of \"agents\" or \"futures\" required");
  }
  const double horizon_time =
      static_cast<double>(spec.horizon_steps - 1) * spec.dt;
  std::size_t joint_count = 0;
  if (has_futures) {
    check_probabilities(spec.futures, "futures");
    check_obstacles(spec.futures, "futures", horizon_time, l.s_max);
    joint_count = spec.futures.size();
  } else {
    joint_count = 1;
    for (std::size_t a = 0; a < spec.agents.size(); ++a) {
      const std::string path = "agents[" + std::to_string(a) + "]";
      check_probabilities(spec.agents[a], path);
      check_obstacles(spec.agents[a], path, horizon_time, l.s_max);
      joint_count *= spec.agents[a].size();
      if (joint_count > kDefaultJointFutureCap) {
        throw CombinatorialLimitExceeded(joint_count, kDefaultJointFutureCap);
      }
    }
  }
  if (spec.true_future_index >= joint_count) {
    throw ValidationError("true_future_index",
                          "out of range for " + std::to_string(joint_count) +
                              " futures");
  }

  const RevealModel& r = spec.reveal;
  if (r.mode == RevealModel::Mode::kFixed) {
    if (r.t_r_fixed >= spec.horizon_steps) {
      throw ValidationError("reveal.t_R", "outside the horizon");
    }
  } else {
    if (r.pmf.empty() || r.pmf.size() > spec.horizon_steps) {
      throw ValidationError("reveal.pmf",
                            "length must be in [1, horizon_steps]");
    }
    double sum = 0.0;
    for (double p : r.pmf) {
      if (!(p >= 0.0)) throw ValidationError("reveal.pmf", "negative entry");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kProbabilityTolerance) {
      throw ValidationError("reveal.pmf",
                            "probabilities sum to " + format_number(sum));
    }
  }
}

ScenarioSpec parse_scenario(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) throw ParseError("scenario: expected an object");

  ScenarioSpec spec;
  const json& ego = require(root, "ego", "scenario");
  spec.ego = EgoState{get_number(ego, "s0", "ego"), get_number(ego, "v0", "ego"),
                      get_number(ego, "a0", "ego")};
  const json& lim = require(root, "limits", "scenario");
  spec.limits = Limits{get_number(lim, "v_max", "limits"),
                       get_number(lim, "a_min", "limits"),
                       get_number(lim, "a_max", "limits"),
                       get_number(lim, "j_min", "limits"),
                       get_number(lim, "j_max", "limits"),
                       get_number(lim, "s_max", "limits")};
  spec.dt = get_number(root, "dt", "scenario");
  spec.horizon_steps = get_index(root, "horizon_steps", "scenario");

  const bool has_agents = root.contains("agents");
  const bool has_futures = root.contains("futures");
  if (has_agents && has_futures) {
    throw ValidationError("agents/futures",
                          "exactly one of \"agents\" or \"futures\" allowed");
  }
  if (has_agents) {
    const json& agents = root["agents"];
    if (!agents.is_array()) throw ParseError("agents: expected an array");
    for (std::size_t a = 0; a < agents.size(); ++a) {
      spec.agents.push_back(
          parse_prediction_list(agents[a], "agents[" + std::to_string(a) + "]"));
    }
  } else if (has_futures) {
    spec.futures = parse_prediction_list(root["futures"], "futures");
  }

  if (auto it = root.find("reveal"); it != root.end()) {
    const json& rv = *it;
    const json& mode = require(rv, "mode", "reveal");
    if (!mode.is_string()) throw ParseError("reveal.mode: expected a string");
    const auto m = mode.get<std::string>();
    if (m == "fixed") {
      spec.reveal.mode = RevealModel::Mode::kFixed;
      spec.reveal.t_r_fixed = get_index(rv, "t_R", "reveal");
    } else if (m == "pmf") {
      spec.reveal.mode = RevealModel::Mode::kPmf;
      const json& pmf = require(rv, "pmf", "reveal");
      if (!pmf.is_array()) throw ParseError("reveal.pmf: expected an array");
      for (const auto& p : pmf) {
        if (!p.is_number()) throw ParseError("reveal.pmf: expected numbers");
        spec.reveal.pmf.push_back(p.get<double>());
      }
    } else {
      throw ParseError("reveal.mode: expected \"fixed\" or \"pmf\"");
    }
  } else {
    spec.reveal.mode = RevealModel::Mode::kPmf;
    spec.reveal.pmf.assign(spec.horizon_steps,
                           1.0 / static_cast<double>(spec.horizon_steps));
  }
  if (root.contains("true_future_index")) {
    spec.true_future_index = get_index(root, "true_future_index", "scenario");
  }

  validate_scenario(spec);
  return spec;
}

ScenarioSpec load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string serialize_scenario(const ScenarioSpec& spec) {
  json root;
  root["ego"] = {{"s0", spec.ego.s0}, {"v0", spec.ego.v0}, {"a0", spec.ego.a0}};
  const Limits& l = spec.limits;
  root["limits"] = {{"v_max", l.v_max}, {"a_min", l.a_min}, {"a_max", l.a_max},
                    {"j_min", l.j_min}, {"j_max", l.j_max}, {"s_max", l.s_max}};
  root["dt"] = spec.dt;
  root["horizon_steps"] = spec.horizon_steps;
  if (!spec.agents.empty()) {
    json agents = json::array();
    for (const auto& preds : spec.agents) {
      json list = json::array();
      for (const auto& f : preds) list.push_back(to_json(f));
      agents.push_back(std::move(list));
    }
    root["agents"] = std::move(agents);
  } else {
    json futures = json::array();
    for (const auto& f : spec.futures) futures.push_back(to_json(f));
    root["futures"] = std::move(futures);
  }
  if (spec.reveal.mode == RevealModel::Mode::kFixed) {
    root["reveal"] = {{"mode", "fixed"}, {"t_R", spec.reveal.t_r_fixed}};
  } else {
    root["reveal"] = {{"mode", "pmf"}, {"pmf", spec.reveal.pmf}};
  }
  root["true_future_index"] = spec.true_future_index;
  return root.dump(2) + "\n";
}

std::vector<FuturePrediction> compose_joint_futures(
    const std::vector<std::vector<FuturePrediction>>& agents,
    std::size_t cap) {
  std::size_t count = 1;
  for (std::size_t a = 0; a < agents.size(); ++a) {
    if (agents[a].empty()) {
      throw ValidationError("agents[" + std::to_string(a) + "]",
                            "needs at least one prediction");
    }
    count *= agents[a].size();
    if (count > cap) throw CombinatorialLimitExceeded(count, cap);
  }

  std::vector<FuturePrediction> out;
  out.reserve(count);
  std::vector<std::size_t> pick(agents.size(), 0);
  for (std::size_t n = 0; n < count; ++n) {
    FuturePrediction joint;
    joint.probability = 1.0;
    for (std::size_t a = 0; a < agents.size(); ++a) {
      const FuturePrediction& f = agents[a][pick[a]];
      joint.probability *= f.probability;
      for (const auto& o : f.obstacles) {
        if (std::find(joint.obstacles.begin(), joint.obstacles.end(), o) ==
            joint.obstacles.end()) {
          joint.obstacles.push_back(o);
        }
      }
      if (a > 0) joint.label += '+';
      joint.label += f.label.empty() ? std::to_string(pick[a]) : f.label;
    }
    out.push_back(std::move(joint));
    // Odometer increment, last agent fastest.
    for (std::size_t a = agents.size(); a-- > 0;) {
      if (++pick[a] < agents[a].size()) break;
      pick[a] = 0;
    }
  }
  return out;
}

std::size_t sample_reveal_time(const RevealModel& reveal, std::uint64_t seed) {
  if (reveal.mode == RevealModel::Mode::kFixed) return reveal.t_r_fixed;
  std::mt19937_64 rng(seed);
  // 53 random mantissa bits, uniform on [0, 1).
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t t = 0; t < reveal.pmf.size(); ++t) {
    if (reveal.pmf[t] <= 0.0) continue;
    last_positive = t;
    acc += reveal.pmf[t];
    if (u < acc) return t;
  }
  return last_positive;
}

}  // namespace mfp
