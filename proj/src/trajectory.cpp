#include "consistnav/trajectory.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "consistnav/errors.hpp"

namespace consistnav {

using nlohmann::json;

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json gate_json(const GateEvidence& g) {
  return {{"hits", g.hits},
          {"d_best", std::isfinite(g.d_best) ? json(g.d_best) : json(nullptr)},
          {"kappa", g.kappa},
          {"m_plus", g.m_plus},
          {"m_minus", g.m_minus},
          {"itm_mean", g.itm_mean}};
}

const json& need(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("trajectory step missing field '") + key + "'");
  return *it;
}

template <typename T>
std::optional<T> opt_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

IntentKind parse_intent(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(IntentKind::EmitStop); ++i) {
    const auto k = static_cast<IntentKind>(i);
    if (to_string(k) == s) return k;
  }
  throw SchemaError("unknown intent '" + s + "'");
}

}  // namespace

json to_json(const StepLog& s) {
  json obs = json::array();
  for (const auto& o : s.observations) {
    obs.push_back({{"x", o.x}, {"y", o.y}, {"conf", o.conf}, {"itm", opt(o.itm)}, {"is_target_label", o.is_target_label}});
  }
  json j;
  j["t"] = s.t;
  j["pose"] = {{"x", s.pose.position().x}, {"y", s.pose.position().y}, {"theta", s.pose.heading()}};
  j["action"] = std::string(to_string(s.action));
  j["filtered_from"] = s.filtered_from ? json(std::string(to_string(*s.filtered_from))) : json(nullptr);
  j["state"] = s.state ? json(std::string(to_string(*s.state))) : json(nullptr);
  j["intent"] = std::string(to_string(s.intent));
  j["active_candidate"] = opt(s.active_candidate);
  j["active_mu"] = s.active_mu ? json::array({s.active_mu->x, s.active_mu->y}) : json(nullptr);
  j["active_dist"] = opt(s.active_dist);
  j["num_candidates"] = s.num_candidates;
  j["d_best"] = (s.d_best && std::isfinite(*s.d_best)) ? json(*s.d_best) : json(nullptr);
  j["h"] = s.h;
  j["k_app"] = s.k_app;
  j["spin_budget"] = s.spin_budget;
  j["stall_counter"] = s.stall_counter;
  j["recovery_active"] = s.recovery_active;
  j["resample"] = s.resample;
  j["gate"] = s.gate ? gate_json(*s.gate) : json(nullptr);
  j["target_visible"] = s.target_visible;
  j["observations"] = std::move(obs);
  j["note"] = s.note;
  return j;
}

StepLog step_log_from_json(const json& j) {
  try {
    StepLog s;
    s.t = need(j, "t").get<int>();
    const json& pose = need(j, "pose");
    s.pose = Pose({need(pose, "x").get<double>(), need(pose, "y").get<double>()}, need(pose, "theta").get<double>());
    auto action = parse_action(need(j, "action").get<std::string>());
    if (!action) throw SchemaError("unknown action in trajectory");
    s.action = *action;
    if (auto f = opt_field<std::string>(j, "filtered_from")) {
      s.filtered_from = parse_action(*f);
      if (!s.filtered_from) throw SchemaError("unknown filtered_from action");
    }
    if (auto st = opt_field<std::string>(j, "state")) {
      s.state = parse_state(*st);
      if (!s.state) throw SchemaError("unknown state '" + *st + "'");
    }
    s.intent = parse_intent(need(j, "intent").get<std::string>());
    s.active_candidate = opt_field<int>(j, "active_candidate");
    if (auto it = j.find("active_mu"); it != j.end() && !it->is_null()) {
      s.active_mu = Vec2{it->at(0).get<double>(), it->at(1).get<double>()};
    }
    s.active_dist = opt_field<double>(j, "active_dist");
    s.num_candidates = need(j, "num_candidates").get<int>();
    s.d_best = opt_field<double>(j, "d_best");
    s.h = j.value("h", 0);
    s.k_app = j.value("k_app", 0);
    s.spin_budget = need(j, "spin_budget").get<int>();
    s.stall_counter = need(j, "stall_counter").get<int>();
    s.recovery_active = j.value("recovery_active", false);
    s.resample = j.value("resample", false);
    if (auto it = j.find("gate"); it != j.end() && !it->is_null()) {
      GateEvidence g;
      g.hits = need(*it, "hits").get<int>();
      g.d_best = opt_field<double>(*it, "d_best").value_or(std::numeric_limits<double>::infinity());
      g.kappa = need(*it, "kappa").get<double>();
      g.m_plus = need(*it, "m_plus").get<int>();
      g.m_minus = need(*it, "m_minus").get<int>();
      g.itm_mean = need(*it, "itm_mean").get<double>();
      s.gate = g;
    }
    s.target_visible = j.value("target_visible", false);
    for (const auto& o : need(j, "observations")) {
      s.observations.push_back({need(o, "x").get<double>(), need(o, "y").get<double>(), need(o, "conf").get<double>(),
                                opt_field<double>(o, "itm"), need(o, "is_target_label").get<bool>()});
    }
    s.note = j.value("note", std::string());
    return s;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed trajectory step: ") + e.what());
  }
}

std::string to_jsonl(const std::vector<StepLog>& steps) {
  std::string out;
  for (const auto& s : steps) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

std::vector<StepLog> parse_jsonl(std::string_view text) {
  std::vector<StepLog> steps;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    try {
      steps.push_back(step_log_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw SchemaError("trajectory line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError("trajectory line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return steps;
}

std::vector<StepLog> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_jsonl(buf.str());
}

}  // namespace consistnav
