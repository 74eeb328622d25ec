#include "consistnav/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "consistnav/errors.hpp"

namespace consistnav {

using nlohmann::json;

std::string_view to_string(Outcome o) {
  switch (o) {
    case Outcome::Success: return "Success";
    case Outcome::Infeasible: return "Infeasible";
    case Outcome::UnstableCommitment: return "UnstableCommitment";
    case Outcome::FrontierExhaustion: return "FrontierExhaustion";
    case Outcome::Timeout: return "Timeout";
    case Outcome::MissingTarget: return "MissingTarget";
  }
  return "?";
}

std::optional<Outcome> parse_outcome(std::string_view s) {
  for (Outcome o : kAllOutcomes) {
    if (to_string(o) == s) return o;
  }
  return std::nullopt;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Stop: return "Stop";
    case Termination::NoSubgoal: return "NoSubgoal";
    case Termination::MaxSteps: return "MaxSteps";
    case Termination::Infeasible: return "Infeasible";
  }
  return "?";
}

std::optional<Termination> parse_termination(std::string_view s) {
  for (auto t : {Termination::Stop, Termination::NoSubgoal, Termination::MaxSteps, Termination::Infeasible}) {
    if (to_string(t) == s) return t;
  }
  return std::nullopt;
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

std::size_t outcome_index(Outcome o) { return static_cast<std::size_t>(o); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

}  // namespace

json to_json(const EpisodeRecord& r) {
  return {{"episode_id", r.episode_id},
          {"scenario_id", r.scenario_id},
          {"variant", std::string(to_string(r.variant))},
          {"episode_index", r.episode_index},
          {"seed", r.seed},
          {"outcome", std::string(to_string(r.outcome))},
          {"termination", std::string(to_string(r.termination))},
          {"steps", r.steps},
          {"path_length", r.path_length},
          {"shortest_path", r.shortest_path},
          {"spl_term", r.spl_term},
          {"stop_step", opt(r.stop_step)},
          {"stop_distance", opt(r.stop_distance)},
          {"final_state", r.final_state ? json(std::string(to_string(*r.final_state))) : json(nullptr)},
          {"trajectory_path", r.trajectory_path}};
}

EpisodeRecord record_from_json(const json& j) {
  try {
    EpisodeRecord r;
    r.episode_id = j.at("episode_id").get<std::string>();
    r.scenario_id = j.at("scenario_id").get<std::string>();
    auto v = parse_variant(j.at("variant").get<std::string>());
    if (!v) throw SchemaError("unknown variant in record");
    r.variant = *v;
    r.episode_index = j.at("episode_index").get<int>();
    r.seed = j.at("seed").get<std::uint64_t>();
    auto o = parse_outcome(j.at("outcome").get<std::string>());
    if (!o) throw SchemaError("unknown outcome in record");
    r.outcome = *o;
    auto t = parse_termination(j.at("termination").get<std::string>());
    if (!t) throw SchemaError("unknown termination in record");
    r.termination = *t;
    r.steps = j.at("steps").get<int>();
    r.path_length = j.at("path_length").get<double>();
    r.shortest_path = j.at("shortest_path").get<double>();
    r.spl_term = j.at("spl_term").get<double>();
    if (!j.at("stop_step").is_null()) r.stop_step = j.at("stop_step").get<int>();
    if (!j.at("stop_distance").is_null()) r.stop_distance = j.at("stop_distance").get<double>();
    if (!j.at("final_state").is_null()) {
      r.final_state = parse_state(j.at("final_state").get<std::string>());
      if (!r.final_state) throw SchemaError("unknown final_state in record");
    }
    r.trajectory_path = j.value("trajectory_path", std::string());
    return r;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed episode record: ") + e.what());
  }
}

// Uniform-cost search over an ordered set (decrease-key by erase/insert),
// kept separate from the planner's heap-based A*.
std::optional<double> shortest_path_oracle(const OccupancyGrid& truth, Vec2 start, std::span<const Vec2> targets,
                                           double success_radius) {
  const double cs = truth.cell_size();
  const CellIndex s{floor_cell(start.x, cs), floor_cell(start.y, cs)};
  if (!truth.is_free(s)) throw InvalidArgument("oracle: start is not in a free cell");

  const int w = truth.width();
  const int h = truth.height();
  std::vector<char> goal(static_cast<std::size_t>(w) * h, 0);
  bool any_goal = false;
  for (const Vec2& t : targets) {
    const int r = static_cast<int>(std::ceil(success_radius / cs)) + 1;
    const int tx = floor_cell(t.x, cs);
    const int ty = floor_cell(t.y, cs);
    for (int y = ty - r; y <= ty + r; ++y) {
      for (int x = tx - r; x <= tx + r; ++x) {
        if (x < 0 || y < 0 || x >= w || y >= h) continue;
        if (truth.at({x, y}) != Cell::Free) continue;
        const double cx = (x + 0.5) * cs - t.x;
        const double cy = (y + 0.5) * cs - t.y;
        if (std::sqrt(cx * cx + cy * cy) <= success_radius + 1e-12) {
          goal[static_cast<std::size_t>(y) * w + x] = 1;
          any_goal = true;
        }
      }
    }
  }
  if (!any_goal) return std::nullopt;

  auto passable = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h && truth.at({x, y}) == Cell::Free; };
  std::vector<double> dist(goal.size(), std::numeric_limits<double>::infinity());
  std::set<std::pair<double, int>> frontier;
  const int s_id = s.y * w + s.x;
  dist[s_id] = 0.0;
  frontier.insert({0.0, s_id});
  const double diag = std::sqrt(2.0);
  while (!frontier.empty()) {
    const auto [d, id] = *frontier.begin();
    frontier.erase(frontier.begin());
    if (goal[id]) return std::max(d * cs, cs);
    const int x = id % w;
    const int y = id / w;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        if (!passable(x + dx, y + dy)) continue;
        const bool diagonal = dx != 0 && dy != 0;
        if (diagonal && (!passable(x + dx, y) || !passable(x, y + dy))) continue;
        const int nid = (y + dy) * w + (x + dx);
        const double nd = d + (diagonal ? diag : 1.0);
        if (nd < dist[nid]) {
          if (std::isfinite(dist[nid])) frontier.erase({dist[nid], nid});
          dist[nid] = nd;
          frontier.insert({nd, nid});
        }
      }
    }
  }
  return std::nullopt;
}

double spl_term(bool success, double path_length, double shortest_path) {
  if (!success || !(shortest_path > 0)) return 0.0;
  return shortest_path / std::max(path_length, shortest_path);
}

Metrics compute_metrics(std::span<const EpisodeRecord> records) {
  if (records.empty()) throw InvalidArgument("compute_metrics needs at least one record");
  Metrics m;
  for (const auto& r : records) {
    m.sr += r.success() ? 1.0 : 0.0;
    m.spl += r.spl_term;
  }
  m.sr /= static_cast<double>(records.size());
  m.spl /= static_cast<double>(records.size());
  return m;
}

namespace {

double nearest_target_distance(Vec2 p, const std::vector<Vec2>& targets) {
  double best = std::numeric_limits<double>::infinity();
  for (const Vec2& t : targets) best = std::min(best, euclidean_distance(p, t));
  return best;
}

bool committed(const StepLog& s) {
  if (s.state) return is_commit_state(*s.state) && s.active_mu.has_value();
  return s.active_mu.has_value();
}

}  // namespace

Outcome classify_outcome(const OutcomeContext& ctx, std::span<const StepLog> trajectory, const Scenario& world) {
  if (!ctx.feasible || ctx.termination == Termination::Infeasible) return Outcome::Infeasible;
  const std::vector<Vec2> targets = world.target_positions();

  const StepLog* stop = nullptr;
  for (const auto& s : trajectory) {
    if (s.action == Action::Stop) {
      stop = &s;
      break;
    }
  }
  if (stop && nearest_target_distance(stop->pose.position(), targets) <= ctx.success_radius) return Outcome::Success;
  if (stop) return Outcome::UnstableCommitment;

  auto on_target = [&](const StepLog& s) {
    return committed(s) && nearest_target_distance(*s.active_mu, targets) <= ctx.target_proximity;
  };
  std::optional<std::size_t> first_commit;
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (on_target(trajectory[i])) {
      first_commit = i;
      break;
    }
  }
  if (first_commit) {
    for (std::size_t i = *first_commit + 1; i < trajectory.size(); ++i) {
      if (!on_target(trajectory[i])) return Outcome::UnstableCommitment;
    }
  } else {
    const bool seen = std::any_of(trajectory.begin(), trajectory.end(), [](const StepLog& s) { return s.target_visible; });
    if (seen) return Outcome::MissingTarget;
  }
  const bool committed_at_end = !trajectory.empty() && committed(trajectory.back());
  if (ctx.termination == Termination::NoSubgoal && !committed_at_end) return Outcome::FrontierExhaustion;
  return Outcome::Timeout;
}

std::vector<VariantAggregate> aggregate_report(std::span<const EpisodeRecord> records) {
  std::vector<VariantAggregate> rows;
  for (Variant v : kAllVariants) {
    std::vector<EpisodeRecord> mine;
    for (const auto& r : records) {
      if (r.variant == v) mine.push_back(r);
    }
    if (mine.empty()) continue;
    VariantAggregate row;
    row.variant = v;
    row.episodes = static_cast<int>(mine.size());
    row.metrics = compute_metrics(mine);
    for (const auto& r : mine) {
      ++row.counts[outcome_index(r.outcome)];
      if (r.false_stop()) ++row.false_stops;
    }
    for (std::size_t i = 0; i < row.counts.size(); ++i) row.percentages[i] = 100.0 * row.counts[i] / row.episodes;
    row.false_stop_rate = static_cast<double>(row.false_stops) / row.episodes;
    rows.push_back(row);
  }
  return rows;
}

json to_json(const std::vector<VariantAggregate>& rows) {
  json out = json::array();
  for (const auto& r : rows) {
    json outcomes = json::object();
    for (Outcome o : kAllOutcomes) {
      outcomes[std::string(to_string(o))] = {{"count", r.counts[outcome_index(o)]},
                                             {"percent", r.percentages[outcome_index(o)]}};
    }
    out.push_back({{"variant", std::string(to_string(r.variant))},
                   {"episodes", r.episodes},
                   {"sr", r.metrics.sr},
                   {"spl", r.metrics.spl},
                   {"false_stops", r.false_stops},
                   {"false_stop_rate", r.false_stop_rate},
                   {"outcomes", outcomes}});
  }
  return out;
}

std::vector<VariantAggregate> aggregates_from_json(const json& j) {
  if (!j.is_array()) throw SchemaError("aggregates must be an array");
  std::vector<VariantAggregate> rows;
  try {
    for (const auto& e : j) {
      VariantAggregate r;
      auto v = parse_variant(e.at("variant").get<std::string>());
      if (!v) throw SchemaError("unknown variant in aggregates");
      r.variant = *v;
      r.episodes = e.at("episodes").get<int>();
      r.metrics.sr = e.at("sr").get<double>();
      r.metrics.spl = e.at("spl").get<double>();
      r.false_stops = e.at("false_stops").get<int>();
      r.false_stop_rate = e.at("false_stop_rate").get<double>();
      for (Outcome o : kAllOutcomes) {
        const json& oc = e.at("outcomes").at(std::string(to_string(o)));
        r.counts[outcome_index(o)] = oc.at("count").get<int>();
        r.percentages[outcome_index(o)] = oc.at("percent").get<double>();
      }
      rows.push_back(r);
    }
  } catch (const json::exception& e) {
    throw SchemaError(std::string("malformed aggregates: ") + e.what());
  }
  return rows;
}

std::string render_markdown(const std::vector<VariantAggregate>& rows) {
  if (rows.empty()) return "no episodes\n";
  std::string out = "| Variant | Episodes | SR (%) | SPL (%) | False stops |";
  for (Outcome o : kAllOutcomes) out += " " + std::string(to_string(o)) + " (%) |";
  out += "\n|---|---:|---:|---:|---:|";
  for (std::size_t i = 0; i < kAllOutcomes.size(); ++i) out += "---:|";
  out += "\n";
  for (const auto& r : rows) {
    out += "| " + std::string(to_string(r.variant)) + " | " + std::to_string(r.episodes) + " | " +
           fmt(100 * r.metrics.sr, 1) + " | " + fmt(100 * r.metrics.spl, 1) + " | " + std::to_string(r.false_stops) +
           " |";
    for (double p : r.percentages) out += " " + fmt(p, 1) + " |";
    out += "\n";
  }
  return out;
}

std::string render_csv(const std::vector<VariantAggregate>& rows) {
  std::string out = "variant,episodes,sr,spl\n";
  for (const auto& r : rows) {
    out += std::string(to_string(r.variant)) + "," + std::to_string(r.episodes) + "," + fmt(r.metrics.sr) + "," +
           fmt(r.metrics.spl) + "\n";
  }
  out += "\nvariant,category,percentage\n";
  for (const auto& r : rows) {
    for (Outcome o : kAllOutcomes) {
      out += std::string(to_string(r.variant)) + "," + std::string(to_string(o)) + "," +
             fmt(r.percentages[outcome_index(o)], 2) + "\n";
    }
  }
  return out;
}

std::string records_csv(std::span<const EpisodeRecord> records) {
  std::string out =
      "episode_id,scenario_id,variant,episode_index,seed,outcome,termination,steps,path_length,shortest_path,"
      "spl_term,stop_step\n";
  for (const auto& r : records) {
    out += r.episode_id + "," + r.scenario_id + "," + std::string(to_string(r.variant)) + "," +
           std::to_string(r.episode_index) + "," + std::to_string(r.seed) + "," + std::string(to_string(r.outcome)) +
           "," + std::string(to_string(r.termination)) + "," + std::to_string(r.steps) + "," + fmt(r.path_length) +
           "," + fmt(r.shortest_path) + "," + fmt(r.spl_term) + "," +
           (r.stop_step ? std::to_string(*r.stop_step) : std::string()) + "\n";
  }
  return out;
}

}  // namespace consistnav
