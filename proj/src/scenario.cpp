#include "consistnav/scenario.hpp"

#include <fstream>
#include <sstream>

#include "consistnav/errors.hpp"

namespace consistnav {

using nlohmann::json;

std::vector<Vec2> Scenario::target_positions() const {
  std::vector<Vec2> out;
  for (const auto& o : objects) {
    if (o.is_target) out.push_back(o.position);
  }
  return out;
}

void validate(const Scenario& s) {
  const auto& g = s.grid;
  if (g.width() <= 0 || g.height() <= 0) throw SchemaError("scenario " + s.id + ": empty grid");
  if (g.count(Cell::Unknown) != 0) throw SchemaError("scenario " + s.id + ": ground truth has Unknown cells");
  if (!g.contains(s.start.position()) || !g.is_free(world_to_cell(s.start.position(), g))) {
    throw SchemaError("scenario " + s.id + ": start pose is not in a Free cell");
  }
  for (std::size_t i = 0; i < s.objects.size(); ++i) {
    const auto& o = s.objects[i];
    if (!g.contains(o.position) || !g.is_free(world_to_cell(o.position, g))) {
      throw SchemaError("scenario " + s.id + ": objects[" + std::to_string(i) + "] is not in a Free cell");
    }
    if (o.is_target != (o.category == s.target_category)) {
      throw SchemaError("scenario " + s.id + ": objects[" + std::to_string(i) +
                        "].is_target disagrees with target_category");
    }
  }
}

json to_json(const Scenario& s) {
  const auto& g = s.grid;
  json runs = json::array();
  for (int y = 0; y < g.height(); ++y) {
    int x = 0;
    while (x < g.width()) {
      if (g.at({x, y}) != Cell::Occupied) {
        ++x;
        continue;
      }
      int x0 = x;
      while (x < g.width() && g.at({x, y}) == Cell::Occupied) ++x;
      runs.push_back({y, x0, x - x0});
    }
  }
  json objects = json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"x", o.position.x}, {"y", o.position.y}, {"category", o.category}, {"is_target", o.is_target}});
  }
  return json{{"scenario_version", kScenarioVersion},
              {"id", s.id},
              {"preset", s.preset},
              {"width", g.width()},
              {"height", g.height()},
              {"cell_size", g.cell_size()},
              {"occupied_runs", runs},
              {"objects", objects},
              {"start", {{"x", s.start.position().x}, {"y", s.start.position().y}, {"theta", s.start.heading()}}},
              {"target_category", s.target_category}};
}

namespace {

const json& require(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaError(std::string("missing field \"") + key + "\"");
  return *it;
}

template <typename T>
T field(const json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const json::exception& e) {
    throw SchemaError(std::string("field \"") + key + "\": " + e.what());
  }
}

}  // namespace

Scenario scenario_from_json(const json& j) {
  if (!j.is_object()) throw SchemaError("scenario must be a JSON object");
  const int version = field<int>(j, "scenario_version");
  if (version != kScenarioVersion) {
    throw SchemaError("unsupported scenario_version " + std::to_string(version));
  }
  Scenario s;
  s.id = j.value("id", std::string{});
  s.preset = j.value("preset", std::string{});
  const int w = field<int>(j, "width");
  const int h = field<int>(j, "height");
  const double cs = field<double>(j, "cell_size");
  if (w <= 0 || h <= 0 || !(cs > 0.0)) throw SchemaError("width, height and cell_size must be positive");
  s.grid = OccupancyGrid(w, h, cs, Cell::Free);
  const auto& runs = require(j, "occupied_runs");
  if (!runs.is_array()) throw SchemaError("occupied_runs must be an array");
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const auto& r = runs[i];
    if (!r.is_array() || r.size() != 3) {
      throw SchemaError("occupied_runs[" + std::to_string(i) + "] must be [row, x0, length]");
    }
    const int y = r[0].get<int>(), x0 = r[1].get<int>(), len = r[2].get<int>();
    if (y < 0 || y >= h || x0 < 0 || len <= 0 || x0 + len > w) {
      throw SchemaError("occupied_runs[" + std::to_string(i) + "] out of bounds");
    }
    for (int x = x0; x < x0 + len; ++x) s.grid.set({x, y}, Cell::Occupied);
  }
  const auto& objects = require(j, "objects");
  if (!objects.is_array()) throw SchemaError("objects must be an array");
  for (const auto& o : objects) {
    ObjectInstance inst;
    inst.position = {field<double>(o, "x"), field<double>(o, "y")};
    inst.category = field<std::string>(o, "category");
    inst.is_target = field<bool>(o, "is_target");
    s.objects.push_back(inst);
  }
  const auto& start = require(j, "start");
  try {
    s.start = Pose({field<double>(start, "x"), field<double>(start, "y")}, field<double>(start, "theta"));
  } catch (const InvalidArgument& e) {
    throw SchemaError(std::string("start: ") + e.what());
  }
  s.target_category = field<std::string>(j, "target_category");
  validate(s);
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path + ": " + e.what());
  }
  try {
    return scenario_from_json(j);
  } catch (const SchemaError& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scenario file " + path);
  out << to_json(s).dump() << '\n';
  if (!out) throw IoError("write failed for " + path);
}

}  // namespace consistnav
