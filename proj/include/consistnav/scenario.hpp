#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "consistnav/geometry.hpp"
#include "consistnav/grid.hpp"

namespace consistnav {

inline constexpr int kScenarioVersion = 1;

struct ObjectInstance {
  Vec2 position;
  std::string category;
  bool is_target = false;
};

// One projected detection as seen by the executive.
struct SemanticObservation {
  Vec2 world_pos;
  double confidence = 0.0;
  bool is_target = false;
  std::optional<double> itm_score;
  int step = 0;
};

struct Scenario {
  std::string id;
  std::string preset;
  OccupancyGrid grid;  // ground truth: Free / Occupied only
  std::vector<ObjectInstance> objects;
  Pose start;
  std::string target_category;

  std::vector<Vec2> target_positions() const;
};

// Schema checks: version, dimensions, run bounds, objects in Free cells,
// start in a Free cell. Throws SchemaError naming the offending field.
void validate(const Scenario& s);

nlohmann::json to_json(const Scenario& s);
Scenario scenario_from_json(const nlohmann::json& j);

// File helpers. Parse failures are reported as SchemaError with the line
// and column of the offending byte.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

}  // namespace consistnav
