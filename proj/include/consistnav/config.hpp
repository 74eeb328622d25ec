#pragma once

#include <string>

#include "json.hpp"

#include "consistnav/action_control.hpp"
#include "consistnav/candidate_memory.hpp"
#include "consistnav/fse_controller.hpp"
#include "consistnav/sensing.hpp"

namespace consistnav {

// Settings of the non-executive pursuit used by Baseline and PCM.
struct BaselineConfig {
  double pursue_confidence = 0.5;
  double stop_radius = 0.3;

  void validate() const;
};

// A candidate whose centre is in clear view without a matching detection
// receives non-target evidence.
struct AbsenceConfig {
  bool enabled = true;
  double range_fraction = 0.9;              // of sensing_range
  double fov_margin = 5.0 * std::numbers::pi / 180.0;  // per side
};

struct SimConfig {
  MemoryConfig memory;
  FseConfig fse;
  GuardConfig guard;
  DetectorConfig detector;
  EpisodeConfig episode;
  BaselineConfig baseline;
  AbsenceConfig absence;

  void validate() const;
};

nlohmann::json to_json(const SimConfig& c);
// Missing keys keep their defaults; unknown keys are a SchemaError.
SimConfig config_from_json(const nlohmann::json& j);
SimConfig load_config(const std::string& path);

}  // namespace consistnav
