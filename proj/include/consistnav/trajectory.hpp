#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "consistnav/fse_controller.hpp"
#include "consistnav/geometry.hpp"

namespace consistnav {

struct ObservationLog {
  double x = 0.0;
  double y = 0.0;
  double conf = 0.0;
  std::optional<double> itm;
  bool is_target_label = false;
};

// One line of the trajectory JSONL. `state` is absent for variants that
// run without the executive.
struct StepLog {
  int t = 0;
  Pose pose;
  Action action = Action::Forward;
  std::optional<Action> filtered_from;
  std::optional<ExecutiveState> state;
  IntentKind intent = IntentKind::ExploreFrontier;
  std::optional<int> active_candidate;
  std::optional<Vec2> active_mu;
  std::optional<double> active_dist;
  int num_candidates = 0;
  std::optional<double> d_best;
  int h = 0;
  int k_app = 0;
  int spin_budget = 0;
  int stall_counter = 0;
  bool recovery_active = false;
  bool resample = false;
  std::optional<GateEvidence> gate;
  bool target_visible = false;
  std::vector<ObservationLog> observations;
  std::string note;
};

nlohmann::json to_json(const StepLog& s);
StepLog step_log_from_json(const nlohmann::json& j);

std::string to_jsonl(const std::vector<StepLog>& steps);
std::vector<StepLog> parse_jsonl(std::string_view text);
std::vector<StepLog> load_jsonl(const std::string& path);

}  // namespace consistnav
