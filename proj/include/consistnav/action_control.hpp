#pragma once

#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "consistnav/fse_controller.hpp"
#include "consistnav/geometry.hpp"
#include "consistnav/grid.hpp"

namespace consistnav {

struct GuardConfig {
  double delta_move = 0.05;     // minimum translation that counts as motion
  int spin_cap = 6;             // B_spin
  double progress_margin = 0.1; // eps_d
  int stall_steps = 12;         // K_s
  int recovery_budget = 20;     // B_r
  double lambda_visited = 1.0;
  double lambda_failed = 2.0;
  double heading_tolerance = 15.0 * std::numbers::pi / 180.0;
  double failed_region_radius = 0.5;
  int failed_region_ttl = 200;
  int escape_moves = 2;  // forward moves that count as a successful escape

  void validate() const;
};

struct SubgoalSet {
  std::vector<Vec2> goals;
  std::set<CellIndex> visited_regions;
  std::set<CellIndex> failed_regions;
};

// Planner distance from a goal to the active candidate; nullopt when the
// planner has no path yet, in which case Euclidean distance is used.
using PlannerDistance = std::function<std::optional<double>(Vec2 goal)>;

// argmin over goals of plannerDistance + lambda_v [visited] + lambda_f [failed];
// ties go to the lowest index. Throws NoSubgoalError on an empty set.
std::size_t select_subgoal(const SubgoalSet& goals, Vec2 active_mu, const PlannerDistance& planner,
                           double cell_size, const GuardConfig& cfg);

// Failed regions with expiry.
class RegionMemory {
 public:
  void add_disc(Vec2 center, double radius, double cell_size, int expires_at);
  void add_cell(CellIndex c, int expires_at);
  bool contains(CellIndex c, int t) const;
  std::set<CellIndex> active(int t) const;
  void clear() { cells_.clear(); }
  bool empty() const { return cells_.empty(); }

 private:
  std::map<CellIndex, int> cells_;  // cell -> expiry step
};

struct GuardState {
  int spin_budget = 0;
  int stall_counter = 0;
  std::optional<Pose> last_pose;
  double delta_p = 0.0;
  double delta_theta = 0.0;
  // Semantic-stall tracker: best pursuit-progress value seen for the
  // tracked candidate and the steps since it last improved by eps_d.
  std::optional<int> progress_candidate;
  double progress_best = std::numeric_limits<double>::infinity();
  int progress_flat_steps = 0;
};

// Records the pose reached after the previous action: deltas, spin budget
// and the physical stall counter.
void update_guard(GuardState& guard, const Pose& pose, const GuardConfig& cfg);

struct FilteredAction {
  Action action = Action::Forward;
  std::optional<Action> filtered_from;
  bool resample = false;  // planner asked for a subgoal with translation room
};

// Once the spin budget exceeds B_spin, pure turns become a forward move
// when forward is clear; otherwise the turn stands and a resample is
// requested.
FilteredAction anti_spin_filter(Action proposed, const GuardState& guard, const GuardConfig& cfg,
                                bool forward_clear = true);

struct StallInputs {
  double distance_to_active = std::numeric_limits<double>::infinity();
  bool viable_alternative = false;
  double r_v = 0.8;
  // Pursuit progress metric this step (lower is better); nullopt outside
  // pursuit.
  std::optional<double> progress;
};

// Physical stall (stall_counter >= K_s) in any state, semantic stall
// (progress flat by eps_d over K_s steps) in committed states. A firing
// verdict resets both trackers.
StallVerdict update_stall(GuardState& guard, const ExecutiveContext& ctx, const StallInputs& in,
                          const GuardConfig& cfg);

bool verified_stop(const Candidate& c, const ExecutiveContext& ctx, const FseConfig& cfg);

struct InterceptResult {
  Action action = Action::Forward;
  bool intercepted = false;
};

// Stop survives only in Success with the gate open; otherwise a Left turn
// resets heading.
InterceptResult intercept_stop(Action proposed, ExecutiveState state, bool gate_ok);

// Reachable headings: start heading plus multiples of the turn angle.
struct HeadingFan {
  std::vector<double> headings;

  static HeadingFan around(double heading, double turn_angle);
  std::size_t nearest(double angle) const;
};

// Waypoint following: Forward when the heading is within tolerance of the
// bearing and forward is clear; otherwise rotate (shortest direction)
// toward the closest clear heading.
Action steer_toward(const Pose& pose, Vec2 waypoint, std::span<const bool> heading_clear,
                    const HeadingFan& fan, double tolerance);

struct RecoveryProgress {
  int steps = 0;
  int moves = 0;
  int steps_without_progress = 0;
};

struct RecoveryStep {
  Action action = Action::Left;
  bool done = false;
  bool exhausted = false;  // budget spent without escaping
};

// One escape step: turn toward the heading with the most free space, then
// drive. Finishes after escape_moves forward moves or B_r steps.
RecoveryStep recovery_step(RecoveryProgress& progress, const Pose& pose, double last_delta_p,
                           std::span<const double> clearance, const HeadingFan& fan,
                           std::span<const bool> heading_clear, const GuardConfig& cfg);

}  // namespace consistnav
