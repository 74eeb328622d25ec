#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "consistnav/fse_controller.hpp"
#include "consistnav/grid.hpp"
#include "consistnav/scenario.hpp"
#include "consistnav/trajectory.hpp"
#include "consistnav/variant.hpp"

namespace consistnav {

enum class Outcome { Success, Infeasible, UnstableCommitment, FrontierExhaustion, Timeout, MissingTarget };

inline constexpr std::array<Outcome, 6> kAllOutcomes = {
    Outcome::Success,  Outcome::Infeasible, Outcome::UnstableCommitment, Outcome::FrontierExhaustion,
    Outcome::Timeout,  Outcome::MissingTarget};

std::string_view to_string(Outcome o);
std::optional<Outcome> parse_outcome(std::string_view s);

enum class Termination { Stop, NoSubgoal, MaxSteps, Infeasible };
std::string_view to_string(Termination t);
std::optional<Termination> parse_termination(std::string_view s);

struct EpisodeRecord {
  std::string episode_id;
  std::string scenario_id;
  Variant variant = Variant::Baseline;
  int episode_index = 0;
  std::uint64_t seed = 0;
  Outcome outcome = Outcome::Timeout;
  Termination termination = Termination::MaxSteps;
  int steps = 0;
  double path_length = 0.0;
  double shortest_path = 0.0;  // 0 when infeasible
  double spl_term = 0.0;
  std::optional<int> stop_step;
  std::optional<double> stop_distance;  // to the nearest true target
  std::optional<ExecutiveState> final_state;
  std::string trajectory_path;

  bool success() const { return outcome == Outcome::Success; }
  bool false_stop() const { return stop_step.has_value() && outcome != Outcome::Success; }
};

nlohmann::json to_json(const EpisodeRecord& r);
EpisodeRecord record_from_json(const nlohmann::json& j);

// Uniform-cost search on the ground-truth grid from the start cell to the
// nearest cell whose centre lies within success_radius of a target. Meters,
// floored at one cell length; nullopt when no target is reachable.
std::optional<double> shortest_path_oracle(const OccupancyGrid& truth, Vec2 start,
                                           std::span<const Vec2> targets, double success_radius);

double spl_term(bool success, double path_length, double shortest_path);

struct Metrics {
  double sr = 0.0;
  double spl = 0.0;
};

// Throws InvalidArgument on an empty record set.
Metrics compute_metrics(std::span<const EpisodeRecord> records);

inline constexpr double kTargetProximity = 0.75;

struct OutcomeContext {
  bool feasible = true;
  Termination termination = Termination::MaxSteps;
  double success_radius = 0.2;
  double target_proximity = kTargetProximity;
};

// Precedence: Infeasible, Success, UnstableCommitment, MissingTarget,
// FrontierExhaustion, Timeout. Works purely from the logged steps.
Outcome classify_outcome(const OutcomeContext& ctx, std::span<const StepLog> trajectory,
                         const Scenario& world);

struct VariantAggregate {
  Variant variant = Variant::Baseline;
  int episodes = 0;
  Metrics metrics;
  std::array<int, 6> counts{};
  std::array<double, 6> percentages{};
  int false_stops = 0;
  double false_stop_rate = 0.0;
};

// Rows in Baseline, PCM, PCM_FSEC, Full order; variants without records
// are omitted.
std::vector<VariantAggregate> aggregate_report(std::span<const EpisodeRecord> records);

nlohmann::json to_json(const std::vector<VariantAggregate>& rows);
std::vector<VariantAggregate> aggregates_from_json(const nlohmann::json& j);
std::string render_markdown(const std::vector<VariantAggregate>& rows);
// Aggregate block followed by the long-format (variant, category, percentage) block.
std::string render_csv(const std::vector<VariantAggregate>& rows);
std::string records_csv(std::span<const EpisodeRecord> records);

}  // namespace consistnav
