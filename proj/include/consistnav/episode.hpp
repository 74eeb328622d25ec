#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "consistnav/config.hpp"
#include "consistnav/evaluation.hpp"
#include "consistnav/scenario.hpp"
#include "consistnav/trajectory.hpp"
#include "consistnav/variant.hpp"

namespace consistnav {

struct EpisodeRun {
  EpisodeRecord record;
  std::vector<StepLog> steps;
};

// Full agent loop to Stop, frontier exhaustion or max_steps. A pure
// function of its arguments. Infeasible scenarios are classified before
// any step is taken.
EpisodeRun run_episode(const Scenario& scenario, Variant variant, const SimConfig& cfg,
                       std::uint64_t seed, const std::string& episode_id = {}, int episode_index = 0);

}  // namespace consistnav
