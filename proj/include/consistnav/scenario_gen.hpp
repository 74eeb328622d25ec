#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "consistnav/scenario.hpp"

namespace consistnav {

enum class Preset { Office, Maze, Apartment };

std::string_view to_string(Preset p);
std::optional<Preset> parse_preset(std::string_view s);

// Seeded, reproducible scenario sets. Every scenario has one target and
// 2-6 distractors in Free cells, and a single connected free component.
std::vector<Scenario> generate_scenarios(Preset preset, int count, std::uint64_t seed);

}  // namespace consistnav
