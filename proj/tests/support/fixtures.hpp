#pragma once

#include <string>
#include <vector>

#include "consistnav/config.hpp"
#include "consistnav/episode.hpp"
#include "consistnav/scenario.hpp"

namespace consistnav::testkit {

// Builds a scenario from rows of text, first row on top (highest y).
// '#' wall, '.' free, 'T' target, 'D' distractor, 'S' start (heading 0).
Scenario from_ascii(const std::vector<std::string>& rows, double cell_size = 0.1, std::string id = "ascii");

// Detector with every noise channel off and certain detection.
SimConfig clean_config();

struct Fixture {
  std::string name;
  Scenario scenario;
  SimConfig config;
  Outcome expected = Outcome::Timeout;
};

// Target behind a closed wall.
Fixture sealed_room();
// Closed room with the target tucked into an L-shaped alcove that no ray
// reaches; the alcove mouth is below the minimum frontier size.
Fixture tiny_closed_map();
// Target in plain view of a detector that never fires.
Fixture visible_never_committed();
// Clean pursuit of a true target; detections stop from the first step the
// executive commits to it.
Fixture blackout(std::uint64_t seed);

std::vector<Fixture> taxonomy_fixtures(std::uint64_t seed);

}  // namespace consistnav::testkit
