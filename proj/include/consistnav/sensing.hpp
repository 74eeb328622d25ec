#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "consistnav/geometry.hpp"
#include "consistnav/grid.hpp"
#include "consistnav/scenario.hpp"

namespace consistnav {

struct DetectorConfig {
  double sensing_range = 5.0;
  double fov = 79.0 * std::numbers::pi / 180.0;
  double p_detect = 0.8;
  double p_confuse = 0.05;
  double p_hallucinate = 0.02;
  double conf_true_mean = 0.60, conf_true_sd = 0.15;
  double conf_false_mean = 0.45, conf_false_sd = 0.15;
  double itm_true_mean = 0.30, itm_true_sd = 0.10;
  double itm_false_mean = 0.08, itm_false_sd = 0.05;
  double pos_noise_sd = 0.1;
  // Steps [blackout_from, blackout_until) produce no detections; -1 disables
  // (blackout_until = -1 means "until the end").
  int blackout_from = -1;
  int blackout_until = -1;

  void validate() const;
  bool blacked_out(int step) const {
    return blackout_from >= 0 && step >= blackout_from && (blackout_until < 0 || step < blackout_until);
  }
};

struct EpisodeConfig {
  int max_steps = 500;
  double success_radius = 0.2;
  double forward_step = 0.25;
  double turn_angle = 30.0 * std::numbers::pi / 180.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Visibility {
  std::vector<std::size_t> objects;  // indices into Scenario::objects
};

bool in_view_cone(const Pose& pose, Vec2 p, double range, double fov);

// Range + field-of-view + unobstructed grid ray. Touching an Occupied
// corner does not block.
bool line_of_sight(const OccupancyGrid& grid, Vec2 from, Vec2 to);

Visibility raycast_visible(const Scenario& world, const Pose& pose, const DetectorConfig& cfg);

bool cell_visible(const OccupancyGrid& grid, const Pose& pose, CellIndex c, const DetectorConfig& cfg);

// Every Free cell whose centre is in the view cone with a clear ray.
std::vector<CellIndex> visible_free_cells(const OccupancyGrid& grid, const Pose& pose, const DetectorConfig& cfg);

// Synthetic detector. Visible targets: target-labelled detection with
// p_detect. Visible distractors: target-labelled false detection with
// p_confuse, otherwise a non-target detection with p_detect. Plus an
// occasional hallucinated target detection on a visible free cell, drawn
// by rejection sampling so only that rare branch pays for the search.
std::vector<SemanticObservation> synth_detect(const Scenario& world, const Visibility& visible,
                                              const Pose& pose, const DetectorConfig& cfg, int step,
                                              std::mt19937_64& rng);

// Per-step engine derived from (episode seed, step) so the random draws of
// a step do not depend on what earlier steps consumed.
std::mt19937_64 step_rng(std::uint64_t episode_seed, int step);
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

struct MotionResult {
  Pose pose;
  bool collided = false;
};

// Forward advances forward_step unless a traversed cell is Occupied or off
// the grid; Left/Right rotate by +/- turn_angle. Stop is rejected.
MotionResult step_dynamics(const OccupancyGrid& world, const Pose& pose, Action action,
                           const EpisodeConfig& cfg);

// Casts view-cone rays; cells hit become Free/Occupied per ground truth.
// Returns the number of cells that changed from Unknown.
std::size_t update_discovered_map(OccupancyGrid& discovered, const OccupancyGrid& world,
                                  const Pose& pose, double sensing_range, double fov);

}  // namespace consistnav
