#include "consistnav/sensing.hpp"

#include <algorithm>
#include <cmath>

#include "consistnav/errors.hpp"

namespace consistnav {

void DetectorConfig::validate() const {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!(sensing_range > 0) || !(fov > 0) || fov > kTwoPi) throw InvalidArgument("detector: bad range or fov");
  if (!prob(p_detect) || !prob(p_confuse) || !prob(p_hallucinate)) {
    throw InvalidArgument("detector: probabilities must lie in [0,1]");
  }
  for (double sd : {conf_true_sd, conf_false_sd, itm_true_sd, itm_false_sd, pos_noise_sd}) {
    if (!(sd >= 0)) throw InvalidArgument("detector: standard deviations must be non-negative");
  }
}

void EpisodeConfig::validate() const {
  if (max_steps <= 0) throw InvalidArgument("episode: max_steps must be positive");
  if (!(success_radius > 0)) throw InvalidArgument("episode: success_radius must be positive");
  if (!(forward_step > 0) || !(turn_angle > 0)) throw InvalidArgument("episode: motion steps must be positive");
}

bool in_view_cone(const Pose& pose, Vec2 p, double range, double fov) {
  const Vec2 d = p - pose.position();
  const double dist = d.norm();
  if (dist > range) return false;
  if (dist < 1e-9) return true;
  return std::abs(angle_diff(std::atan2(d.y, d.x), pose.heading())) <= fov / 2 + 1e-12;
}

bool line_of_sight(const OccupancyGrid& grid, Vec2 from, Vec2 to) {
  return for_each_segment_cell(from, to, grid.cell_size(), [&](CellIndex c) {
    return grid.in_bounds(c) && grid.raw(grid.index(c)) != Cell::Occupied;
  });
}

Visibility raycast_visible(const Scenario& world, const Pose& pose, const DetectorConfig& cfg) {
  Visibility v;
  for (std::size_t i = 0; i < world.objects.size(); ++i) {
    const Vec2 p = world.objects[i].position;
    if (in_view_cone(pose, p, cfg.sensing_range, cfg.fov) && line_of_sight(world.grid, pose.position(), p)) {
      v.objects.push_back(i);
    }
  }
  return v;
}

bool cell_visible(const OccupancyGrid& grid, const Pose& pose, CellIndex c, const DetectorConfig& cfg) {
  if (!grid.in_bounds(c) || grid.raw(grid.index(c)) != Cell::Free) return false;
  const Vec2 p = cell_center(c, grid.cell_size());
  return in_view_cone(pose, p, cfg.sensing_range, cfg.fov) && line_of_sight(grid, pose.position(), p);
}

std::vector<CellIndex> visible_free_cells(const OccupancyGrid& grid, const Pose& pose, const DetectorConfig& cfg) {
  std::vector<CellIndex> out;
  const double cs = grid.cell_size();
  const Vec2 o = pose.position();
  const int x0 = std::max(0, floor_cell(o.x - cfg.sensing_range, cs));
  const int x1 = std::min(grid.width() - 1, floor_cell(o.x + cfg.sensing_range, cs));
  const int y0 = std::max(0, floor_cell(o.y - cfg.sensing_range, cs));
  const int y1 = std::min(grid.height() - 1, floor_cell(o.y + cfg.sensing_range, cs));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (cell_visible(grid, pose, {x, y}, cfg)) out.push_back({x, y});
    }
  }
  return out;
}

namespace {

double clipped_normal(std::mt19937_64& rng, double mean, double sd) {
  if (sd <= 0) return std::clamp(mean, 0.0, 1.0);
  std::normal_distribution<double> dist(mean, sd);
  return std::clamp(dist(rng), 0.0, 1.0);
}

Vec2 noisy(std::mt19937_64& rng, Vec2 p, double sd) {
  if (sd <= 0) return p;
  std::normal_distribution<double> dist(0.0, sd);
  const double dx = dist(rng);
  const double dy = dist(rng);
  return {p.x + dx, p.y + dy};
}

constexpr int kHallucinationAttempts = 64;

}  // namespace

std::vector<SemanticObservation> synth_detect(const Scenario& world, const Visibility& visible,
                                              const Pose& pose, const DetectorConfig& cfg, int step,
                                              std::mt19937_64& rng) {
  std::vector<SemanticObservation> out;
  if (cfg.blacked_out(step)) return out;
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  for (std::size_t idx : visible.objects) {
    const ObjectInstance& obj = world.objects[idx];
    const double u = u01(rng);
    if (obj.is_target) {
      if (u >= cfg.p_detect) continue;
      SemanticObservation o;
      o.world_pos = noisy(rng, obj.position, cfg.pos_noise_sd);
      o.confidence = clipped_normal(rng, cfg.conf_true_mean, cfg.conf_true_sd);
      o.itm_score = clipped_normal(rng, cfg.itm_true_mean, cfg.itm_true_sd);
      o.is_target = true;
      o.step = step;
      out.push_back(o);
    } else if (u < cfg.p_confuse) {
      SemanticObservation o;
      o.world_pos = noisy(rng, obj.position, cfg.pos_noise_sd);
      o.confidence = clipped_normal(rng, cfg.conf_false_mean, cfg.conf_false_sd);
      o.itm_score = clipped_normal(rng, cfg.itm_false_mean, cfg.itm_false_sd);
      o.is_target = true;
      o.step = step;
      out.push_back(o);
    } else if (u < cfg.p_confuse + (1.0 - cfg.p_confuse) * cfg.p_detect) {
      SemanticObservation o;
      o.world_pos = noisy(rng, obj.position, cfg.pos_noise_sd);
      o.confidence = clipped_normal(rng, cfg.conf_true_mean, cfg.conf_true_sd);
      o.itm_score = clipped_normal(rng, cfg.itm_false_mean, cfg.itm_false_sd);
      o.is_target = false;
      o.step = step;
      out.push_back(o);
    }
  }

  if (cfg.p_hallucinate > 0 && u01(rng) < cfg.p_hallucinate) {
    const OccupancyGrid& grid = world.grid;
    const double cs = grid.cell_size();
    const Vec2 o = pose.position();
    const int x0 = std::max(0, floor_cell(o.x - cfg.sensing_range, cs));
    const int x1 = std::min(grid.width() - 1, floor_cell(o.x + cfg.sensing_range, cs));
    const int y0 = std::max(0, floor_cell(o.y - cfg.sensing_range, cs));
    const int y1 = std::min(grid.height() - 1, floor_cell(o.y + cfg.sensing_range, cs));
    std::uniform_int_distribution<int> ux(x0, x1);
    std::uniform_int_distribution<int> uy(y0, y1);
    for (int attempt = 0; attempt < kHallucinationAttempts; ++attempt) {
      const CellIndex c{ux(rng), uy(rng)};
      if (!cell_visible(grid, pose, c, cfg)) continue;
      SemanticObservation h;
      h.world_pos = cell_center(c, cs);
      h.confidence = clipped_normal(rng, cfg.conf_false_mean, cfg.conf_false_sd);
      h.itm_score = clipped_normal(rng, cfg.itm_false_mean, cfg.itm_false_sd);
      h.is_target = true;
      h.step = step;
      out.push_back(h);
      break;
    }
  }
  return out;
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t x = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

std::mt19937_64 step_rng(std::uint64_t episode_seed, int step) {
  return std::mt19937_64(mix_seed(episode_seed, static_cast<std::uint64_t>(step)));
}

MotionResult step_dynamics(const OccupancyGrid& world, const Pose& pose, Action action, const EpisodeConfig& cfg) {
  switch (action) {
    case Action::Forward: {
      const Vec2 next = pose.position() + heading_vector(pose.heading()) * cfg.forward_step;
      if (!world.contains(next) || !segment_clear(world, pose.position(), next)) return {pose, true};
      return {Pose(next, pose.heading()), false};
    }
    case Action::Left: return {Pose(pose.position(), pose.heading() + cfg.turn_angle), false};
    case Action::Right: return {Pose(pose.position(), pose.heading() - cfg.turn_angle), false};
    case Action::Stop: break;
  }
  throw InvalidArgument("step_dynamics does not accept Stop");
}

std::size_t update_discovered_map(OccupancyGrid& discovered, const OccupancyGrid& world, const Pose& pose,
                                  double sensing_range, double fov) {
  if (discovered.width() != world.width() || discovered.height() != world.height()) {
    throw InvalidArgument("discovered map and world differ in size");
  }
  std::size_t changed = 0;
  auto reveal = [&](CellIndex c) {
    const std::size_t i = discovered.index(c);
    if (discovered.raw(i) == Cell::Unknown) {
      discovered.set_raw(i, world.raw(i));
      ++changed;
    }
  };
  const Vec2 o = pose.position();
  const double cs = world.cell_size();
  const CellIndex here{floor_cell(o.x, cs), floor_cell(o.y, cs)};
  if (world.in_bounds(here)) reveal(here);

  const double spacing = cs / (2.0 * sensing_range);
  const int rays = std::max(2, static_cast<int>(std::ceil(fov / spacing)) + 1);
  for (int k = 0; k < rays; ++k) {
    const double a = pose.heading() - fov / 2 + fov * k / (rays - 1);
    const Vec2 end = o + heading_vector(a) * sensing_range;
    for_each_segment_cell(o, end, cs, [&](CellIndex c) {
      if (!world.in_bounds(c)) return false;
      if (euclidean_distance(cell_center(c, cs), o) > sensing_range + cs) return false;
      reveal(c);
      return world.raw(world.index(c)) != Cell::Occupied;
    });
  }
  return changed;
}

}  // namespace consistnav
