#include "consistnav/action_control.hpp"

#include <algorithm>
#include <cmath>

#include "consistnav/errors.hpp"

namespace consistnav {

void GuardConfig::validate() const {
  if (!(delta_move > 0) || spin_cap <= 0 || !(progress_margin > 0) || stall_steps <= 0 || recovery_budget <= 0 ||
      !(lambda_visited > 0) || !(lambda_failed > 0) || !(heading_tolerance > 0) || !(failed_region_radius > 0) ||
      failed_region_ttl <= 0 || escape_moves <= 0) {
    throw InvalidArgument("guard: all parameters must be positive");
  }
}

std::size_t select_subgoal(const SubgoalSet& goals, Vec2 active_mu, const PlannerDistance& planner,
                           double cell_size, const GuardConfig& cfg) {
  if (goals.goals.empty()) throw NoSubgoalError("no subgoal candidates");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < goals.goals.size(); ++i) {
    const Vec2 g = goals.goals[i];
    std::optional<double> d = planner ? planner(g) : std::nullopt;
    double cost = d ? *d : euclidean_distance(g, active_mu);
    const CellIndex cell{floor_cell(g.x, cell_size), floor_cell(g.y, cell_size)};
    if (goals.visited_regions.contains(cell)) cost += cfg.lambda_visited;
    if (goals.failed_regions.contains(cell)) cost += cfg.lambda_failed;
    if (cost < best_cost) {
      best_cost = cost;
      best = i;
    }
  }
  return best;
}

void RegionMemory::add_disc(Vec2 center, double radius, double cell_size, int expires_at) {
  const int x0 = floor_cell(center.x - radius, cell_size);
  const int x1 = floor_cell(center.x + radius, cell_size);
  const int y0 = floor_cell(center.y - radius, cell_size);
  const int y1 = floor_cell(center.y + radius, cell_size);
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) {
      if (euclidean_distance(cell_center({x, y}, cell_size), center) <= radius) add_cell({x, y}, expires_at);
    }
  }
}

void RegionMemory::add_cell(CellIndex c, int expires_at) {
  auto [it, inserted] = cells_.try_emplace(c, expires_at);
  if (!inserted) it->second = std::max(it->second, expires_at);
}

bool RegionMemory::contains(CellIndex c, int t) const {
  auto it = cells_.find(c);
  return it != cells_.end() && it->second > t;
}

std::set<CellIndex> RegionMemory::active(int t) const {
  std::set<CellIndex> out;
  for (const auto& [c, expiry] : cells_) {
    if (expiry > t) out.insert(c);
  }
  return out;
}

void update_guard(GuardState& guard, const Pose& pose, const GuardConfig& cfg) {
  if (guard.last_pose) {
    guard.delta_p = euclidean_distance(pose.position(), guard.last_pose->position());
    guard.delta_theta = std::abs(angle_diff(pose.heading(), guard.last_pose->heading()));
  } else {
    guard.delta_p = 0.0;
    guard.delta_theta = 0.0;
  }
  if (guard.last_pose) {
    if (guard.delta_p >= cfg.delta_move) {
      guard.spin_budget = 0;
      guard.stall_counter = 0;
    } else {
      if (guard.delta_theta > 0) ++guard.spin_budget;
      ++guard.stall_counter;
    }
  }
  guard.last_pose = pose;
}

FilteredAction anti_spin_filter(Action proposed, const GuardState& guard, const GuardConfig& cfg,
                                bool forward_clear) {
  FilteredAction out{proposed, std::nullopt, false};
  const bool turn = proposed == Action::Left || proposed == Action::Right;
  if (!turn || guard.spin_budget < cfg.spin_cap) return out;
  if (forward_clear) {
    out.action = Action::Forward;
    out.filtered_from = proposed;
  } else {
    out.resample = true;
  }
  return out;
}

StallVerdict update_stall(GuardState& guard, const ExecutiveContext& ctx, const StallInputs& in,
                          const GuardConfig& cfg) {
  bool semantic = false;
  if (is_commit_state(ctx.state) && in.progress && ctx.active_candidate) {
    if (guard.progress_candidate != ctx.active_candidate) {
      guard.progress_candidate = ctx.active_candidate;
      guard.progress_best = *in.progress;
      guard.progress_flat_steps = 0;
    } else if (*in.progress < guard.progress_best - cfg.progress_margin) {
      guard.progress_best = *in.progress;
      guard.progress_flat_steps = 0;
    } else {
      ++guard.progress_flat_steps;
    }
    semantic = guard.progress_flat_steps >= cfg.stall_steps;
  } else {
    guard.progress_candidate.reset();
    guard.progress_best = std::numeric_limits<double>::infinity();
    guard.progress_flat_steps = 0;
  }

  if (guard.stall_counter < cfg.stall_steps && !semantic) return StallVerdict::None;

  guard.stall_counter = 0;
  guard.progress_candidate.reset();
  guard.progress_best = std::numeric_limits<double>::infinity();
  guard.progress_flat_steps = 0;
  if (in.distance_to_active <= in.r_v) return StallVerdict::TriggerVerify;
  if (in.viable_alternative) return StallVerdict::TriggerFailover;
  return StallVerdict::TriggerRecovery;
}

bool verified_stop(const Candidate& c, const ExecutiveContext& ctx, const FseConfig& cfg) {
  return check_verified_gate(c, ctx, cfg);
}

InterceptResult intercept_stop(Action proposed, ExecutiveState state, bool gate_ok) {
  if (proposed != Action::Stop) return {proposed, false};
  if (state == ExecutiveState::Success && gate_ok) return {Action::Stop, false};
  return {Action::Left, true};
}

HeadingFan HeadingFan::around(double heading, double turn_angle) {
  if (!(turn_angle > 0)) throw InvalidArgument("turn angle must be positive");
  const int n = std::max(1, static_cast<int>(std::lround(kTwoPi / turn_angle)));
  HeadingFan fan;
  fan.headings.reserve(n);
  for (int k = 0; k < n; ++k) fan.headings.push_back(normalize_heading(heading + k * turn_angle));
  return fan;
}

std::size_t HeadingFan::nearest(double angle) const {
  std::size_t best = 0;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < headings.size(); ++i) {
    const double err = std::abs(angle_diff(headings[i], angle));
    if (err < best_err - 1e-12) {
      best_err = err;
      best = i;
    }
  }
  return best;
}

namespace {

Action rotate_toward(double target, double heading) {
  return angle_diff(target, heading) >= 0 ? Action::Left : Action::Right;
}

}  // namespace

Action steer_toward(const Pose& pose, Vec2 waypoint, std::span<const bool> heading_clear, const HeadingFan& fan,
                    double tolerance) {
  const Vec2 delta = waypoint - pose.position();
  const double bearing = std::atan2(delta.y, delta.x);
  const std::size_t cur = fan.nearest(pose.heading());
  const bool cur_clear = cur < heading_clear.size() && heading_clear[cur];
  if (std::abs(angle_diff(bearing, pose.heading())) <= tolerance && cur_clear) return Action::Forward;

  std::optional<std::size_t> target;
  double best_err = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < fan.headings.size() && i < heading_clear.size(); ++i) {
    if (!heading_clear[i]) continue;
    const double err = std::abs(angle_diff(fan.headings[i], bearing));
    if (err < best_err - 1e-12) {
      best_err = err;
      target = i;
    }
  }
  if (!target) return rotate_toward(bearing, pose.heading());
  if (*target == cur) return Action::Forward;
  return rotate_toward(fan.headings[*target], pose.heading());
}

RecoveryStep recovery_step(RecoveryProgress& progress, const Pose& pose, double last_delta_p,
                           std::span<const double> clearance, const HeadingFan& fan,
                           std::span<const bool> heading_clear, const GuardConfig& cfg) {
  RecoveryStep out;
  if (progress.steps > 0) {
    if (last_delta_p >= cfg.delta_move) {
      ++progress.moves;
      progress.steps_without_progress = 0;
    } else {
      ++progress.steps_without_progress;
    }
  }
  if (progress.moves >= cfg.escape_moves) {
    out.done = true;
    return out;
  }
  if (progress.steps >= cfg.recovery_budget) {
    out.done = true;
    out.exhausted = true;
    return out;
  }
  ++progress.steps;

  std::size_t best = 0;
  double best_clear = -1.0;
  for (std::size_t i = 0; i < fan.headings.size() && i < clearance.size(); ++i) {
    if (clearance[i] > best_clear + 1e-9) {
      best_clear = clearance[i];
      best = i;
    }
  }
  const std::size_t cur = fan.nearest(pose.heading());
  const bool cur_clear = cur < heading_clear.size() && heading_clear[cur];
  if (cur_clear && (cur == best || clearance[cur] >= best_clear - 1e-9)) {
    out.action = Action::Forward;
  } else {
    out.action = rotate_toward(fan.headings[best], pose.heading());
  }
  return out;
}

}  // namespace consistnav
