#include "consistnav/episode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "consistnav/action_control.hpp"
#include "consistnav/errors.hpp"
#include "consistnav/planner.hpp"
#include "consistnav/sensing.hpp"

namespace consistnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kReplanInterval = 10;
constexpr int kFrontierInterval = 12;
constexpr int kLookahead = 8;
constexpr int kProgressWindow = 12;
constexpr double kFrontierReached = 0.3;
constexpr double kNearFrontier = 0.5;
constexpr int kFrontierVisits = 2;
constexpr double kReachTolerance = 0.25;
constexpr double kCloseRange = 0.6;
constexpr double kDockImprovement = 0.02;
constexpr double kKeepHeadingSlack = 0.03;
constexpr double kFaceTolerance = 20.0 * std::numbers::pi / 180.0;
constexpr double kAbsenceIgnore = 0.15;
constexpr int kClearanceSteps = 8;
constexpr std::size_t kMaxHeadings = 64;

struct PlannedPath {
  bool active = false;
  std::vector<CellIndex> cells;
  std::vector<double> cum;  // cost (cells) from the start of the path
  CellIndex goal;
  Vec2 point;               // exact point the path serves
  int planned_at = -1;
  std::size_t progress = 0;
  double gap = 0.0;         // meters from the goal cell centre to `point`
  std::optional<int> id;

  double remaining(double cs) const {
    if (!active || cells.empty()) return kInf;
    return (cum.back() - cum[std::min(progress, cum.size() - 1)]) * cs + gap;
  }
};

int chebyshev(CellIndex a, CellIndex b) { return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y)); }

Action rotate_toward(double target, double heading) {
  return angle_diff(target, heading) >= 0 ? Action::Left : Action::Right;
}

struct Decision {
  Action action = Action::Left;
  bool exhausted = false;  // nothing left to explore or pursue
};

class EpisodeLoop {
 public:
  EpisodeLoop(const Scenario& sc, Variant variant, const SimConfig& cfg, std::uint64_t seed)
      : sc_(sc),
        variant_(variant),
        feat_(features(variant)),
        cfg_(cfg),
        seed_(seed),
        map_(sc.grid.width(), sc.grid.height(), sc.grid.cell_size(), Cell::Unknown),
        pose_(sc.start),
        memory_(cfg.memory) {}

  EpisodeRun run(const std::string& episode_id, int episode_index);

 private:
  double cs() const { return map_.cell_size(); }
  CellIndex agent_cell() const { return {floor_cell(pose_.position().x, cs()), floor_cell(pose_.position().y, cs())}; }
  double dist_to(Vec2 p) const { return euclidean_distance(pose_.position(), p); }

  bool step_clear(Vec2 from, double heading) const {
    const Vec2 to = from + heading_vector(heading) * cfg_.episode.forward_step;
    return map_.contains(to) && segment_clear(map_, from, to);
  }

  void compute_headings();
  std::span<const bool> clear_span() const { return {heading_clear_.data(), fan_.headings.size()}; }
  std::vector<double> clearance() const;

  void sense(StepLog& log);
  bool absence_visible(Vec2 mu) const;

  void ensure_field();
  bool plan(PlannedPath& p, CellIndex goal, Vec2 point, std::optional<int> id);
  void update_progress(PlannedPath& p);
  bool path_valid(PlannedPath& p);
  Action follow(PlannedPath& p);

  std::optional<Action> explore(std::optional<Vec2> condition);
  void note_frontier_reached(CellIndex goal);
  std::pair<std::size_t, double> best_closing(Vec2 mu) const;
  Action turn_or_forward(std::size_t k) const;
  Action face(Vec2 mu);
  Action pursue(Vec2 mu, std::optional<int> id, bool conditioned);
  Action dock(Vec2 mu, std::optional<int> id);
  bool docked(Vec2 mu) const;
  std::optional<double> pursuit_progress(int id, Vec2 mu) const;
  bool update_saturation(std::optional<double> progress);
  bool cooldown_pending() const;

  Decision baseline_step(StepLog& log, const std::vector<SemanticObservation>& obs);
  Decision pcm_step(StepLog& log);
  Decision fse_step(StepLog& log);

  const Scenario& sc_;
  Variant variant_;
  VariantFeatures feat_;
  const SimConfig& cfg_;
  std::uint64_t seed_;

  OccupancyGrid map_;
  Pose pose_;
  int t_ = 0;

  CandidateMemory memory_;
  ExecutiveContext ctx_;
  GuardState guard_;
  RegionMemory failed_;
  std::set<CellIndex> visited_;
  std::set<CellIndex> spent_;
  std::vector<std::pair<CellIndex, int>> reached_;
  int look_turns_ = 0;
  RecoveryProgress recovery_;
  std::optional<Vec2> baseline_target_;
  std::optional<int> pursued_;
  std::optional<ActiveObservation> active_obs_;

  HeadingFan fan_;
  std::array<bool, kMaxHeadings> heading_clear_{};

  std::vector<double> field_;
  int field_t_ = -1;
  PlannedPath target_;
  PlannedPath frontier_;
  bool force_reselect_ = false;
  bool jitter_ = false;

  std::optional<int> sat_id_;
  double sat_best_ = kInf;
  int sat_steps_ = 0;
};

void EpisodeLoop::compute_headings() {
  fan_ = HeadingFan::around(pose_.heading(), cfg_.episode.turn_angle);
  if (fan_.headings.size() > kMaxHeadings) throw InvalidArgument("turn angle too small");
  for (std::size_t k = 0; k < fan_.headings.size(); ++k) heading_clear_[k] = step_clear(pose_.position(), fan_.headings[k]);
}

std::vector<double> EpisodeLoop::clearance() const {
  std::vector<double> out(fan_.headings.size(), 0.0);
  const double step = cfg_.episode.forward_step;
  for (std::size_t k = 0; k < fan_.headings.size(); ++k) {
    Vec2 p = pose_.position();
    for (int i = 0; i < kClearanceSteps && step_clear(p, fan_.headings[k]); ++i) {
      p = p + heading_vector(fan_.headings[k]) * step;
      out[k] += step;
    }
  }
  return out;
}

bool EpisodeLoop::absence_visible(Vec2 mu) const {
  const auto& det = cfg_.detector;
  const auto& ab = cfg_.absence;
  const double fov = det.fov - 2 * ab.fov_margin;
  if (fov <= 0 || !in_view_cone(pose_, mu, det.sensing_range * ab.range_fraction, fov)) return false;
  return for_each_segment_cell(pose_.position(), mu, cs(), [&](CellIndex c) {
    if (euclidean_distance(cell_center(c, cs()), mu) <= kAbsenceIgnore) return true;
    return map_.is_free(c);
  });
}

void EpisodeLoop::sense(StepLog& log) {
  const auto& det = cfg_.detector;
  update_discovered_map(map_, sc_.grid, pose_, det.sensing_range, det.fov);
  const Visibility vis = raycast_visible(sc_, pose_, det);
  log.target_visible = std::any_of(vis.objects.begin(), vis.objects.end(),
                                   [&](std::size_t i) { return sc_.objects[i].is_target; });
  auto rng = step_rng(seed_, t_);
  const auto obs = synth_detect(sc_, vis, pose_, det, t_, rng);
  for (const auto& o : obs) {
    log.observations.push_back({o.world_pos.x, o.world_pos.y, o.confidence, o.itm_score, o.is_target});
  }
  active_obs_.reset();

  if (!feat_.memory) {
    if (variant_ == Variant::Baseline) {
      const SemanticObservation* best = nullptr;
      for (const auto& o : obs) {
        if (o.is_target && o.confidence >= cfg_.baseline.pursue_confidence && (!best || o.confidence > best->confidence)) {
          best = &o;
        }
      }
      if (best) baseline_target_ = best->world_pos;
    }
    return;
  }

  std::set<int> touched;
  for (const auto& o : obs) {
    const int id = memory_.observe(o, t_);
    touched.insert(id);
    if (ctx_.active_candidate == id && !active_obs_) active_obs_ = ActiveObservation{o.is_target, o.confidence, o.itm_score};
  }
  if (cfg_.absence.enabled) {
    for (const auto& c : memory_.candidates()) {
      if (touched.contains(c.id) || c.frozen) continue;
      if (absence_visible(c.mu)) memory_.observe_absence(c.id, t_);
    }
  }
  for (const auto& c : memory_.candidates()) {
    if (c.id != pursued_ && dist_to(c.mu) <= cfg_.fse.r_v) memory_.mark_visited(c.id, t_);
  }
}

void EpisodeLoop::ensure_field() {
  if (field_t_ == t_) return;
  field_ = distance_field(map_, agent_cell());
  field_t_ = t_;
}

bool EpisodeLoop::plan(PlannedPath& p, CellIndex goal, Vec2 point, std::optional<int> id) {
  ensure_field();
  p.active = false;
  auto path = path_from_field(map_, field_, goal);
  p.planned_at = t_;
  p.id = id;
  p.point = point;
  p.goal = goal;
  if (!path) return false;
  p.cells = std::move(path->cells);
  p.cum.assign(p.cells.size(), 0.0);
  for (std::size_t i = 1; i < p.cells.size(); ++i) {
    const bool diag = p.cells[i].x != p.cells[i - 1].x && p.cells[i].y != p.cells[i - 1].y;
    p.cum[i] = p.cum[i - 1] + (diag ? kSqrt2 : 1.0);
  }
  p.progress = 0;
  p.gap = euclidean_distance(cell_center(goal, cs()), point);
  p.active = true;
  return true;
}

void EpisodeLoop::update_progress(PlannedPath& p) {
  const CellIndex a = agent_cell();
  const std::size_t end = std::min(p.cells.size(), p.progress + kProgressWindow);
  std::size_t best = p.progress;
  int best_d = std::numeric_limits<int>::max();
  for (std::size_t i = p.progress; i < end; ++i) {
    const int d = chebyshev(p.cells[i], a);
    if (d <= best_d) {
      best_d = d;
      best = i;
    }
  }
  p.progress = best;
}

bool EpisodeLoop::path_valid(PlannedPath& p) {
  if (!p.active || p.cells.empty()) return false;
  update_progress(p);
  if (chebyshev(p.cells[p.progress], agent_cell()) > 2) return false;
  const std::size_t end = std::min(p.cells.size(), p.progress + kLookahead + 4);
  for (std::size_t i = p.progress; i < end; ++i) {
    if (!map_.is_free(p.cells[i])) return false;
  }
  return true;
}

Action EpisodeLoop::follow(PlannedPath& p) {
  update_progress(p);
  const std::size_t last = p.cells.size() - 1;
  const CellIndex point_cell{floor_cell(p.point.x, cs()), floor_cell(p.point.y, cs())};
  const Vec2 final_point = point_cell == p.goal ? p.point : cell_center(p.goal, cs());
  Vec2 waypoint = p.progress >= last ? final_point : cell_center(p.cells[p.progress + 1], cs());
  for (std::size_t k = std::min(last, p.progress + kLookahead); k > p.progress; --k) {
    const Vec2 w = k == last ? final_point : cell_center(p.cells[k], cs());
    if (segment_clear(map_, pose_.position(), w)) {
      waypoint = w;
      break;
    }
  }
  return steer_toward(pose_, waypoint, clear_span(), fan_, cfg_.guard.heading_tolerance);
}

std::optional<Action> EpisodeLoop::explore(std::optional<Vec2> condition) {
  bool reselect = !frontier_.active || force_reselect_ || t_ - frontier_.planned_at >= kFrontierInterval;
  if (!reselect) {
    if (!is_frontier_cell(map_, frontier_.goal) || !path_valid(frontier_)) {
      reselect = true;
    } else if (dist_to(frontier_.point) <= kFrontierReached) {
      note_frontier_reached(frontier_.goal);
      reselect = true;
    }
  }
  if (reselect) {
    force_reselect_ = false;
    frontier_.active = false;
    ensure_field();
    SubgoalSet set;
    std::vector<CellIndex> cells;
    std::vector<CellIndex> near;
    for (const auto& f : detect_frontiers(map_)) {
      if (!std::isfinite(field_[map_.index(f.cell)]) || spent_.contains(f.cell)) continue;
      const Vec2 c = cell_center(f.cell, cs());
      const bool spent = std::any_of(spent_.begin(), spent_.end(), [&](CellIndex s) {
        return euclidean_distance(cell_center(s, cs()), c) <= kFrontierReached;
      });
      if (spent) continue;
      if (dist_to(c) <= kNearFrontier) {
        near.push_back(f.cell);
        continue;
      }
      cells.push_back(f.cell);
      set.goals.push_back(c);
    }
    if (cells.empty()) {
      if (near.empty()) return std::nullopt;
      // Only frontiers at the agent's feet: turn in place to resolve them,
      // and give up on them after a full turn that reveals nothing.
      if (++look_turns_ >= static_cast<int>(fan_.headings.size())) {
        spent_.insert(near.begin(), near.end());
        look_turns_ = 0;
      }
      force_reselect_ = true;
      return Action::Left;
    }
    look_turns_ = 0;
    std::size_t pick = 0;
    if (feat_.guards) {
      set.visited_regions = visited_;
      set.failed_regions = failed_.active(t_);
      PlannerDistance planner = [&](Vec2 g) -> std::optional<double> {
        if (condition) return std::nullopt;  // distance to the candidate is unknown beyond the map
        return field_[map_.index({floor_cell(g.x, cs()), floor_cell(g.y, cs())})] * cs();
      };
      pick = select_subgoal(set, condition.value_or(pose_.position()), planner, cs(), cfg_.guard);
    } else {
      double best = kInf;
      for (std::size_t i = 0; i < cells.size(); ++i) {
        const double d = field_[map_.index(cells[i])];
        if (d < best) {
          best = d;
          pick = i;
        }
      }
    }
    plan(frontier_, cells[pick], set.goals[pick], std::nullopt);
    if (!frontier_.active) return std::nullopt;
  }
  return follow(frontier_);
}

void EpisodeLoop::note_frontier_reached(CellIndex goal) {
  const Vec2 p = cell_center(goal, cs());
  for (auto& [cell, count] : reached_) {
    if (euclidean_distance(cell_center(cell, cs()), p) <= kFrontierReached) {
      if (++count >= kFrontierVisits) spent_.insert(goal);
      return;
    }
  }
  reached_.push_back({goal, 1});
}

std::pair<std::size_t, double> EpisodeLoop::best_closing(Vec2 mu) const {
  const double step = cfg_.episode.forward_step;
  std::size_t best = 0;
  double best_d = kInf;
  for (std::size_t k = 0; k < fan_.headings.size(); ++k) {
    if (!heading_clear_[k]) continue;
    const double d = euclidean_distance(pose_.position() + heading_vector(fan_.headings[k]) * step, mu);
    if (d < best_d - 1e-12) {
      best_d = d;
      best = k;
    }
  }
  if (heading_clear_[0]) {
    const double d0 = euclidean_distance(pose_.position() + heading_vector(fan_.headings[0]) * step, mu);
    if (d0 <= best_d + kKeepHeadingSlack) return {0, d0};
  }
  return {best, best_d};
}

Action EpisodeLoop::turn_or_forward(std::size_t k) const {
  if (k == 0) return Action::Forward;
  return rotate_toward(fan_.headings[k], pose_.heading());
}

Action EpisodeLoop::face(Vec2 mu) {
  const Vec2 d = mu - pose_.position();
  if (d.norm() > 1e-6) {
    const double bearing = std::atan2(d.y, d.x);
    if (std::abs(angle_diff(bearing, pose_.heading())) > kFaceTolerance) return rotate_toward(bearing, pose_.heading());
  }
  jitter_ = !jitter_;
  return jitter_ ? Action::Left : Action::Right;
}

bool EpisodeLoop::docked(Vec2 mu) const {
  const double d = dist_to(mu);
  if (d > cfg_.fse.r_stop) return false;
  return best_closing(mu).second >= d - kDockImprovement;
}

Action EpisodeLoop::pursue(Vec2 mu, std::optional<int> id, bool conditioned) {
  const double d = dist_to(mu);
  if (d <= kCloseRange) {
    const auto [k, nd] = best_closing(mu);
    if (nd < d - kDockImprovement) return turn_or_forward(k);
    if (d <= cfg_.fse.r_stop) return face(mu);
  }
  const bool replan = !target_.active || target_.id != id || euclidean_distance(target_.point, mu) > 0.2 ||
                      t_ - target_.planned_at >= kReplanInterval || !path_valid(target_);
  if (replan) {
    ensure_field();
    std::optional<CellIndex> goal;
    double best = kInf;
    double best_field = kInf;
    for (std::size_t i = 0; i < field_.size(); ++i) {
      if (!std::isfinite(field_[i])) continue;
      const CellIndex c = map_.cell_of(i);
      const double e = euclidean_distance(cell_center(c, cs()), mu);
      if (e < best - 1e-9 || (std::abs(e - best) <= 1e-9 && field_[i] < best_field)) {
        best = e;
        best_field = field_[i];
        goal = c;
      }
    }
    if (!goal || !plan(target_, *goal, mu, id)) return face(mu);
  }
  if (target_.gap > kReachTolerance) {
    if (auto a = explore(conditioned ? std::optional<Vec2>(mu) : std::nullopt)) return *a;
  }
  update_progress(target_);
  if (target_.progress + 1 >= target_.cells.size()) return face(mu);
  return follow(target_);
}

Action EpisodeLoop::dock(Vec2 mu, std::optional<int> id) {
  if (dist_to(mu) > kCloseRange) return pursue(mu, id, feat_.guards);
  const auto [k, nd] = best_closing(mu);
  if (nd < dist_to(mu) - kDockImprovement) return turn_or_forward(k);
  if (dist_to(mu) > cfg_.fse.r_stop) return pursue(mu, id, feat_.guards);
  return face(mu);
}

std::optional<double> EpisodeLoop::pursuit_progress(int id, Vec2 mu) const {
  const double d = dist_to(mu);
  if (d <= kCloseRange || !target_.active || target_.id != id) return d;
  return target_.remaining(cs());
}

bool EpisodeLoop::update_saturation(std::optional<double> progress) {
  if (ctx_.state != ExecutiveState::Approach || !ctx_.active_candidate || !progress) {
    sat_id_.reset();
    return false;
  }
  if (sat_id_ != ctx_.active_candidate) {
    sat_id_ = ctx_.active_candidate;
    sat_best_ = *progress;
    sat_steps_ = 0;
  } else if (*progress < sat_best_ - cfg_.guard.progress_margin) {
    sat_best_ = *progress;
    sat_steps_ = 0;
  } else {
    ++sat_steps_;
  }
  return sat_steps_ >= cfg_.guard.stall_steps;
}

bool EpisodeLoop::cooldown_pending() const {
  return std::any_of(memory_.candidates().begin(), memory_.candidates().end(), [&](const Candidate& c) {
    return !c.frozen && c.cooldown_until > t_ && c.target_obs > c.nontarget_obs;
  });
}

Decision EpisodeLoop::baseline_step(StepLog& log, const std::vector<SemanticObservation>&) {
  if (baseline_target_) {
    log.active_mu = *baseline_target_;
    log.active_dist = dist_to(*baseline_target_);
    if (*log.active_dist <= cfg_.baseline.stop_radius) {
      log.intent = IntentKind::EmitStop;
      return {Action::Stop};
    }
    log.intent = IntentKind::ApproachCandidate;
    return {pursue(*baseline_target_, std::nullopt, false)};
  }
  log.intent = IntentKind::ExploreFrontier;
  auto a = explore(std::nullopt);
  if (!a) return {Action::Left, true};
  return {*a};
}

Decision EpisodeLoop::pcm_step(StepLog& log) {
  const auto viable = memory_.viable_set(t_);
  const auto ranked = memory_.rank(viable, t_);
  if (!ranked.empty()) {
    const Candidate& c = *memory_.find(ranked.front().id);
    pursued_ = c.id;
    log.active_candidate = c.id;
    log.active_mu = c.mu;
    log.active_dist = dist_to(c.mu);
    if (*log.active_dist <= cfg_.baseline.stop_radius) {
      log.intent = IntentKind::EmitStop;
      return {Action::Stop};
    }
    log.intent = IntentKind::ApproachCandidate;
    return {pursue(c.mu, c.id, false)};
  }
  pursued_.reset();
  log.intent = IntentKind::ExploreFrontier;
  auto a = explore(std::nullopt);
  if (!a) return {Action::Left, true};
  return {*a};
}

Decision EpisodeLoop::fse_step(StepLog& log) {
  auto ranked = memory_.rank(memory_.viable_set(t_), t_);
  std::string note;

  bool recovery_done = false;
  std::optional<Action> recovery_action;
  if (ctx_.recovery_active) {
    const auto clear = clearance();
    const RecoveryStep rs =
        recovery_step(recovery_, pose_, guard_.delta_p, clear, fan_, clear_span(), cfg_.guard);
    if (rs.done) {
      recovery_done = true;
      if (rs.exhausted) {
        Vec2 where = pose_.position();
        if (ctx_.failover_candidate) {
          const Candidate* c = memory_.find(*ctx_.failover_candidate);
          if (c) {
            where = c->mu;
            memory_.penalize_pursuit(c->id, t_);
          }
        }
        failed_.add_disc(where, cfg_.guard.failed_region_radius, cs(), t_ + cfg_.guard.failed_region_ttl);
        force_reselect_ = true;
        ranked = memory_.rank(memory_.viable_set(t_), t_);
        note = "recovery budget spent";
      }
    } else {
      recovery_action = rs.action;
    }
    ctx_.failover_steps_used = recovery_.steps;
  }

  const Candidate* active = ctx_.active_candidate ? memory_.find(*ctx_.active_candidate) : nullptr;
  std::optional<double> progress;
  if (active && is_commit_state(ctx_.state)) progress = pursuit_progress(active->id, active->mu);

  StallVerdict verdict = StallVerdict::None;
  if (feat_.guards) {
    StallInputs in;
    in.distance_to_active = active ? dist_to(active->mu) : kInf;
    in.viable_alternative = std::any_of(ranked.begin(), ranked.end(), [&](const RankedCandidate& r) {
      return !active || r.id != active->id;
    });
    in.r_v = cfg_.fse.r_v;
    in.progress = progress;
    verdict = update_stall(guard_, ctx_, in, cfg_.guard);
    if (verdict != StallVerdict::None && !is_commit_state(ctx_.state)) {
      if (ctx_.state == ExecutiveState::Search && frontier_.active) {
        failed_.add_disc(frontier_.point, cfg_.guard.failed_region_radius, cs(), t_ + cfg_.guard.failed_region_ttl);
        force_reselect_ = true;
        note = "stall: frontier marked failed";
      }
      verdict = StallVerdict::None;
    }
  }

  StepSignals signals;
  signals.viable_ranked = ranked;
  signals.agent_pose = pose_;
  signals.new_observation_for_active = active_obs_;
  signals.approach_saturated = update_saturation(progress);
  signals.docked = active && docked(active->mu);
  signals.stall = verdict;
  signals.recovery_done = recovery_done;

  const bool was_recovering = ctx_.recovery_active;
  StepResult res = step_state(ctx_, signals, memory_, cfg_.fse, t_);
  if (res.pursuit_failure) memory_.penalize_pursuit(*res.pursuit_failure, t_);
  ctx_ = res.ctx;
  pursued_ = ctx_.active_candidate;
  if (!res.note.empty()) note = note.empty() ? res.note : note + "; " + res.note;

  if (ctx_.recovery_active && !was_recovering) {
    recovery_ = {};
    const auto clear = clearance();
    recovery_action = recovery_step(recovery_, pose_, guard_.delta_p, clear, fan_, clear_span(), cfg_.guard).action;
    ctx_.failover_steps_used = recovery_.steps;
  }

  Decision d;
  const Intent& intent = res.intent;
  const Candidate* target = intent.candidate ? memory_.find(*intent.candidate) : nullptr;
  switch (intent.kind) {
    case IntentKind::ExploreFrontier: {
      auto a = explore(std::nullopt);
      if (a) {
        d.action = *a;
      } else if (ctx_.state == ExecutiveState::Search && ranked.empty() && !cooldown_pending()) {
        d.exhausted = true;
      } else {
        d.action = Action::Left;
      }
      break;
    }
    case IntentKind::HoldAndObserve:
    case IntentKind::ApproachCandidate:
    case IntentKind::VerifyCandidate:
      if (!target) throw ConsistencyError("pursuit intent without a candidate");
      d.action = pursue(target->mu, target->id, feat_.guards);
      break;
    case IntentKind::DockCandidate:
      if (!target) throw ConsistencyError("dock intent without a candidate");
      d.action = dock(target->mu, target->id);
      break;
    case IntentKind::Recover:
      d.action = recovery_action.value_or(Action::Left);
      break;
    case IntentKind::EmitStop:
      d.action = Action::Stop;
      break;
  }

  if (feat_.guards && !d.exhausted) {
    const FilteredAction f = anti_spin_filter(d.action, guard_, cfg_.guard, heading_clear_[0]);
    d.action = f.action;
    log.filtered_from = f.filtered_from;
    if (f.resample) {
      log.resample = true;
      force_reselect_ = true;
      target_.active = false;
    }
    bool gate_ok = false;
    if (ctx_.active_candidate) gate_ok = check_verified_gate(*memory_.find(*ctx_.active_candidate), ctx_, cfg_.fse);
    const InterceptResult ir = intercept_stop(d.action, ctx_.state, gate_ok);
    if (ir.intercepted) {
      log.filtered_from = Action::Stop;
      d.action = ir.action;
      note = note.empty() ? "stop intercepted" : note + "; stop intercepted";
    }
  }

  log.state = ctx_.state;
  log.intent = intent.kind;
  log.active_candidate = ctx_.active_candidate;
  if (ctx_.active_candidate) {
    const Candidate& c = *memory_.find(*ctx_.active_candidate);
    log.active_mu = c.mu;
    log.active_dist = dist_to(c.mu);
    log.d_best = ctx_.d_best;
    log.gate = gate_evidence(c, ctx_);
  }
  log.h = ctx_.target_hits;
  log.k_app = ctx_.approach_steps;
  log.recovery_active = ctx_.recovery_active;
  log.note = note;
  return d;
}

EpisodeRun EpisodeLoop::run(const std::string& episode_id, int episode_index) {
  EpisodeRun out;
  EpisodeRecord& rec = out.record;
  rec.episode_id = episode_id;
  rec.scenario_id = sc_.id;
  rec.variant = variant_;
  rec.episode_index = episode_index;
  rec.seed = seed_;

  const auto targets = sc_.target_positions();
  const auto lstar = shortest_path_oracle(sc_.grid, sc_.start.position(), targets, cfg_.episode.success_radius);
  if (!lstar) {
    rec.outcome = Outcome::Infeasible;
    rec.termination = Termination::Infeasible;
    if (feat_.fse) rec.final_state = ctx_.state;
    return out;
  }
  rec.shortest_path = *lstar;

  Termination term = Termination::MaxSteps;
  for (t_ = 0; t_ < cfg_.episode.max_steps; ++t_) {
    StepLog log;
    log.t = t_;
    log.pose = pose_;
    update_guard(guard_, pose_, cfg_.guard);
    visited_.insert(agent_cell());
    sense(log);
    compute_headings();

    Decision d;
    if (variant_ == Variant::Baseline) {
      d = baseline_step(log, {});
    } else if (!feat_.fse) {
      d = pcm_step(log);
    } else {
      d = fse_step(log);
    }
    if (d.exhausted) {
      term = Termination::NoSubgoal;
      break;
    }
    if (feat_.memory) log.num_candidates = static_cast<int>(memory_.size());
    log.action = d.action;
    log.spin_budget = guard_.spin_budget;
    log.stall_counter = guard_.stall_counter;
    out.steps.push_back(std::move(log));
    ++rec.steps;

    if (d.action == Action::Stop) {
      term = Termination::Stop;
      rec.stop_step = t_;
      double nearest = kInf;
      for (const Vec2& tp : targets) nearest = std::min(nearest, dist_to(tp));
      rec.stop_distance = nearest;
      break;
    }
    const MotionResult m = step_dynamics(sc_.grid, pose_, d.action, cfg_.episode);
    rec.path_length += euclidean_distance(m.pose.position(), pose_.position());
    pose_ = m.pose;
  }

  rec.termination = term;
  if (feat_.fse) rec.final_state = ctx_.state;
  OutcomeContext oc;
  oc.feasible = true;
  oc.termination = term;
  oc.success_radius = cfg_.episode.success_radius;
  rec.outcome = classify_outcome(oc, out.steps, sc_);
  rec.spl_term = spl_term(rec.success(), rec.path_length, rec.shortest_path);
  return out;
}

}  // namespace

EpisodeRun run_episode(const Scenario& scenario, Variant variant, const SimConfig& cfg, std::uint64_t seed,
                       const std::string& episode_id, int episode_index) {
  EpisodeLoop loop(scenario, variant, cfg, seed);
  return loop.run(episode_id, episode_index);
}

}  // namespace consistnav
