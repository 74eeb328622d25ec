#include "consistnav/fse_controller.hpp"

#include <algorithm>

#include "consistnav/errors.hpp"

namespace consistnav {

std::string_view to_string(ExecutiveState s) {
  switch (s) {
    case ExecutiveState::Search: return "Search";
    case ExecutiveState::Suspect: return "Suspect";
    case ExecutiveState::Approach: return "Approach";
    case ExecutiveState::Verify: return "Verify";
    case ExecutiveState::FinalApproach: return "FinalApproach";
    case ExecutiveState::Failover: return "Failover";
    case ExecutiveState::Success: return "Success";
  }
  return "?";
}

std::optional<ExecutiveState> parse_state(std::string_view s) {
  for (int i = 0; i < kExecutiveStateCount; ++i) {
    const auto st = static_cast<ExecutiveState>(i);
    if (to_string(st) == s) return st;
  }
  return std::nullopt;
}

bool is_commit_state(ExecutiveState s) {
  return s == ExecutiveState::Suspect || s == ExecutiveState::Approach || s == ExecutiveState::Verify ||
         s == ExecutiveState::FinalApproach;
}

bool is_return_state(ExecutiveState s) {
  return s == ExecutiveState::Search || s == ExecutiveState::Approach || s == ExecutiveState::Verify;
}

int chain_index(ExecutiveState s) {
  switch (s) {
    case ExecutiveState::Search: return 0;
    case ExecutiveState::Suspect: return 1;
    case ExecutiveState::Approach: return 2;
    case ExecutiveState::Verify: return 3;
    case ExecutiveState::FinalApproach: return 4;
    case ExecutiveState::Success: return 5;
    case ExecutiveState::Failover: return -1;
  }
  return -1;
}

bool legal_transition(ExecutiveState from, ExecutiveState to) {
  using S = ExecutiveState;
  if (from == to) return true;
  if (is_commit_state(from) && to == S::Failover) return true;
  if (from == S::Failover) return is_return_state(to) || to == S::FinalApproach;
  switch (from) {
    case S::Search: return to == S::Suspect;
    case S::Suspect: return to == S::Approach || to == S::Search;
    case S::Approach: return to == S::Verify;
    case S::Verify: return to == S::FinalApproach;
    case S::FinalApproach: return to == S::Success;
    default: return false;
  }
}

void FseConfig::validate() const {
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!(r_stop < r_v)) throw InvalidArgument("fse: r_stop must be smaller than r_v");
  if (!unit(tau_conf) || !unit(tau_itm) || !unit(strong_confidence)) {
    throw InvalidArgument("fse: scores must lie in [0,1]");
  }
  if (r_extra < 0 || n_verify < 0 || m_obs < 0 || hit_window <= 0 || persistence <= 0 || failover_budget <= 0 ||
      max_failover_entries < 0 || verify_timeout <= 0 || dock_timeout <= 0) {
    throw InvalidArgument("fse: counts and radii out of range");
  }
}

std::string_view to_string(StallVerdict v) {
  switch (v) {
    case StallVerdict::None: return "None";
    case StallVerdict::TriggerVerify: return "TriggerVerify";
    case StallVerdict::TriggerRecovery: return "TriggerRecovery";
    case StallVerdict::TriggerFailover: return "TriggerFailover";
  }
  return "?";
}

std::string_view to_string(IntentKind k) {
  switch (k) {
    case IntentKind::ExploreFrontier: return "ExploreFrontier";
    case IntentKind::HoldAndObserve: return "HoldAndObserve";
    case IntentKind::ApproachCandidate: return "ApproachCandidate";
    case IntentKind::VerifyCandidate: return "VerifyCandidate";
    case IntentKind::DockCandidate: return "DockCandidate";
    case IntentKind::Recover: return "Recover";
    case IntentKind::EmitStop: return "EmitStop";
  }
  return "?";
}

std::string_view to_string(FailoverPlanKind k) {
  switch (k) {
    case FailoverPlanKind::Dock: return "Dock";
    case FailoverPlanKind::Switch: return "Switch";
    case FailoverPlanKind::ReturnToSearch: return "ReturnToSearch";
  }
  return "?";
}

void window_hits(const Candidate& c, int t, int window, int& hits, double& kappa) {
  hits = 0;
  kappa = 0.0;
  for (const auto& h : c.recent_hits) {
    if (h.step > t - window && h.step <= t) {
      ++hits;
      kappa = std::max(kappa, h.confidence);
    }
  }
}

GateEvidence gate_evidence(const Candidate& c, const ExecutiveContext& ctx) {
  return {ctx.target_hits, ctx.d_best, ctx.kappa, c.target_obs, c.nontarget_obs, c.itm_mean()};
}

bool semantic_gate_passes(const GateEvidence& e, const FseConfig& cfg) {
  return e.hits >= 2 && e.kappa >= cfg.tau_conf && e.m_plus >= cfg.m_obs && e.m_plus > e.m_minus &&
         e.itm_mean >= cfg.tau_itm;
}

bool gate_passes(const GateEvidence& e, const FseConfig& cfg) {
  return semantic_gate_passes(e, cfg) && e.d_best <= cfg.r_stop;
}

bool check_verified_gate(const Candidate& c, const ExecutiveContext& ctx, const FseConfig& cfg) {
  return gate_passes(gate_evidence(c, ctx), cfg);
}

namespace {

bool contains_id(const std::vector<RankedCandidate>& ranked, int id) {
  return std::any_of(ranked.begin(), ranked.end(), [id](const RankedCandidate& r) { return r.id == id; });
}

Intent plan_intent(const FailoverPlan& plan) {
  switch (plan.kind) {
    case FailoverPlanKind::Dock: return {IntentKind::DockCandidate, plan.candidate};
    case FailoverPlanKind::Switch:
      return {plan.resume_state == ExecutiveState::Verify ? IntentKind::VerifyCandidate
                                                          : IntentKind::ApproachCandidate,
              plan.candidate};
    case FailoverPlanKind::ReturnToSearch: return {IntentKind::ExploreFrontier, std::nullopt};
  }
  return {};
}

void enter(ExecutiveContext& ctx, ExecutiveState s, int t) {
  if (ctx.state != s) {
    ctx.state = s;
    ctx.entered_state_at = t;
  }
}

void activate(ExecutiveContext& ctx, const Candidate& c, const Pose& pose, const FseConfig& cfg, int t) {
  ctx.active_candidate = c.id;
  ctx.d_best = euclidean_distance(pose.position(), c.mu);
  ctx.approach_steps = 0;
  ctx.suspect_stable_steps = 0;
  ctx.last_semantic_pass.reset();
  window_hits(c, t, cfg.hit_window, ctx.target_hits, ctx.kappa);
}

void clear_active(ExecutiveContext& ctx) {
  ctx.active_candidate.reset();
  ctx.d_best = std::numeric_limits<double>::infinity();
  ctx.approach_steps = 0;
  ctx.target_hits = 0;
  ctx.kappa = 0.0;
  ctx.suspect_stable_steps = 0;
}

}  // namespace

FailoverPlan choose_failover_plan(const ExecutiveContext& ctx, const StepSignals& signals,
                                  const CandidateMemory& memory, const FseConfig& cfg, int t,
                                  std::optional<int> exclude) {
  FailoverPlan plan;
  if (ctx.failover_entries > cfg.max_failover_entries) return plan;

  const Pose& pose = signals.agent_pose;
  if (ctx.failover_candidate && ctx.failover_candidate != exclude) {
    const Candidate* c = memory.find(*ctx.failover_candidate);
    if (c && !c->frozen && t >= c->cooldown_until && ctx.last_semantic_pass &&
        t - *ctx.last_semantic_pass <= cfg.hit_window &&
        euclidean_distance(pose.position(), c->mu) <= cfg.r_v) {
      plan.kind = FailoverPlanKind::Dock;
      plan.candidate = c->id;
      plan.resume_state = ExecutiveState::FinalApproach;
      return plan;
    }
  }
  for (const auto& r : signals.viable_ranked) {
    if (exclude && r.id == *exclude) continue;
    const Candidate* c = memory.find(r.id);
    if (!c || c->frozen) continue;
    plan.kind = FailoverPlanKind::Switch;
    plan.candidate = r.id;
    plan.resume_state = euclidean_distance(pose.position(), c->mu) <= cfg.r_v ? ExecutiveState::Verify
                                                                               : ExecutiveState::Approach;
    return plan;
  }
  return plan;
}

FailoverEntry enter_failover(const ExecutiveContext& ctx, const StepSignals& signals,
                             const CandidateMemory& memory, const FseConfig& cfg, int t, bool with_recovery,
                             std::optional<int> exclude) {
  if (!is_commit_state(ctx.state)) {
    throw ContractViolation(std::string("enter_failover from non-commit state ") + std::string(to_string(ctx.state)));
  }
  FailoverEntry e{ctx, {}};
  auto& n = e.ctx;
  ++n.failover_entries;
  n.failover_candidate = ctx.active_candidate;
  clear_active(n);
  n.recovery_active = with_recovery;
  n.failover_steps_used = 0;
  enter(n, ExecutiveState::Failover, t);
  e.plan = choose_failover_plan(n, signals, memory, cfg, t, exclude);
  return e;
}

StepResult step_state(const ExecutiveContext& ctx, const StepSignals& signals, const CandidateMemory& memory,
                      const FseConfig& cfg, int t) {
  StepResult r{ctx, {}, std::nullopt, std::nullopt, {}};
  ExecutiveContext& n = r.ctx;
  const Pose& pose = signals.agent_pose;

  const Candidate* active = nullptr;
  double dist = std::numeric_limits<double>::infinity();
  if (n.active_candidate) {
    active = memory.find(*n.active_candidate);
    if (!active) {
      throw ConsistencyError("active candidate " + std::to_string(*n.active_candidate) + " missing from memory");
    }
    dist = euclidean_distance(pose.position(), active->mu);
    n.d_best = std::min(n.d_best, dist);
    window_hits(*active, t, cfg.hit_window, n.target_hits, n.kappa);
    if (semantic_gate_passes(gate_evidence(*active, n), cfg)) n.last_semantic_pass = t;
  }

  // Rank persistence of the top viable candidate.
  if (signals.viable_ranked.empty()) {
    n.consecutive_top_ranks = 0;
    n.last_top.reset();
  } else {
    const int top = signals.viable_ranked.front().id;
    n.consecutive_top_ranks = (n.last_top == top) ? n.consecutive_top_ranks + 1 : 1;
    n.last_top = top;
  }

  const bool active_viable = active && contains_id(signals.viable_ranked, active->id);

  auto failover = [&](bool recovery, std::optional<int> exclude, std::string note) {
    auto e = enter_failover(n, signals, memory, cfg, t, recovery, exclude);
    n = e.ctx;
    r.failover_plan = e.plan;
    r.intent = recovery ? Intent{IntentKind::Recover, n.failover_candidate} : plan_intent(e.plan);
    r.note = std::move(note);
  };
  // Stall verdicts that leave the commitment. Returns true when handled.
  auto stall_exit = [&]() {
    if (signals.stall == StallVerdict::TriggerFailover) {
      failover(false, n.active_candidate, "stall: failover");
      return true;
    }
    if (signals.stall == StallVerdict::TriggerRecovery) {
      failover(true, std::nullopt, "stall: recovery");
      return true;
    }
    return false;
  };

  switch (ctx.state) {
    case ExecutiveState::Search: {
      r.intent = {IntentKind::ExploreFrontier, std::nullopt};
      if (signals.viable_ranked.empty()) break;
      const Candidate* top = memory.find(signals.viable_ranked.front().id);
      if (!top) throw ConsistencyError("ranked candidate missing from memory");
      if (top->confidence >= cfg.strong_confidence || n.consecutive_top_ranks >= cfg.persistence) {
        activate(n, *top, pose, cfg, t);
        enter(n, ExecutiveState::Suspect, t);
        r.intent = {IntentKind::HoldAndObserve, top->id};
      }
      break;
    }
    case ExecutiveState::Suspect: {
      if (!active_viable) {
        clear_active(n);
        enter(n, ExecutiveState::Search, t);
        r.intent = {IntentKind::ExploreFrontier, std::nullopt};
        r.note = "candidate invalidated";
        break;
      }
      if (stall_exit()) break;
      n.suspect_stable_steps = (n.last_top == active->id) ? n.suspect_stable_steps + 1 : 0;
      const bool reconfirmed = signals.new_observation_for_active &&
                               signals.new_observation_for_active->target_consistent && t > ctx.entered_state_at;
      if (reconfirmed || n.suspect_stable_steps >= cfg.persistence) {
        n.approach_steps = 0;
        enter(n, ExecutiveState::Approach, t);
        r.intent = {IntentKind::ApproachCandidate, active->id};
      } else {
        r.intent = {IntentKind::HoldAndObserve, active->id};
      }
      break;
    }
    case ExecutiveState::Approach: {
      if (!active_viable) {
        failover(false, std::nullopt, "candidate lost viability");
        break;
      }
      if (signals.stall == StallVerdict::TriggerVerify) {
        enter(n, ExecutiveState::Verify, t);
        r.intent = {IntentKind::VerifyCandidate, active->id};
        r.note = "stall: verify";
        break;
      }
      if (stall_exit()) break;
      ++n.approach_steps;
      const double bound = cfg.r_v + (n.approach_steps >= cfg.n_verify ? cfg.r_extra : 0.0);
      if (dist <= bound || signals.approach_saturated) {
        enter(n, ExecutiveState::Verify, t);
        r.intent = {IntentKind::VerifyCandidate, active->id};
        if (dist > bound) r.note = "approach saturated";
      } else {
        r.intent = {IntentKind::ApproachCandidate, active->id};
      }
      break;
    }
    case ExecutiveState::Verify: {
      if (!active_viable) {
        failover(false, std::nullopt, "candidate lost viability");
        break;
      }
      if (semantic_gate_passes(gate_evidence(*active, n), cfg)) {
        enter(n, ExecutiveState::FinalApproach, t);
        r.intent = {IntentKind::DockCandidate, active->id};
        break;
      }
      if (t - ctx.entered_state_at >= cfg.verify_timeout) {
        r.pursuit_failure = active->id;
        failover(false, active->id, "verification failed");
        break;
      }
      if (stall_exit()) break;
      r.intent = {IntentKind::VerifyCandidate, active->id};
      break;
    }
    case ExecutiveState::FinalApproach: {
      if (!active_viable) {
        failover(false, std::nullopt, "candidate lost viability");
        break;
      }
      if (check_verified_gate(*active, n, cfg) && signals.docked) {
        enter(n, ExecutiveState::Success, t);
        r.intent = {IntentKind::EmitStop, active->id};
        break;
      }
      if (t - ctx.entered_state_at >= cfg.dock_timeout) {
        r.pursuit_failure = active->id;
        failover(false, active->id, "docking timed out");
        break;
      }
      if (stall_exit()) break;
      r.intent = {IntentKind::DockCandidate, active->id};
      break;
    }
    case ExecutiveState::Failover: {
      const bool budget_spent = t - ctx.entered_state_at >= cfg.failover_budget;
      if (n.recovery_active && !signals.recovery_done && !budget_spent) {
        r.intent = {IntentKind::Recover, n.failover_candidate};
        break;
      }
      const FailoverPlan plan = choose_failover_plan(n, signals, memory, cfg, t);
      r.failover_plan = plan;
      n.recovery_active = false;
      n.failover_steps_used = 0;
      n.failover_candidate.reset();
      if (plan.kind == FailoverPlanKind::ReturnToSearch) {
        clear_active(n);
        enter(n, ExecutiveState::Search, t);
        r.intent = {IntentKind::ExploreFrontier, std::nullopt};
        r.note = "failover: return to search";
        break;
      }
      const Candidate* c = memory.find(*plan.candidate);
      if (!c) throw ConsistencyError("failover plan names a missing candidate");
      const auto last_pass = n.last_semantic_pass;
      activate(n, *c, pose, cfg, t);
      if (plan.kind == FailoverPlanKind::Dock) n.last_semantic_pass = last_pass;
      enter(n, plan.resume_state, t);
      r.intent = plan_intent(plan);
      r.note = plan.kind == FailoverPlanKind::Dock ? "failover: dock" : "failover: switch";
      break;
    }
    case ExecutiveState::Success: {
      r.intent = {IntentKind::EmitStop, n.active_candidate};
      break;
    }
  }
  return r;
}

}  // namespace consistnav
