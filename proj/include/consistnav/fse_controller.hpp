#pragma once

#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "consistnav/candidate_memory.hpp"
#include "consistnav/geometry.hpp"

namespace consistnav {

enum class ExecutiveState { Search, Suspect, Approach, Verify, FinalApproach, Failover, Success };

inline constexpr int kExecutiveStateCount = 7;

std::string_view to_string(ExecutiveState s);
std::optional<ExecutiveState> parse_state(std::string_view s);

// Q_commit = {Suspect, Approach, Verify, FinalApproach}
bool is_commit_state(ExecutiveState s);
// Q_return = {Search, Approach, Verify}
bool is_return_state(ExecutiveState s);

// Position of a state on the nominal commitment chain (Search=0 ...
// Success=5); Failover has no chain index and returns -1.
int chain_index(ExecutiveState s);

bool legal_transition(ExecutiveState from, ExecutiveState to);

struct FseConfig {
  double r_v = 0.8;
  double r_extra = 0.4;
  int n_verify = 40;
  double r_stop = 0.28;
  double tau_conf = 0.30;
  int m_obs = 3;
  double tau_itm = 0.12;
  int hit_window = 10;
  int persistence = 3;
  double strong_confidence = 0.55;
  int failover_budget = 20;       // B_r steps per Failover entry
  int max_failover_entries = 5;   // per episode
  int verify_timeout = 30;        // steps in Verify before a verify-stage failure
  int dock_timeout = 30;          // steps in FinalApproach before giving up

  void validate() const;
};

enum class StallVerdict { None, TriggerVerify, TriggerRecovery, TriggerFailover };
std::string_view to_string(StallVerdict v);

enum class IntentKind {
  ExploreFrontier,
  HoldAndObserve,
  ApproachCandidate,
  VerifyCandidate,
  DockCandidate,
  Recover,
  EmitStop,
};
std::string_view to_string(IntentKind k);

struct Intent {
  IntentKind kind = IntentKind::ExploreFrontier;
  std::optional<int> candidate;
  bool operator==(const Intent&) const = default;
};

struct ExecutiveContext {
  ExecutiveState state = ExecutiveState::Search;
  std::optional<int> active_candidate;
  int approach_steps = 0;
  double d_best = std::numeric_limits<double>::infinity();
  int target_hits = 0;  // h over the hit window
  double kappa = 0.0;   // max confidence over the hit window
  int failover_steps_used = 0;
  int failover_entries = 0;
  int consecutive_top_ranks = 0;
  std::optional<int> last_top;
  int entered_state_at = 0;
  int suspect_stable_steps = 0;
  std::optional<int> last_semantic_pass;  // step at which the semantic sub-gate last held
  std::optional<int> failover_candidate;  // the commitment that led into Failover
  bool recovery_active = false;
};

struct ActiveObservation {
  bool target_consistent = false;
  double confidence = 0.0;
  std::optional<double> itm;
};

struct StepSignals {
  std::vector<RankedCandidate> viable_ranked;
  Pose agent_pose;
  std::optional<ActiveObservation> new_observation_for_active;
  bool planner_progress = true;
  bool frontiers_remaining = true;
  // Approach progress (best planner distance) flat for K_s steps.
  bool approach_saturated = false;
  // Agent is as close to the active candidate as the motion model allows
  // and within r_stop.
  bool docked = false;
  StallVerdict stall = StallVerdict::None;
  // Escape motion finished (progress made or budget spent).
  bool recovery_done = false;
};

// The six verified-stop quantities in one place, so the gate can be
// re-evaluated from logged values.
struct GateEvidence {
  int hits = 0;
  double d_best = std::numeric_limits<double>::infinity();
  double kappa = 0.0;
  int m_plus = 0;
  int m_minus = 0;
  double itm_mean = 0.0;
};

GateEvidence gate_evidence(const Candidate& c, const ExecutiveContext& ctx);
bool gate_passes(const GateEvidence& e, const FseConfig& cfg);
// Every gate condition except the distance one.
bool semantic_gate_passes(const GateEvidence& e, const FseConfig& cfg);

bool check_verified_gate(const Candidate& c, const ExecutiveContext& ctx, const FseConfig& cfg);

// Hits and max confidence of a candidate over the window ending at t.
void window_hits(const Candidate& c, int t, int window, int& hits, double& kappa);

enum class FailoverPlanKind { Dock, Switch, ReturnToSearch };
std::string_view to_string(FailoverPlanKind k);

struct FailoverPlan {
  FailoverPlanKind kind = FailoverPlanKind::ReturnToSearch;
  std::optional<int> candidate;
  ExecutiveState resume_state = ExecutiveState::Search;
};

struct FailoverEntry {
  ExecutiveContext ctx;
  FailoverPlan plan;
};

// Resolution priority: dock a recently verified close candidate, else the
// best unfrozen viable candidate, else frontier search. `exclude` removes a
// candidate that is being penalised in the same step.
FailoverPlan choose_failover_plan(const ExecutiveContext& ctx, const StepSignals& signals,
                                  const CandidateMemory& memory, const FseConfig& cfg, int t,
                                  std::optional<int> exclude = std::nullopt);

// Moves a committed context into Failover. Throws ContractViolation when
// called from a state outside Q_commit.
FailoverEntry enter_failover(const ExecutiveContext& ctx, const StepSignals& signals,
                             const CandidateMemory& memory, const FseConfig& cfg, int t,
                             bool with_recovery, std::optional<int> exclude = std::nullopt);

struct StepResult {
  ExecutiveContext ctx;
  Intent intent;
  // Candidate whose pursuit failed this step; the owner of the memory
  // applies apply_pursuit_failure.
  std::optional<int> pursuit_failure;
  std::optional<FailoverPlan> failover_plan;
  std::string note;
};

// One guarded transition (or self-loop). Throws ConsistencyError when the
// active candidate is missing from memory.
StepResult step_state(const ExecutiveContext& ctx, const StepSignals& signals,
                      const CandidateMemory& memory, const FseConfig& cfg, int t);

}  // namespace consistnav
