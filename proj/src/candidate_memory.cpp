#include "consistnav/candidate_memory.hpp"

#include <algorithm>
#include <numeric>

#include "consistnav/errors.hpp"

namespace consistnav {

namespace {

constexpr int kHitHorizon = 64;

bool unit(double v) { return v >= 0.0 && v <= 1.0; }

}  // namespace

void MemoryConfig::validate() const {
  if (!(ema_lambda > 0.0 && ema_lambda < 1.0)) throw InvalidArgument("memory.ema_lambda must lie in (0,1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("memory.epsilon must be positive");
  if (!unit(tau_c) || !unit(tau_cons)) throw InvalidArgument("memory thresholds must lie in [0,1]");
  if (!(merge_radius > 0.0)) throw InvalidArgument("memory.merge_radius must be positive");
  if (alpha < 0.0 || beta < 0.0) throw InvalidArgument("memory.alpha/beta must be nonnegative");
  if (w_c < 0 || w_r < 0 || w_o < 0 || w_itm < 0 || w_f < 0) {
    throw InvalidArgument("memory weights must be nonnegative");
  }
  if (itm_window <= 0 || cooldown_steps < 0 || stale_after < 0 || freeze_after <= 0) {
    throw InvalidArgument("memory step counts out of range");
  }
  if (!unit(failure_decay)) throw InvalidArgument("memory.failure_decay must lie in [0,1]");
}

std::string_view to_string(ConfidenceBand b) {
  switch (b) {
    case ConfidenceBand::Low: return "low";
    case ConfidenceBand::Medium: return "medium";
    case ConfidenceBand::High: return "high";
  }
  return "?";
}

double Candidate::itm_mean() const {
  if (itm_history.empty()) return 0.0;
  return std::accumulate(itm_history.begin(), itm_history.end(), 0.0) / static_cast<double>(itm_history.size());
}

ConfidenceBand Candidate::band() const {
  if (confidence >= 0.7) return ConfidenceBand::High;
  if (confidence >= 0.4) return ConfidenceBand::Medium;
  return ConfidenceBand::Low;
}

Vec2 update_position(Vec2 mu, Vec2 obs_pos, double lambda) {
  if (!(lambda > 0.0 && lambda <= 1.0)) throw InvalidArgument("update_position: lambda must lie in (0,1]");
  return mu * (1.0 - lambda) + obs_pos * lambda;
}

Candidate update_belief(Candidate c, bool target_consistent, bool verify_failed, const MemoryConfig& cfg) {
  const double y = target_consistent ? 1.0 : 0.0;
  const double z = verify_failed ? 1.0 : 0.0;
  c.confidence = std::min(1.0, c.confidence + cfg.alpha * y - 0.12 * cfg.alpha * (1.0 - y));
  c.confidence = std::max(0.0, c.confidence);
  c.negative_evidence += cfg.beta * z;
  if (target_consistent) {
    ++c.target_obs;
  } else {
    ++c.nontarget_obs;
  }
  return c;
}

double failure_penalty(const Candidate& c) { return std::min(1.0, 0.5 * c.failure_count); }

double consistency_score(const Candidate& c, int /*t*/, const MemoryConfig& cfg) {
  const double mp = c.target_obs;
  const double mm = c.nontarget_obs;
  const double raw = cfg.w_c * c.confidence + cfg.w_r * mp / (mp + mm + cfg.epsilon) +
                     cfg.w_o * std::min(1.0, mp / 6.0) + cfg.w_itm * c.itm_mean() - cfg.w_f * failure_penalty(c);
  return std::clamp(raw, 0.0, 1.0);
}

double priority(const Candidate& c, int t, const MemoryConfig& cfg) {
  const double stale = (t - c.last_update > cfg.stale_after) ? cfg.stale_penalty : 0.0;
  const double visit = (c.last_visited && t - *c.last_visited <= cfg.visit_window) ? cfg.visit_penalty : 0.0;
  return c.confidence + c.consistency + 0.1 * std::min(c.target_obs, 10) + c.itm_mean() - stale - visit;
}

bool is_viable(const Candidate& c, int t, const MemoryConfig& cfg) {
  return !c.frozen && t >= c.cooldown_until && c.target_obs > c.nontarget_obs && c.confidence >= cfg.tau_c &&
         c.consistency >= cfg.tau_cons;
}

Candidate apply_pursuit_failure(Candidate c, int t, const MemoryConfig& cfg) {
  c.negative_evidence += cfg.beta;
  ++c.failure_count;
  c.confidence = std::clamp(c.confidence * cfg.failure_decay, 0.0, 1.0);
  c.cooldown_until = t + cfg.cooldown_steps;
  if (c.failure_count >= cfg.freeze_after) c.frozen = true;
  c.consistency = consistency_score(c, t, cfg);
  return c;
}

CandidateMemory::CandidateMemory(MemoryConfig cfg) : cfg_(cfg) { cfg_.validate(); }

const Candidate* CandidateMemory::find(int id) const {
  // ids are dense and assigned in creation order
  if (id < 0 || static_cast<std::size_t>(id) >= candidates_.size()) return nullptr;
  return &candidates_[static_cast<std::size_t>(id)];
}

Candidate* CandidateMemory::find(int id) {
  return const_cast<Candidate*>(static_cast<const CandidateMemory*>(this)->find(id));
}

AssociationResult CandidateMemory::associate(const SemanticObservation& obs) {
  const Candidate* best = nullptr;
  double best_d = 0.0;
  for (const auto& c : candidates_) {
    const double d = euclidean_distance(c.mu, obs.world_pos);
    if (!best || d < best_d) {
      best = &c;
      best_d = d;
    }
  }
  if (best && best_d < cfg_.merge_radius) return {best->id, false};

  Candidate c;
  c.id = next_id_++;
  c.mu = obs.world_pos;
  // A non-target detection says nothing in favour of the target.
  c.confidence = obs.is_target ? std::clamp(obs.confidence, 0.0, 1.0) : 0.0;
  c.target_obs = obs.is_target ? 1 : 0;
  c.nontarget_obs = obs.is_target ? 0 : 1;
  c.last_update = obs.step;
  c.cooldown_until = 0;
  if (obs.is_target && obs.itm_score) c.itm_history.push_back(std::clamp(*obs.itm_score, 0.0, 1.0));
  if (obs.is_target) c.recent_hits.push_back({obs.step, c.confidence});
  c.consistency = consistency_score(c, obs.step, cfg_);
  candidates_.push_back(std::move(c));
  return {candidates_.back().id, true};
}

int CandidateMemory::observe(const SemanticObservation& obs, int t) {
  const auto assoc = associate(obs);
  if (assoc.created) return assoc.id;
  Candidate& c = candidates_[static_cast<std::size_t>(assoc.id)];
  c.mu = update_position(c.mu, obs.world_pos, cfg_.ema_lambda);
  c = update_belief(std::move(c), obs.is_target, false, cfg_);
  if (obs.is_target && obs.itm_score) {
    c.itm_history.push_back(std::clamp(*obs.itm_score, 0.0, 1.0));
    while (c.itm_history.size() > static_cast<std::size_t>(cfg_.itm_window)) c.itm_history.pop_front();
  }
  if (obs.is_target) c.recent_hits.push_back({t, c.confidence});
  while (!c.recent_hits.empty() && c.recent_hits.front().step <= t - kHitHorizon) c.recent_hits.pop_front();
  c.last_update = t;
  c.consistency = consistency_score(c, t, cfg_);
  return c.id;
}

void CandidateMemory::observe_absence(int id, int t) {
  Candidate* c = find(id);
  if (!c) return;
  *c = update_belief(std::move(*c), false, false, cfg_);
  c->consistency = consistency_score(*c, t, cfg_);
}

void CandidateMemory::refresh(int t) {
  for (auto& c : candidates_) c.consistency = consistency_score(c, t, cfg_);
}

std::vector<int> CandidateMemory::viable_set(int t) const {
  std::vector<int> out;
  for (const auto& c : candidates_) {
    if (is_viable(c, t, cfg_)) out.push_back(c.id);
  }
  return out;
}

std::vector<RankedCandidate> CandidateMemory::rank(std::span<const int> viable, int t) const {
  std::vector<RankedCandidate> out;
  out.reserve(viable.size());
  for (int id : viable) {
    const Candidate* c = find(id);
    if (!c) throw InvalidArgument("rank: unknown candidate id " + std::to_string(id));
    out.push_back({id, priority(*c, t, cfg_)});
  }
  std::stable_sort(out.begin(), out.end(), [](const RankedCandidate& a, const RankedCandidate& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.id < b.id;
  });
  return out;
}

void CandidateMemory::penalize_pursuit(int id, int t) {
  Candidate* c = find(id);
  if (!c) throw ConsistencyError("penalize_pursuit: unknown candidate id " + std::to_string(id));
  *c = apply_pursuit_failure(std::move(*c), t, cfg_);
}

void CandidateMemory::mark_visited(int id, int t) {
  if (Candidate* c = find(id)) c->last_visited = t;
}

nlohmann::json to_json(const Candidate& c) {
  nlohmann::json j{{"id", c.id},
                   {"mu", {c.mu.x, c.mu.y}},
                   {"confidence", c.confidence},
                   {"negative_evidence", c.negative_evidence},
                   {"target_obs", c.target_obs},
                   {"nontarget_obs", c.nontarget_obs},
                   {"consistency", c.consistency},
                   {"itm_history", std::vector<double>(c.itm_history.begin(), c.itm_history.end())},
                   {"itm_mean", c.itm_mean()},
                   {"failure_count", c.failure_count},
                   {"frozen", c.frozen},
                   {"cooldown_until", c.cooldown_until},
                   {"last_update", c.last_update},
                   {"band", to_string(c.band())}};
  j["last_visited"] = c.last_visited ? nlohmann::json(*c.last_visited) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json CandidateMemory::snapshot() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : candidates_) arr.push_back(to_json(c));
  return arr;
}

}  // namespace consistnav
