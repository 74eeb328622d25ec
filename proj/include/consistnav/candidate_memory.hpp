#pragma once

#include <deque>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "consistnav/geometry.hpp"
#include "consistnav/scenario.hpp"

namespace consistnav {

struct MemoryConfig {
  double merge_radius = 0.5;  // r_m, meters
  double ema_lambda = 0.3;    // position smoothing
  double alpha = 0.2;         // confidence gain
  double beta = 1.0;          // failure penalty on negative evidence
  double w_c = 0.35;
  double w_r = 0.25;
  double w_o = 0.15;
  double w_itm = 0.15;
  double w_f = 0.30;
  double epsilon = 1e-6;
  double tau_c = 0.15;     // viability: confidence
  double tau_cons = 0.42;  // viability: consistency
  int stale_after = 150;
  int cooldown_steps = 50;
  int itm_window = 8;
  double stale_penalty = 0.2;
  double visit_penalty = 0.2;
  int visit_window = 30;
  double failure_decay = 0.5;
  int freeze_after = 2;

  // Throws InvalidArgument when a field is out of range.
  void validate() const;
};

struct HitRecord {
  int step = 0;
  double confidence = 0.0;  // candidate confidence right after the hit
};

enum class ConfidenceBand { Low, Medium, High };
std::string_view to_string(ConfidenceBand b);

struct Candidate {
  int id = 0;
  Vec2 mu;
  double confidence = 0.0;
  double negative_evidence = 0.0;
  int target_obs = 0;
  int nontarget_obs = 0;
  double consistency = 0.0;
  std::deque<double> itm_history;
  int failure_count = 0;
  bool frozen = false;
  int cooldown_until = 0;
  int last_update = 0;
  std::optional<int> last_visited;
  // Target-labelled hits, newest last; trimmed to a short horizon.
  std::deque<HitRecord> recent_hits;

  double itm_mean() const;
  ConfidenceBand band() const;
};

// Exponential smoothing of the candidate centre. lambda must lie in (0, 1].
Vec2 update_position(Vec2 mu, Vec2 obs_pos, double lambda);

// Asymmetric belief update: target evidence raises confidence by alpha,
// non-target evidence lowers it by 0.12 alpha; verify-stage failure adds
// beta to the negative evidence.
Candidate update_belief(Candidate c, bool target_consistent, bool verify_failed, const MemoryConfig& cfg);

double failure_penalty(const Candidate& c);
double consistency_score(const Candidate& c, int t, const MemoryConfig& cfg);
double priority(const Candidate& c, int t, const MemoryConfig& cfg);
bool is_viable(const Candidate& c, int t, const MemoryConfig& cfg);

// Failed pursuit: more negative evidence, one more failure, decayed
// confidence, a cooldown, and a freeze once failures reach freeze_after.
Candidate apply_pursuit_failure(Candidate c, int t, const MemoryConfig& cfg);

struct RankedCandidate {
  int id = 0;
  double priority = 0.0;
};

struct AssociationResult {
  int id = 0;
  bool created = false;
};

class CandidateMemory {
 public:
  explicit CandidateMemory(MemoryConfig cfg = {});

  const MemoryConfig& config() const { return cfg_; }
  const std::vector<Candidate>& candidates() const { return candidates_; }
  std::size_t size() const { return candidates_.size(); }

  const Candidate* find(int id) const;
  Candidate* find(int id);

  // Nearest candidate strictly inside the merge radius, else a fresh one
  // seeded from the observation. Ties on distance go to the lower id.
  AssociationResult associate(const SemanticObservation& obs);

  // associate + smoothing + belief update + ITM/hit bookkeeping.
  int observe(const SemanticObservation& obs, int t);

  // Non-target evidence for a candidate whose location was in view without
  // any matching detection this step. No position change.
  void observe_absence(int id, int t);

  void refresh(int t);
  std::vector<int> viable_set(int t) const;
  std::vector<RankedCandidate> rank(std::span<const int> viable, int t) const;

  void penalize_pursuit(int id, int t);
  void mark_visited(int id, int t);

  nlohmann::json snapshot() const;

 private:
  MemoryConfig cfg_;
  std::vector<Candidate> candidates_;
  int next_id_ = 0;
};

nlohmann::json to_json(const Candidate& c);

}  // namespace consistnav
