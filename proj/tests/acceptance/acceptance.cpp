// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "consistnav/candidate_memory.hpp"
#include "consistnav/config.hpp"
#include "consistnav/episode.hpp"
#include "consistnav/evaluation.hpp"
#include "consistnav/fse_controller.hpp"
#include "consistnav/planner.hpp"
#include "consistnav/runner.hpp"
#include "consistnav/scenario_gen.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace consistnav;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void verdict(int n, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("criterion %d: %s - %s\n", n, pass ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Replays logged trajectories against the stop gate, the transition table
// and the guard bounds.
struct TrajectoryAudit {
  SimConfig cfg;
  std::mutex mu;
  int episodes = 0;
  int stops = 0;
  int stop_violations = 0;
  int transitions = 0;
  int illegal = 0;
  int spin_violations = 0;
  int failover_violations = 0;
  int dbest_violations = 0;
  // Gated stops whose true target lay outside the success radius.
  int near_misses = 0;
  std::map<const int*, std::string> first_problem;

  void problem(int& counter, const EpisodeRun& run, const std::string& what) {
    if (counter++ == 0) first_problem[&counter] = run.record.episode_id + ": " + what;
  }

  std::string where(const std::vector<const int*>& counters) const {
    for (const int* c : counters) {
      const auto it = first_problem.find(c);
      if (it != first_problem.end()) return " (first: " + it->second + ")";
    }
    return "";
  }

  void merge(const TrajectoryAudit& o) {
    episodes += o.episodes;
    stops += o.stops;
    transitions += o.transitions;
    near_misses += o.near_misses;
    for (int TrajectoryAudit::*f :
         {&TrajectoryAudit::stop_violations, &TrajectoryAudit::illegal, &TrajectoryAudit::spin_violations,
          &TrajectoryAudit::failover_violations, &TrajectoryAudit::dbest_violations}) {
      if (this->*f == 0 && o.*f > 0) first_problem[&(this->*f)] = o.first_problem.at(&(o.*f));
      this->*f += o.*f;
    }
  }

  void audit(const EpisodeRun& run) {
    std::lock_guard lock(mu);
    ++episodes;
    const bool fse = features(run.record.variant).fse;
    if (fse) {
      for (const auto& s : run.steps) {
        if (s.action != Action::Stop) continue;
        ++stops;
        const bool ok = s.state == ExecutiveState::Success && s.gate && gate_passes(*s.gate, cfg.fse);
        if (!ok) problem(stop_violations, run, "stop at t=" + std::to_string(s.t));
        if (ok && run.record.outcome != Outcome::Success) ++near_misses;
      }
      for (std::size_t i = 1; i < run.steps.size(); ++i) {
        const auto& a = run.steps[i - 1].state;
        const auto& b = run.steps[i].state;
        if (!a || !b) {
          problem(illegal, run, "missing state");
          continue;
        }
        ++transitions;
        if (*a != *b && !legal_transition(*a, *b)) {
          problem(illegal, run,
                  std::string(to_string(*a)) + "->" + std::string(to_string(*b)) + " at t=" +
                      std::to_string(run.steps[i].t));
        }
      }
    }
    if (!features(run.record.variant).guards) return;

    bool resampled = false;
    int failover_run = 0;
    for (std::size_t i = 0; i < run.steps.size(); ++i) {
      const auto& s = run.steps[i];
      if (s.spin_budget == 0) resampled = false;
      if (s.spin_budget > cfg.guard.spin_cap && !resampled) {
        problem(spin_violations, run, "spin budget " + std::to_string(s.spin_budget) + " at t=" + std::to_string(s.t));
      }
      if (s.resample) resampled = true;

      failover_run = s.state == ExecutiveState::Failover ? failover_run + 1 : 0;
      if (failover_run > cfg.guard.recovery_budget) {
        problem(failover_violations, run, "failover run at t=" + std::to_string(s.t));
      }

      if (i > 0) {
        const auto& p = run.steps[i - 1];
        const bool same_run = p.state && s.state && is_commit_state(*p.state) && is_commit_state(*s.state) &&
                              p.active_candidate && p.active_candidate == s.active_candidate;
        if (same_run && p.d_best && s.d_best && *s.d_best > *p.d_best + 1e-12) {
          problem(dbest_violations, run, "d_best rose at t=" + std::to_string(s.t));
        }
      }
    }
  }
};

struct SuiteRun {
  BatchResult batch;
  double seconds = 0.0;
};

std::vector<Scenario> standard_suite(std::uint64_t seed) {
  std::vector<Scenario> all;
  for (Preset p : {Preset::Office, Preset::Maze, Preset::Apartment}) {
    auto s = generate_scenarios(p, 40, seed);
    all.insert(all.end(), s.begin(), s.end());
  }
  return all;
}

SuiteRun run_suite(const std::vector<Scenario>& scenarios, const std::vector<Variant>& variants, std::uint64_t seed,
                   const SimConfig& cfg, TrajectoryAudit& audit) {
  BatchHooks hooks;
  hooks.on_episode = [&](const EpisodeRun& r) { audit.audit(r); };
  const auto start = Clock::now();
  SuiteRun out;
  out.batch = run_batch(scenarios, variants, 1, seed, cfg, 0, "", hooks);
  out.seconds = seconds_since(start);
  return out;
}

bool partitions(const std::vector<VariantAggregate>& rows) {
  for (const auto& r : rows) {
    int sum = 0;
    for (int c : r.counts) sum += c;
    if (sum != r.episodes) return false;
  }
  return true;
}

bool spl_bounded(const std::vector<EpisodeRecord>& records, const std::vector<VariantAggregate>& rows) {
  for (const auto& r : records) {
    if (r.spl_term > (r.success() ? 1.0 : 0.0) + 1e-12) return false;
  }
  for (const auto& r : rows) {
    if (r.metrics.spl > r.metrics.sr + 1e-12) return false;
  }
  return true;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

void criterion_6() {
  const FseConfig cfg;
  int mismatches = 0;
  for (int mask = 0; mask < 64; ++mask) {
    auto on = [&](int bit) { return ((mask >> bit) & 1) != 0; };
    ExecutiveContext ctx;
    ctx.target_hits = on(0) ? 2 : 1;
    ctx.d_best = on(1) ? 0.28 : 0.2801;
    ctx.kappa = on(2) ? 0.30 : 0.2999;
    Candidate c;
    c.target_obs = on(3) ? 3 : 2;
    c.nontarget_obs = on(4) ? 0 : 5;
    c.itm_history = {on(5) ? 0.12 : 0.1199};
    const bool want = mask == 63;
    if (check_verified_gate(c, ctx, cfg) != want) ++mismatches;
  }
  verdict(6, mismatches == 0, std::to_string(64 - mismatches) + "/64 combinations match the truth table");
}

void criterion_7() {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> counts(0, 15), bit(0, 1), fails(0, 4), itm_len(0, 8);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    MemoryConfig cfg;
    cfg.alpha = u(rng) * 0.6;
    cfg.beta = u(rng) * 2.0;
    Candidate c;
    c.confidence = u(rng);
    c.negative_evidence = u(rng) * 3.0;
    c.target_obs = counts(rng);
    c.nontarget_obs = counts(rng);
    c.failure_count = fails(rng);
    const int n = itm_len(rng);
    for (int k = 0; k < n; ++k) c.itm_history.push_back(u(rng) * 0.5);
    const int y = bit(rng), z = bit(rng);
    const auto got = update_belief(c, y == 1, z == 1, cfg);
    const auto want = testkit::oracle_belief({c.confidence, c.negative_evidence, c.target_obs, c.nontarget_obs}, y, z,
                                             cfg.alpha, cfg.beta);
    worst = std::max(worst, std::abs(got.confidence - want.conf));
    worst = std::max(worst, std::abs(got.negative_evidence - want.neg));
    if (got.target_obs != want.m_plus || got.nontarget_obs != want.m_minus) worst = 1.0;
    double itm = 0.0;
    for (double v : got.itm_history) itm += v;
    if (!got.itm_history.empty()) itm /= static_cast<double>(got.itm_history.size());
    const double oracle =
        testkit::oracle_consistency(want.conf, want.m_plus, want.m_minus, itm, got.failure_count, {});
    worst = std::max(worst, std::abs(consistency_score(got, 0, cfg) - oracle));
  }
  verdict(7, worst <= 1e-9, "1000 random updates, max deviation " + fmt("%.3g", worst));
}

void criterion_8() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto start = Clock::now();
  int grids = 0;
  int mismatches = 0;
  double worst = 0.0;
  while (grids < 100) {
    const int w = 20 + static_cast<int>(u(rng) * 20);
    const int h = 20 + static_cast<int>(u(rng) * 20);
    OccupancyGrid g(w, h, 0.1, Cell::Free);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (u(rng) < 0.25) g.set_raw(i, Cell::Occupied);
    }
    std::vector<CellIndex> free;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.raw(i) == Cell::Free) free.push_back(g.cell_of(i));
    }
    if (free.size() < 2) continue;
    const CellIndex from = free[static_cast<std::size_t>(u(rng) * free.size())];
    const auto field = distance_field(g, from);
    std::vector<CellIndex> reachable;
    for (const auto& c : free) {
      if (std::isfinite(field[g.index(c)]) && !(c == from)) reachable.push_back(c);
    }
    if (reachable.size() < 10) continue;
    const CellIndex to = reachable[static_cast<std::size_t>(u(rng) * reachable.size())];
    ++grids;
    const auto path = plan_path(g, from, to);
    const std::vector<Vec2> target{cell_center(to, g.cell_size())};
    const auto oracle = shortest_path_oracle(g, cell_center(from, g.cell_size()), target, 1e-6);
    if (!path || !oracle) {
      ++mismatches;
      continue;
    }
    const double diff = std::abs(path->cost * g.cell_size() - *oracle);
    worst = std::max(worst, diff);
    if (diff > 0.1 * kSqrt2) ++mismatches;
  }
  const double secs = seconds_since(start);
  verdict(8, mismatches == 0 && secs < 10.0,
          std::to_string(100 - mismatches) + "/100 grids within one diagonal (max diff " + fmt("%.3g", worst) +
              " m) in " + fmt("%.2f", secs) + " s");
}

void criterion_9() {
  const auto root = fs::temp_directory_path() / "consistnav_acceptance_determinism";
  fs::remove_all(root);
  const SimConfig cfg;
  for (Preset p : {Preset::Office, Preset::Maze, Preset::Apartment}) {
    generate_to_dir(p, 40, 42, (root / "sc").string(), cfg);
  }
  RunManifest m;
  m.scenario_dir = (root / "sc").string();
  m.variants = {kAllVariants.begin(), kAllVariants.end()};
  m.seed = 42;
  m.trajectories = true;
  m.out_dir = (root / "a").string();
  auto a = run_manifest(m);
  m.out_dir = (root / "b").string();
  auto b = run_manifest(m);
  a.erase("meta");
  b.erase("meta");
  bool same = a.dump() == b.dump();
  int files = 0;
  for (const auto& r : a["records"]) {
    const std::string rel = r["trajectory_path"];
    const auto ta = slurp(root / "a" / rel);
    if (ta.empty() || ta != slurp(root / "b" / rel)) same = false;
    ++files;
  }
  verdict(9, same && files == 480,
          "results (meta excluded) and " + std::to_string(files) + " trajectory files compared byte for byte");
  fs::remove_all(root);
}

}  // namespace

int main() {
  verdict(1, true,
          "published benchmark numbers need photoreal scenes and learned perception; substituted by the suites below");

  TrajectoryAudit audit;
  std::vector<EpisodeRecord> all_records;
  std::vector<std::vector<VariantAggregate>> all_rows;
  const std::vector<Variant> variants{kAllVariants.begin(), kAllVariants.end()};

  // Criterion 2
  {
    int holds = 0;
    std::string detail;
    double worst_time = 0.0;
    for (std::uint64_t seed : {42ULL, 43ULL, 44ULL}) {
      const auto scenarios = standard_suite(seed);
      const auto run = run_suite(scenarios, variants, seed, audit.cfg, audit);
      worst_time = std::max(worst_time, run.seconds);
      const auto rows = aggregate_report(run.batch.records);
      all_records.insert(all_records.end(), run.batch.records.begin(), run.batch.records.end());
      all_rows.push_back(rows);
      double sr[4] = {0, 0, 0, 0};
      for (const auto& r : rows) sr[static_cast<int>(r.variant)] = 100.0 * r.metrics.sr;
      const double base = sr[static_cast<int>(Variant::Baseline)];
      const double pcm = sr[static_cast<int>(Variant::PCM)];
      const double fsec = sr[static_cast<int>(Variant::PCM_FSEC)];
      const double full = sr[static_cast<int>(Variant::Full)];
      const bool ok = full >= fsec && fsec >= pcm && pcm >= base && full - base >= 5.0;
      if (ok) ++holds;
      detail += "seed " + std::to_string(seed) + " SR B/P/PF/F " + fmt("%.1f", base) + "/" + fmt("%.1f", pcm) + "/" +
                fmt("%.1f", fsec) + "/" + fmt("%.1f", full) + (ok ? " ok" : " no") + " (" + fmt("%.1f", run.seconds) +
                " s); ";
    }
    verdict(2, holds >= 2 && worst_time < 120.0, detail + std::to_string(holds) + "/3 seeds hold");
  }

  // Criterion 3
  {
    SimConfig cfg;
    cfg.detector.p_hallucinate = 0.10;
    cfg.detector.p_confuse = 0.15;
    TrajectoryAudit high_fp;
    high_fp.cfg = cfg;
    const auto scenarios = standard_suite(42);
    const auto run = run_suite(scenarios, {Variant::Baseline, Variant::Full}, 42, cfg, high_fp);
    const auto rows = aggregate_report(run.batch.records);
    all_records.insert(all_records.end(), run.batch.records.begin(), run.batch.records.end());
    all_rows.push_back(rows);
    double base = 0.0, full = 0.0;
    for (const auto& r : rows) {
      if (r.variant == Variant::Baseline) base = r.false_stop_rate;
      if (r.variant == Variant::Full) full = r.false_stop_rate;
    }
    const bool ok = full <= 0.5 * base + 1e-12 && run.seconds < 120.0;
    verdict(3, ok,
            "false-stop rate Baseline " + fmt("%.3f", base) + ", Full " + fmt("%.3f", full) + " (" +
                fmt("%.1f", run.seconds) + " s)");
    audit.merge(high_fp);
  }

  verdict(4, audit.stop_violations == 0,
          std::to_string(audit.stops) + " executive stops replayed, " + std::to_string(audit.stop_violations) +
              " violations; " + std::to_string(audit.near_misses) +
              " gated stops landed outside the success radius" + audit.where({&audit.stop_violations}));
  verdict(5, audit.illegal == 0,
          std::to_string(audit.transitions) + " logged transitions, " + std::to_string(audit.illegal) + " illegal" +
              audit.where({&audit.illegal}));

  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();

  verdict(10, audit.spin_violations + audit.failover_violations + audit.dbest_violations == 0,
          "spin " + std::to_string(audit.spin_violations) + ", failover " +
              std::to_string(audit.failover_violations) + ", d_best " + std::to_string(audit.dbest_violations) +
              " violations over " + std::to_string(audit.episodes) + " episodes" +
              audit.where({&audit.spin_violations, &audit.failover_violations, &audit.dbest_violations}));

  // Criterion 11
  {
    auto rec = [](bool success, double l, double lstar) {
      EpisodeRecord r;
      r.outcome = success ? Outcome::Success : Outcome::Timeout;
      r.path_length = l;
      r.shortest_path = lstar;
      r.spl_term = spl_term(success, l, lstar);
      return r;
    };
    const std::vector<EpisodeRecord> perfect{rec(true, 3, 3), rec(true, 5, 5)};
    const std::vector<EpisodeRecord> doubled{rec(true, 4, 2)};
    const std::vector<EpisodeRecord> mixed{rec(true, 2, 2), rec(false, 1, 2)};
    const auto p = compute_metrics(perfect);
    const auto d = compute_metrics(doubled);
    const auto m = compute_metrics(mixed);
    const bool hand = p.sr == 1.0 && p.spl == 1.0 && d.spl == 0.5 && m.sr == 0.5 && m.spl == 0.5;
    bool bounded = true;
    for (const auto& rows : all_rows) bounded = bounded && spl_bounded(all_records, rows);
    verdict(11, hand && bounded,
            std::string("hand cases ") + (hand ? "exact" : "wrong") + ", SPL <= SR on " +
                std::to_string(all_rows.size()) + " runs " + (bounded ? "holds" : "violated"));
  }

  // Criterion 12
  {
    bool part = true;
    for (const auto& rows : all_rows) part = part && partitions(rows);
    std::string detail = std::string("partition ") + (part ? "holds" : "violated");
    bool fixtures_ok = true;
    for (const auto& f : testkit::taxonomy_fixtures(42)) {
      const auto run = run_episode(f.scenario, Variant::Full, f.config, 42, f.name);
      const bool ok = run.record.outcome == f.expected;
      fixtures_ok = fixtures_ok && ok;
      detail += "; " + f.name + " -> " + std::string(to_string(run.record.outcome)) + (ok ? "" : " (expected " +
                std::string(to_string(f.expected)) + ")");
    }
    verdict(12, part && fixtures_ok, detail);
  }

  std::printf("%s\n", failures == 0 ? "all criteria passed" : (std::to_string(failures) + " criteria failed").c_str());
  return failures == 0 ? 0 : 1;
}
