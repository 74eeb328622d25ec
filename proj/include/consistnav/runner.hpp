#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "consistnav/config.hpp"
#include "consistnav/episode.hpp"
#include "consistnav/scenario.hpp"
#include "consistnav/scenario_gen.hpp"

namespace consistnav {

struct ScenarioEntry {
  std::string id;
  std::string file;
  bool feasible = true;
  std::optional<double> shortest_path;
};

inline constexpr const char* kIndexFile = "index.json";

std::vector<ScenarioEntry> read_index(const std::string& dir);
void write_index(const std::string& dir, const std::vector<ScenarioEntry>& entries);

// Scenario files + index with oracle feasibility. Throws InvalidArgument
// for count <= 0 and IoError for an unwritable directory.
std::vector<ScenarioEntry> generate_to_dir(Preset preset, int count, std::uint64_t seed,
                                           const std::string& out_dir, const SimConfig& cfg);

// Per-episode seed. Shared by all variants of a (scenario, episode) pair so
// ablation rows see the same detector draws.
std::uint64_t episode_seed(std::uint64_t global_seed, const std::string& scenario_id, int episode_index);

struct RunManifest {
  std::string config_path;  // empty: shipped defaults
  std::string scenario_dir;
  std::vector<Variant> variants;
  int episodes = 1;
  std::uint64_t seed = 42;
  std::string out_dir;
  bool trajectories = false;
  int threads = 0;  // 0: CONSISTNAV_THREADS or hardware concurrency

  void validate() const;
};

nlohmann::json to_json(const RunManifest& m);

struct BatchHooks {
  // Called after each finished episode; returning false stops the batch,
  // leaving the result marked incomplete.
  std::function<bool(int done, int total)> progress;
  // Called (from worker threads, serialised) with every finished episode.
  std::function<void(const EpisodeRun&)> on_episode;
};

struct BatchResult {
  std::vector<EpisodeRecord> records;  // canonical order
  bool incomplete = false;
};

// In-memory batch over (scenario, variant, episode) in canonical order:
// scenario id, then variant, then episode index.
BatchResult run_batch(const std::vector<Scenario>& scenarios, const std::vector<Variant>& variants,
                      int episodes, std::uint64_t seed, const SimConfig& cfg, int threads,
                      const std::string& trajectory_dir, const BatchHooks& hooks = {});

// Results document: run_config, records, aggregates, incomplete, meta.
nlohmann::json results_json(const RunManifest& manifest, const SimConfig& cfg, const BatchResult& batch);

// Validates everything up front, runs, writes results.json / results.csv /
// manifest.json (and traj/*.jsonl when enabled) under out_dir.
nlohmann::json run_manifest(const RunManifest& manifest, const BatchHooks& hooks = {});

enum class ReportFormat { Markdown, Csv, Json };
std::optional<ReportFormat> parse_report_format(std::string_view s);

std::string render_report(const nlohmann::json& results, ReportFormat format);
// Parse errors carry the byte offset.
std::string report_from_file(const std::string& results_path, ReportFormat format);

int resolve_thread_count(int requested);

}  // namespace consistnav
