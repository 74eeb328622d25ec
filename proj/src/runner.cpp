#include "consistnav/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "consistnav/errors.hpp"
#include "consistnav/evaluation.hpp"
#include "consistnav/sensing.hpp"

namespace consistnav {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(what + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

void make_dirs(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec || !fs::is_directory(p)) throw IoError("cannot create directory " + p.string() + ": " + ec.message());
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<Variant> canonical_variants(std::vector<Variant> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<ScenarioEntry> read_index(const std::string& dir) {
  const std::string path = (fs::path(dir) / kIndexFile).string();
  const json j = parse_json(read_file(path), path);
  std::vector<ScenarioEntry> out;
  try {
    for (const auto& e : j.at("scenarios")) {
      ScenarioEntry s;
      s.id = e.at("id").get<std::string>();
      s.file = e.at("file").get<std::string>();
      s.feasible = e.at("feasible").get<bool>();
      if (e.contains("shortest_path") && !e.at("shortest_path").is_null()) {
        s.shortest_path = e.at("shortest_path").get<double>();
      }
      out.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
  return out;
}

void write_index(const std::string& dir, const std::vector<ScenarioEntry>& entries) {
  json arr = json::array();
  for (const auto& e : entries) {
    arr.push_back({{"id", e.id},
                   {"file", e.file},
                   {"feasible", e.feasible},
                   {"shortest_path", e.shortest_path ? json(*e.shortest_path) : json(nullptr)}});
  }
  write_file(fs::path(dir) / kIndexFile, json{{"scenarios", arr}}.dump(2) + "\n");
}

std::vector<ScenarioEntry> generate_to_dir(Preset preset, int count, std::uint64_t seed, const std::string& out_dir,
                                           const SimConfig& cfg) {
  if (count <= 0) throw InvalidArgument("count must be positive");
  make_dirs(out_dir);
  const auto scenarios = generate_scenarios(preset, count, seed);
  std::vector<ScenarioEntry> entries;
  for (const auto& s : scenarios) {
    const std::string file = s.id + ".json";
    save_scenario(s, (fs::path(out_dir) / file).string());
    const auto targets = s.target_positions();
    const auto l = shortest_path_oracle(s.grid, s.start.position(), targets, cfg.episode.success_radius);
    entries.push_back({s.id, file, l.has_value(), l});
  }
  // Merge into an existing index so several presets can share a directory.
  std::vector<ScenarioEntry> merged;
  if (fs::exists(fs::path(out_dir) / kIndexFile)) {
    for (auto& e : read_index(out_dir)) {
      const bool replaced = std::any_of(entries.begin(), entries.end(), [&](const ScenarioEntry& n) { return n.id == e.id; });
      if (!replaced) merged.push_back(std::move(e));
    }
  }
  merged.insert(merged.end(), entries.begin(), entries.end());
  std::sort(merged.begin(), merged.end(), [](const ScenarioEntry& a, const ScenarioEntry& b) { return a.id < b.id; });
  write_index(out_dir, merged);
  return entries;
}

std::uint64_t episode_seed(std::uint64_t global_seed, const std::string& scenario_id, int episode_index) {
  return mix_seed(mix_seed(global_seed, fnv1a(scenario_id)), static_cast<std::uint64_t>(episode_index));
}

void RunManifest::validate() const {
  if (variants.empty()) throw InvalidArgument("at least one variant is required");
  if (episodes <= 0) throw InvalidArgument("episodes must be positive");
  if (scenario_dir.empty()) throw InvalidArgument("scenario directory is required");
  if (out_dir.empty()) throw InvalidArgument("output directory is required");
  if (threads < 0) throw InvalidArgument("threads must be non-negative");
  if (!fs::is_directory(scenario_dir)) throw IoError("scenario directory not found: " + scenario_dir);
  if (!fs::exists(fs::path(scenario_dir) / kIndexFile)) {
    throw IoError("scenario index not found: " + (fs::path(scenario_dir) / kIndexFile).string());
  }
  if (!config_path.empty() && !fs::exists(config_path)) throw IoError("config file not found: " + config_path);
}

json to_json(const RunManifest& m) {
  json variants = json::array();
  for (Variant v : canonical_variants(m.variants)) variants.push_back(std::string(to_string(v)));
  return {{"config", m.config_path},   {"scenarios", m.scenario_dir}, {"variants", variants},
          {"episodes", m.episodes},    {"seed", m.seed},              {"traj", m.trajectories}};
}

int resolve_thread_count(int requested) {
  int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (const char* env = std::getenv("CONSISTNAV_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap > 0) n = std::min<long>(n, cap);
  }
  return std::max(1, n);
}

BatchResult run_batch(const std::vector<Scenario>& scenarios, const std::vector<Variant>& variants, int episodes,
                      std::uint64_t seed, const SimConfig& cfg, int threads, const std::string& trajectory_dir,
                      const BatchHooks& hooks) {
  struct Task {
    const Scenario* scenario;
    Variant variant;
    int index;
  };
  std::vector<const Scenario*> ordered;
  for (const auto& s : scenarios) ordered.push_back(&s);
  std::sort(ordered.begin(), ordered.end(), [](const Scenario* a, const Scenario* b) { return a->id < b->id; });
  std::vector<Task> tasks;
  for (const Scenario* s : ordered) {
    for (Variant v : canonical_variants(variants)) {
      for (int e = 0; e < episodes; ++e) tasks.push_back({s, v, e});
    }
  }

  std::vector<std::optional<EpisodeRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  int done = 0;
  std::exception_ptr failure;
  const int total = static_cast<int>(tasks.size());

  auto worker = [&]() {
    for (;;) {
      if (stop.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      const Task& task = tasks[i];
      try {
        const std::string id =
            task.scenario->id + "-" + std::string(to_string(task.variant)) + "-" + std::to_string(task.index);
        EpisodeRun run = run_episode(*task.scenario, task.variant, cfg,
                                     episode_seed(seed, task.scenario->id, task.index), id, task.index);
        if (!trajectory_dir.empty()) {
          const fs::path file = fs::path(trajectory_dir) / (id + ".jsonl");
          write_file(file, to_jsonl(run.steps));
          run.record.trajectory_path = (fs::path(trajectory_dir).filename() / (id + ".jsonl")).string();
        }
        std::lock_guard lock(mu);
        if (hooks.on_episode) hooks.on_episode(run);
        results[i] = std::move(run.record);
        ++done;
        if (hooks.progress && !hooks.progress(done, total)) stop = true;
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        stop = true;
        return;
      }
    }
  };

  const int n = std::min(resolve_thread_count(threads), std::max(1, total));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BatchResult out;
  for (auto& r : results) {
    if (r) {
      out.records.push_back(std::move(*r));
    } else {
      out.incomplete = true;
    }
  }
  return out;
}

json results_json(const RunManifest& manifest, const SimConfig& cfg, const BatchResult& batch) {
  json records = json::array();
  for (const auto& r : batch.records) records.push_back(to_json(r));
  json run_config = to_json(manifest);
  run_config["sim"] = to_json(cfg);
  return {{"run_config", run_config},
          {"records", records},
          {"aggregates", to_json(aggregate_report(batch.records))},
          {"incomplete", batch.incomplete},
          {"meta",
           {{"generated_at", timestamp()},
            {"out_dir", manifest.out_dir},
            {"threads", resolve_thread_count(manifest.threads)}}}};
}

json run_manifest(const RunManifest& manifest, const BatchHooks& hooks) {
  manifest.validate();
  const SimConfig cfg = manifest.config_path.empty() ? SimConfig{} : load_config(manifest.config_path);
  cfg.validate();
  std::vector<Scenario> scenarios;
  for (const auto& e : read_index(manifest.scenario_dir)) {
    scenarios.push_back(load_scenario((fs::path(manifest.scenario_dir) / e.file).string()));
  }
  make_dirs(manifest.out_dir);
  std::string traj_dir;
  if (manifest.trajectories) {
    traj_dir = (fs::path(manifest.out_dir) / "traj").string();
    make_dirs(traj_dir);
  }
  const BatchResult batch =
      run_batch(scenarios, manifest.variants, manifest.episodes, manifest.seed, cfg, manifest.threads, traj_dir, hooks);
  json results = results_json(manifest, cfg, batch);
  const fs::path out(manifest.out_dir);
  write_file(out / "results.json", results.dump(2) + "\n");
  write_file(out / "results.csv", records_csv(batch.records));
  write_file(out / "manifest.json", to_json(manifest).dump(2) + "\n");
  return results;
}

std::optional<ReportFormat> parse_report_format(std::string_view s) {
  if (s == "md" || s == "markdown") return ReportFormat::Markdown;
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  return std::nullopt;
}

std::string render_report(const json& results, ReportFormat format) {
  std::vector<EpisodeRecord> records;
  try {
    for (const auto& r : results.at("records")) records.push_back(record_from_json(r));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("results document: ") + e.what());
  }
  const auto rows = aggregate_report(records);
  const bool incomplete = results.value("incomplete", false);
  switch (format) {
    case ReportFormat::Markdown: {
      std::string out = render_markdown(rows);
      if (incomplete) out += "\n(incomplete run)\n";
      return out;
    }
    case ReportFormat::Csv:
      return rows.empty() ? std::string("no episodes\n") : render_csv(rows);
    case ReportFormat::Json: {
      json j{{"aggregates", to_json(rows)}, {"incomplete", incomplete}};
      if (rows.empty()) j["message"] = "no episodes";
      return j.dump(2) + "\n";
    }
  }
  return {};
}

std::string report_from_file(const std::string& results_path, ReportFormat format) {
  return render_report(parse_json(read_file(results_path), results_path), format);
}

}  // namespace consistnav
