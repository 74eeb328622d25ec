#include "consistnav/consistnav.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "consistnav/config.hpp"
#include "consistnav/episode.hpp"
#include "consistnav/errors.hpp"
#include "consistnav/evaluation.hpp"
#include "consistnav/runner.hpp"
#include "consistnav/scenario.hpp"
#include "consistnav/scenario_gen.hpp"

struct cn_config {
  consistnav::SimConfig value;
};

struct cn_scenario {
  consistnav::Scenario value;
};

namespace {

thread_local std::string last_error;

cn_status fail(cn_status code, std::string message) {
  last_error = std::move(message);
  return code;
}

cn_status status_of(const consistnav::Error& e) {
  using consistnav::ErrorKind;
  switch (e.kind()) {
    case ErrorKind::InvalidArgument:
    case ErrorKind::Bounds: return CN_ERR_USAGE;
    case ErrorKind::Io: return CN_ERR_IO;
    case ErrorKind::Schema: return CN_ERR_SCHEMA;
    default: return CN_ERR_INTERNAL;
  }
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
cn_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return CN_OK;
  } catch (const consistnav::Error& e) {
    return fail(status_of(e), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(CN_ERR_SCHEMA, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CN_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

std::vector<consistnav::Variant> parse_variants(const char* csv) {
  std::vector<consistnav::Variant> out;
  if (!csv || !*csv) return {consistnav::kAllVariants.begin(), consistnav::kAllVariants.end()};
  std::string s(csv);
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    const std::string name = s.substr(pos, end - pos);
    auto v = consistnav::parse_variant(name);
    if (!v) throw consistnav::InvalidArgument("unknown variant '" + name + "'");
    out.push_back(*v);
    pos = end + 1;
  }
  return out;
}

}  // namespace

extern "C" {

const char* cn_last_error(void) { return last_error.c_str(); }

const char* cn_version(void) { return "0.1.0"; }

void cn_string_free(char* s) { std::free(s); }

cn_status cn_config_default(cn_config** out) {
  if (!out) return fail(CN_ERR_USAGE, "out is NULL");
  return guarded([&] { *out = new cn_config{}; });
}

cn_status cn_config_load(const char* path, cn_config** out) {
  if (!path || !out) return fail(CN_ERR_USAGE, "path and out are required");
  return guarded([&] { *out = new cn_config{consistnav::load_config(path)}; });
}

cn_status cn_config_parse(const char* json_text, cn_config** out) {
  if (!json_text || !out) return fail(CN_ERR_USAGE, "json_text and out are required");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw consistnav::SchemaError("config parse error at byte " + std::to_string(e.byte));
    }
    *out = new cn_config{consistnav::config_from_json(j)};
  });
}

cn_status cn_config_to_json(const cn_config* config, char** out_json) {
  if (!config || !out_json) return fail(CN_ERR_USAGE, "config and out_json are required");
  return guarded([&] { *out_json = dup(consistnav::to_json(config->value).dump(2)); });
}

void cn_config_free(cn_config* config) { delete config; }

cn_status cn_scenario_load(const char* path, cn_scenario** out) {
  if (!path || !out) return fail(CN_ERR_USAGE, "path and out are required");
  return guarded([&] { *out = new cn_scenario{consistnav::load_scenario(path)}; });
}

cn_status cn_scenario_parse(const char* json_text, cn_scenario** out) {
  if (!json_text || !out) return fail(CN_ERR_USAGE, "json_text and out are required");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
      throw consistnav::SchemaError("scenario parse error at byte " + std::to_string(e.byte));
    }
    *out = new cn_scenario{consistnav::scenario_from_json(j)};
  });
}

cn_status cn_scenario_feasibility(const cn_scenario* scenario, const cn_config* config, int* out_feasible,
                                  double* out_shortest) {
  if (!scenario) return fail(CN_ERR_USAGE, "scenario is NULL");
  return guarded([&] {
    const consistnav::SimConfig cfg = config ? config->value : consistnav::SimConfig{};
    const auto& s = scenario->value;
    const auto targets = s.target_positions();
    const auto l = consistnav::shortest_path_oracle(s.grid, s.start.position(), targets, cfg.episode.success_radius);
    if (out_feasible) *out_feasible = l ? 1 : 0;
    if (out_shortest) *out_shortest = l.value_or(0.0);
  });
}

void cn_scenario_free(cn_scenario* scenario) { delete scenario; }

cn_status cn_generate(const char* preset, int count, uint64_t seed, const char* out_dir) {
  if (!preset || !out_dir) return fail(CN_ERR_USAGE, "preset and out_dir are required");
  const auto p = consistnav::parse_preset(preset);
  if (!p) return fail(CN_ERR_USAGE, std::string("unknown preset '") + preset + "'");
  if (count <= 0) return fail(CN_ERR_USAGE, "count must be positive");
  return guarded([&] { consistnav::generate_to_dir(*p, count, seed, out_dir, consistnav::SimConfig{}); });
}

cn_status cn_run_episode(const cn_scenario* scenario, const cn_config* config, const char* variant, uint64_t seed,
                         char** out_record_json, char** out_trajectory_jsonl) {
  if (!scenario || !variant || !out_record_json) return fail(CN_ERR_USAGE, "scenario, variant and out are required");
  const auto v = consistnav::parse_variant(variant);
  if (!v) return fail(CN_ERR_USAGE, std::string("unknown variant '") + variant + "'");
  return guarded([&] {
    const consistnav::SimConfig cfg = config ? config->value : consistnav::SimConfig{};
    const auto run = consistnav::run_episode(scenario->value, *v, cfg, seed,
                                             scenario->value.id + "-" + variant + "-0", 0);
    char* record = dup(consistnav::to_json(run.record).dump());
    if (out_trajectory_jsonl) {
      try {
        *out_trajectory_jsonl = dup(consistnav::to_jsonl(run.steps));
      } catch (...) {
        std::free(record);
        throw;
      }
    }
    *out_record_json = record;
  });
}

void cn_run_options_init(cn_run_options* options) {
  if (!options) return;
  *options = cn_run_options{};
  options->episodes = 1;
  options->seed = 42;
}

cn_status cn_run(const cn_run_options* options, int* out_incomplete) {
  if (!options || !options->scenario_dir || !options->out_dir) {
    return fail(CN_ERR_USAGE, "scenario_dir and out_dir are required");
  }
  return guarded([&] {
    consistnav::RunManifest m;
    m.config_path = options->config_path ? options->config_path : "";
    m.scenario_dir = options->scenario_dir;
    m.variants = parse_variants(options->variants);
    m.episodes = options->episodes;
    m.seed = options->seed;
    m.out_dir = options->out_dir;
    m.trajectories = options->write_trajectories != 0;
    m.threads = options->threads;
    consistnav::BatchHooks hooks;
    if (options->progress) {
      hooks.progress = [options](int done, int total) {
        return options->progress(done, total, options->user_data) == 0;
      };
    }
    const auto results = consistnav::run_manifest(m, hooks);
    if (out_incomplete) *out_incomplete = results.value("incomplete", false) ? 1 : 0;
  });
}

cn_status cn_report(const char* results_path, const char* format, char** out_text) {
  if (!results_path || !format || !out_text) return fail(CN_ERR_USAGE, "results_path, format and out are required");
  const auto f = consistnav::parse_report_format(format);
  if (!f) return fail(CN_ERR_USAGE, std::string("unknown format '") + format + "'");
  return guarded([&] { *out_text = dup(consistnav::report_from_file(results_path, *f)); });
}

}  // extern "C"
