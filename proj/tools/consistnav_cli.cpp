// Command-line front end. Everything goes through the C API.
#include <csignal>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "consistnav/consistnav.h"

namespace {

volatile std::sig_atomic_t interrupted = 0;

void on_sigint(int) { interrupted = 1; }

int progress(int done, int total, void* user_data) {
  const bool quiet = *static_cast<bool*>(user_data);
  if (!quiet && (done == total || done % 50 == 0)) std::fprintf(stderr, "\r%d/%d episodes", done, total);
  if (!quiet && done == total) std::fprintf(stderr, "\n");
  return interrupted ? 1 : 0;
}

int report_error(cn_status status) {
  std::fprintf(stderr, "error: %s\n", cn_last_error());
  return static_cast<int>(status);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Consistency-aware executive for ObjectNav in a deterministic gridworld"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(cn_version()));

  std::string preset;
  int count = 0;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  auto* gen = app.add_subcommand("gen", "Generate a scenario set with an index");
  gen->add_option("--preset", preset, "office, maze or apartment")->required();
  gen->add_option("--count", count, "Number of scenarios")->required();
  gen->add_option("--seed", gen_seed, "Generator seed")->default_val(0);
  gen->add_option("--out", gen_out, "Output directory")->required();

  std::string config;
  std::string scenarios;
  std::string variants;
  int episodes = 1;
  std::uint64_t seed = 42;
  std::string run_out;
  bool traj = false;
  int threads = 0;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "Run every (scenario, variant, episode) of a scenario set");
  run->add_option("--config", config, "JSON config (defaults when omitted)");
  run->add_option("--scenarios", scenarios, "Scenario directory with index.json")->required();
  run->add_option("--variants", variants, "Comma separated: Baseline,PCM,PCM_FSEC,Full (default all)");
  run->add_option("--episodes", episodes, "Episodes per scenario")->default_val(1);
  run->add_option("--seed", seed, "Global seed")->default_val(42);
  run->add_option("--out", run_out, "Output directory")->required();
  run->add_flag("--traj", traj, "Write per-episode trajectory JSONL");
  run->add_option("--threads", threads, "Worker threads (0: automatic)")->default_val(0);
  run->add_flag("--quiet", quiet, "No progress output");

  std::string results;
  std::string format = "md";
  std::string report_out;
  auto* report = app.add_subcommand("report", "Render aggregates of a results file");
  report->add_option("--results", results, "results.json")->required();
  report->add_option("--format", format, "md, csv or json")->default_val("md");
  report->add_option("--out", report_out, "Write to a file instead of stdout");

  auto* dump = app.add_subcommand("config", "Print the default configuration as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : CN_ERR_USAGE;
  }

  if (*gen) {
    const cn_status s = cn_generate(preset.c_str(), count, gen_seed, gen_out.c_str());
    if (s != CN_OK) return report_error(s);
    std::printf("wrote %d scenarios to %s\n", count, gen_out.c_str());
    return 0;
  }

  if (*run) {
    std::signal(SIGINT, on_sigint);
    cn_run_options opts;
    cn_run_options_init(&opts);
    opts.config_path = config.c_str();
    opts.scenario_dir = scenarios.c_str();
    opts.variants = variants.c_str();
    opts.episodes = episodes;
    opts.seed = seed;
    opts.out_dir = run_out.c_str();
    opts.write_trajectories = traj ? 1 : 0;
    opts.threads = threads;
    opts.progress = progress;
    opts.user_data = &quiet;
    int incomplete = 0;
    const cn_status s = cn_run(&opts, &incomplete);
    if (s != CN_OK) return report_error(s);
    if (incomplete) std::fprintf(stderr, "run interrupted; results marked incomplete\n");
    return 0;
  }

  if (*report) {
    char* text = nullptr;
    const cn_status s = cn_report(results.c_str(), format.c_str(), &text);
    if (s != CN_OK) return report_error(s);
    if (report_out.empty()) {
      std::fputs(text, stdout);
    } else {
      std::ofstream out(report_out, std::ios::binary);
      out << text;
      if (!out) {
        cn_string_free(text);
        std::fprintf(stderr, "error: cannot write %s\n", report_out.c_str());
        return CN_ERR_IO;
      }
    }
    cn_string_free(text);
    return 0;
  }

  if (*dump) {
    cn_config* cfg = nullptr;
    char* text = nullptr;
    cn_status s = cn_config_default(&cfg);
    if (s == CN_OK) s = cn_config_to_json(cfg, &text);
    cn_config_free(cfg);
    if (s != CN_OK) return report_error(s);
    std::puts(text);
    cn_string_free(text);
    return 0;
  }
  return 0;
}
