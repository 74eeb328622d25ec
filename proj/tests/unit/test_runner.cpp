#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"

#include "consistnav/errors.hpp"
#include "consistnav/runner.hpp"

using namespace consistnav;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("cn_unit_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream b;
  b << in.rdbuf();
  return b.str();
}

std::string records_dump(const BatchResult& b) {
  std::string out;
  for (const auto& r : b.records) out += to_json(r).dump() + "\n";
  return out;
}

}  // namespace

TEST_CASE("episode seeds depend on every input") {
  CHECK(episode_seed(1, "a", 0) == episode_seed(1, "a", 0));
  CHECK(episode_seed(1, "a", 0) != episode_seed(2, "a", 0));
  CHECK(episode_seed(1, "a", 0) != episode_seed(1, "b", 0));
  CHECK(episode_seed(1, "a", 0) != episode_seed(1, "a", 1));
}

TEST_CASE("batches are ordered canonically and independent of thread count") {
  const auto scenarios = generate_scenarios(Preset::Office, 3, 5);
  std::vector<Scenario> shuffled{scenarios[2], scenarios[0], scenarios[1]};
  const SimConfig cfg;
  const auto one = run_batch(shuffled, {Variant::Full, Variant::Baseline}, 2, 9, cfg, 1, "");
  const auto two = run_batch(scenarios, {Variant::Baseline, Variant::Full}, 2, 9, cfg, 2, "");
  REQUIRE(one.records.size() == 12);
  CHECK_FALSE(one.incomplete);
  CHECK(records_dump(one) == records_dump(two));
  CHECK(one.records[0].scenario_id == scenarios[0].id);
  CHECK(one.records[0].variant == Variant::Baseline);
  CHECK(one.records[1].episode_index == 1);
  CHECK(one.records[2].variant == Variant::Full);
  // Variants of one (scenario, episode) share the detector seed.
  CHECK(one.records[0].seed == one.records[2].seed);
}

TEST_CASE("stopping from the progress hook marks the batch incomplete") {
  const auto scenarios = generate_scenarios(Preset::Office, 2, 5);
  BatchHooks hooks;
  hooks.progress = [](int done, int) { return done < 2; };
  const auto b = run_batch(scenarios, {Variant::Baseline, Variant::Full}, 1, 1, SimConfig{}, 1, "", hooks);
  CHECK(b.incomplete);
  CHECK(b.records.size() == 2);
}

TEST_CASE("thread count resolution honours the environment cap") {
  CHECK(resolve_thread_count(3) >= 1);
  setenv("CONSISTNAV_THREADS", "1", 1);
  CHECK(resolve_thread_count(8) == 1);
  CHECK(resolve_thread_count(0) == 1);
  unsetenv("CONSISTNAV_THREADS");
}

TEST_CASE("generation writes files and a merged index") {
  const auto dir = fresh_dir("gen");
  const SimConfig cfg;
  const auto a = generate_to_dir(Preset::Office, 3, 7, dir.string(), cfg);
  CHECK(a.size() == 3);
  generate_to_dir(Preset::Maze, 2, 7, dir.string(), cfg);
  const auto index = read_index(dir.string());
  CHECK(index.size() == 5);
  for (const auto& e : index) {
    CHECK(fs::exists(dir / e.file));
    CHECK(e.feasible);
    CHECK(e.shortest_path.value_or(0) > 0);
  }
  const auto first = slurp(dir / a[0].file);
  generate_to_dir(Preset::Office, 3, 7, dir.string(), cfg);
  CHECK(slurp(dir / a[0].file) == first);
  CHECK(read_index(dir.string()).size() == 5);
  CHECK_THROWS_AS(generate_to_dir(Preset::Office, 0, 7, dir.string(), cfg), InvalidArgument);
}

TEST_CASE("manifest validation") {
  const auto dir = fresh_dir("manifest");
  RunManifest m;
  m.scenario_dir = dir.string();
  m.out_dir = (dir / "out").string();
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
  m.variants = {Variant::Full};
  CHECK_THROWS_AS(m.validate(), IoError);
  generate_to_dir(Preset::Office, 1, 1, dir.string(), SimConfig{});
  CHECK_NOTHROW(m.validate());
  m.config_path = (dir / "nope.json").string();
  CHECK_THROWS_AS(m.validate(), IoError);
  m.config_path.clear();
  m.episodes = 0;
  CHECK_THROWS_AS(m.validate(), InvalidArgument);
}

TEST_CASE("manifest runs write deterministic results") {
  const auto dir = fresh_dir("run");
  generate_to_dir(Preset::Apartment, 2, 3, (dir / "sc").string(), SimConfig{});
  RunManifest m;
  m.scenario_dir = (dir / "sc").string();
  m.variants = {Variant::Baseline, Variant::Full};
  m.trajectories = true;
  m.threads = 1;
  m.out_dir = (dir / "a").string();
  auto ra = run_manifest(m);
  m.out_dir = (dir / "b").string();
  m.threads = 2;
  auto rb = run_manifest(m);
  CHECK(fs::exists(dir / "a" / "results.csv"));
  CHECK(fs::exists(dir / "a" / "manifest.json"));
  CHECK(ra["aggregates"].size() == 2);
  CHECK(ra["incomplete"] == false);
  ra.erase("meta");
  rb.erase("meta");
  CHECK(ra.dump() == rb.dump());
  for (const auto& r : ra["records"]) {
    const std::string rel = r["trajectory_path"];
    CHECK(slurp(dir / "a" / rel) == slurp(dir / "b" / rel));
    CHECK_FALSE(slurp(dir / "a" / rel).empty());
  }
}

TEST_CASE("reports") {
  const auto dir = fresh_dir("report");
  generate_to_dir(Preset::Office, 1, 3, (dir / "sc").string(), SimConfig{});
  RunManifest m;
  m.scenario_dir = (dir / "sc").string();
  m.variants = {kAllVariants.begin(), kAllVariants.end()};
  m.out_dir = (dir / "out").string();
  m.threads = 1;
  run_manifest(m);
  const auto results = (dir / "out" / "results.json").string();
  const auto md = report_from_file(results, ReportFormat::Markdown);
  CHECK(md.find("SR (%)") != std::string::npos);
  const auto csv = report_from_file(results, ReportFormat::Csv);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 4 + 1 + 1 + 24);
  const auto js = nlohmann::json::parse(report_from_file(results, ReportFormat::Json));
  CHECK(js["aggregates"].size() == 4);

  const nlohmann::json empty{{"records", nlohmann::json::array()}};
  CHECK(render_report(empty, ReportFormat::Markdown) == "no episodes\n");
  CHECK(render_report(empty, ReportFormat::Csv) == "no episodes\n");

  std::ofstream(dir / "broken.json") << "{\"records\": [";
  CHECK_THROWS_WITH_AS(report_from_file((dir / "broken.json").string(), ReportFormat::Markdown),
                       doctest::Contains("byte"), SchemaError);
  CHECK_THROWS_AS(report_from_file((dir / "missing.json").string(), ReportFormat::Markdown), IoError);
  CHECK(parse_report_format("md") == ReportFormat::Markdown);
  CHECK_FALSE(parse_report_format("xml").has_value());
}
