#include "fixtures.hpp"

#include <stdexcept>

#include "consistnav/fse_controller.hpp"

namespace consistnav::testkit {

Scenario from_ascii(const std::vector<std::string>& rows, double cell_size, std::string id) {
  if (rows.empty()) throw std::invalid_argument("from_ascii: no rows");
  const int h = static_cast<int>(rows.size());
  const int w = static_cast<int>(rows.front().size());
  Scenario s;
  s.id = std::move(id);
  s.preset = "fixture";
  s.target_category = "chair";
  s.grid = OccupancyGrid(w, h, cell_size, Cell::Free);
  for (int r = 0; r < h; ++r) {
    if (static_cast<int>(rows[r].size()) != w) throw std::invalid_argument("from_ascii: ragged rows");
    const int y = h - 1 - r;
    for (int x = 0; x < w; ++x) {
      const char ch = rows[r][x];
      const Vec2 c = cell_center({x, y}, cell_size);
      switch (ch) {
        case '#': s.grid.set({x, y}, Cell::Occupied); break;
        case 'T': s.objects.push_back({c, "chair", true}); break;
        case 'D': s.objects.push_back({c, "sofa", false}); break;
        case 'S': s.start = Pose(c, 0.0); break;
        default: break;
      }
    }
  }
  validate(s);
  return s;
}

SimConfig clean_config() {
  SimConfig cfg;
  cfg.detector.p_detect = 1.0;
  cfg.detector.p_confuse = 0.0;
  cfg.detector.p_hallucinate = 0.0;
  cfg.detector.pos_noise_sd = 0.0;
  cfg.detector.conf_true_sd = 0.0;
  cfg.detector.itm_true_sd = 0.0;
  return cfg;
}

namespace {

std::vector<std::string> room(int w, int h) {
  std::vector<std::string> rows(h, std::string(w, '.'));
  for (int x = 0; x < w; ++x) rows.front()[x] = rows.back()[x] = '#';
  for (auto& r : rows) r.front() = r.back() = '#';
  return rows;
}

}  // namespace

Fixture sealed_room() {
  auto rows = room(40, 20);
  for (int r = 0; r < 20; ++r) rows[r][25] = '#';
  rows[10][5] = 'S';
  rows[10][32] = 'T';
  return {"sealed_room", from_ascii(rows, 0.1, "fixture_sealed"), clean_config(), Outcome::Infeasible};
}

Fixture tiny_closed_map() {
  // Room interior rows 3..14; the alcove climbs one cell through the top
  // wall (row 2) and turns right along row 1.
  auto rows = room(24, 16);
  rows[0] = std::string(24, '#');
  rows[1] = "#" + std::string(22, '#') + "#";
  rows[2] = std::string(24, '#');
  rows[2][12] = '.';
  for (int x = 12; x <= 16; ++x) rows[1][x] = '.';
  rows[1][16] = 'T';
  rows[9][5] = 'S';
  return {"tiny_closed_map", from_ascii(rows, 0.1, "fixture_tiny"), clean_config(), Outcome::FrontierExhaustion};
}

Fixture visible_never_committed() {
  auto rows = room(30, 20);
  rows[10][4] = 'S';
  rows[10][22] = 'T';
  SimConfig cfg = clean_config();
  cfg.detector.p_detect = 0.0;
  return {"visible_never_committed", from_ascii(rows, 0.1, "fixture_missing"), cfg, Outcome::MissingTarget};
}

Fixture blackout(std::uint64_t seed) {
  auto rows = room(50, 24);
  rows[12][4] = 'S';
  rows[12][38] = 'T';
  Fixture f{"blackout", from_ascii(rows, 0.1, "fixture_blackout"), clean_config(), Outcome::UnstableCommitment};
  // Find where the clean run first commits, then cut the detector there.
  const auto probe = run_episode(f.scenario, Variant::Full, f.config, seed);
  for (const auto& s : probe.steps) {
    if (s.state && *s.state == ExecutiveState::Approach) {
      f.config.detector.blackout_from = s.t;
      break;
    }
  }
  if (f.config.detector.blackout_from < 0) throw std::runtime_error("blackout fixture: clean run never committed");
  return f;
}

std::vector<Fixture> taxonomy_fixtures(std::uint64_t seed) {
  return {blackout(seed), sealed_room(), tiny_closed_map(), visible_never_committed()};
}

}  // namespace consistnav::testkit
