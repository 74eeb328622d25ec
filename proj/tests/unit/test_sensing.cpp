#include <numbers>

#include "doctest.h"

#include "consistnav/errors.hpp"
#include "consistnav/sensing.hpp"
#include "fixtures.hpp"

using namespace consistnav;
using std::numbers::pi;

namespace {

// 8 m x 3 m open room, agent at the left looking +x.
Scenario open_room() {
  std::vector<std::string> rows(30, std::string(80, '.'));
  for (auto& r : rows) r.front() = r.back() = '#';
  rows.front() = rows.back() = std::string(80, '#');
  rows[15][5] = 'S';
  return testkit::from_ascii(rows, 0.1, "open");
}

}  // namespace

TEST_CASE("view cone and range") {
  const Pose pose({0, 0}, 0);
  CHECK(in_view_cone(pose, {1, 0}, 5.0, 79 * pi / 180));
  CHECK_FALSE(in_view_cone(pose, {6, 0}, 5.0, 79 * pi / 180));
  CHECK_FALSE(in_view_cone(pose, {-1, 0}, 5.0, 79 * pi / 180));
  CHECK(in_view_cone(pose, {1, 0.8}, 5.0, 79 * pi / 180));
  CHECK_FALSE(in_view_cone(pose, {1, 0.9}, 5.0, 79 * pi / 180));
}

TEST_CASE("object visibility: range, clear line, occlusion") {
  auto s = open_room();
  const Pose pose = s.start;
  const Vec2 p = pose.position();
  s.objects = {{p + Vec2{1.0, 0.0}, "chair", true}, {p + Vec2{6.0, 0.0}, "sofa", false},
               {p + Vec2{2.5, 0.0}, "sofa", false}};
  s.target_category = "chair";
  const DetectorConfig cfg;
  auto v = raycast_visible(s, pose, cfg);
  CHECK(v.objects == std::vector<std::size_t>{0, 2});
  // A wall cell between the agent and the third object.
  s.grid.set(world_to_cell(p + Vec2{2.0, 0.0}, s.grid), Cell::Occupied);
  v = raycast_visible(s, pose, cfg);
  CHECK(v.objects == std::vector<std::size_t>{0});
}

TEST_CASE("detector with every channel off reports nothing") {
  auto s = open_room();
  s.objects = {{s.start.position() + Vec2{1, 0}, "chair", true}, {s.start.position() + Vec2{2, 0}, "sofa", false}};
  DetectorConfig cfg;
  cfg.p_detect = 0;
  cfg.p_confuse = 0;
  cfg.p_hallucinate = 0;
  const auto vis = raycast_visible(s, s.start, cfg);
  for (int t = 0; t < 50; ++t) {
    auto rng = step_rng(1, t);
    CHECK(synth_detect(s, vis, s.start, cfg, t, rng).empty());
  }
}

TEST_CASE("certain noiseless detection lands on the object") {
  auto s = open_room();
  const Vec2 target = s.start.position() + Vec2{1, 0};
  s.objects = {{target, "chair", true}};
  auto cfg = testkit::clean_config().detector;
  const auto vis = raycast_visible(s, s.start, cfg);
  auto rng = step_rng(3, 0);
  const auto out = synth_detect(s, vis, s.start, cfg, 0, rng);
  REQUIRE(out.size() == 1);
  CHECK(out[0].world_pos == target);
  CHECK(out[0].is_target);
  CHECK(out[0].confidence == doctest::Approx(cfg.conf_true_mean));
  CHECK(out[0].step == 0);
}

TEST_CASE("distractors give non-target detections unless confused") {
  auto s = open_room();
  s.objects = {{s.start.position() + Vec2{1, 0}, "sofa", false}};
  auto cfg = testkit::clean_config().detector;
  const auto vis = raycast_visible(s, s.start, cfg);
  auto rng = step_rng(3, 0);
  auto out = synth_detect(s, vis, s.start, cfg, 0, rng);
  REQUIRE(out.size() == 1);
  CHECK_FALSE(out[0].is_target);
  cfg.p_confuse = 1.0;
  rng = step_rng(3, 0);
  out = synth_detect(s, vis, s.start, cfg, 0, rng);
  REQUIRE(out.size() == 1);
  CHECK(out[0].is_target);
}

TEST_CASE("hallucinations land on visible free cells") {
  auto s = open_room();
  s.objects.clear();
  s.objects.push_back({{7.5, 1.5}, "chair", true});
  DetectorConfig cfg;
  cfg.p_hallucinate = 1.0;
  const auto vis = raycast_visible(s, s.start, cfg);
  int seen = 0;
  for (int t = 0; t < 40; ++t) {
    auto rng = step_rng(9, t);
    for (const auto& o : synth_detect(s, vis, s.start, cfg, t, rng)) {
      if (euclidean_distance(o.world_pos, {7.5, 1.5}) < 1.0) continue;
      ++seen;
      CHECK(o.is_target);
      CHECK(cell_visible(s.grid, s.start, world_to_cell(o.world_pos, s.grid), cfg));
    }
  }
  CHECK(seen > 30);
}

TEST_CASE("blackout window silences the detector") {
  auto s = open_room();
  s.objects = {{s.start.position() + Vec2{1, 0}, "chair", true}};
  auto cfg = testkit::clean_config().detector;
  cfg.blackout_from = 5;
  cfg.blackout_until = 8;
  const auto vis = raycast_visible(s, s.start, cfg);
  for (int t = 0; t < 10; ++t) {
    auto rng = step_rng(1, t);
    CHECK(synth_detect(s, vis, s.start, cfg, t, rng).empty() == (t >= 5 && t < 8));
  }
}

TEST_CASE("same seed and step give the same draws") {
  auto s = open_room();
  s.objects = {{s.start.position() + Vec2{1, 0}, "chair", true}, {s.start.position() + Vec2{2, 0.3}, "sofa", false}};
  DetectorConfig cfg;
  cfg.p_hallucinate = 0.5;
  const auto vis = raycast_visible(s, s.start, cfg);
  for (int t = 0; t < 20; ++t) {
    auto a = step_rng(77, t), b = step_rng(77, t);
    const auto x = synth_detect(s, vis, s.start, cfg, t, a);
    const auto y = synth_detect(s, vis, s.start, cfg, t, b);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      CHECK(x[i].world_pos == y[i].world_pos);
      CHECK(x[i].confidence == y[i].confidence);
      CHECK(x[i].itm_score == y[i].itm_score);
    }
  }
  CHECK(mix_seed(1, 2) != mix_seed(2, 1));
}

TEST_CASE("motion model") {
  const auto s = open_room();
  const EpisodeConfig cfg;
  auto r = step_dynamics(s.grid, s.start, Action::Forward, cfg);
  CHECK_FALSE(r.collided);
  CHECK(euclidean_distance(r.pose.position(), s.start.position()) == doctest::Approx(0.25));

  const Pose at_wall({0.15, 1.55}, pi);
  r = step_dynamics(s.grid, at_wall, Action::Forward, cfg);
  CHECK(r.collided);
  CHECK(r.pose.position() == at_wall.position());

  const auto l = step_dynamics(s.grid, s.start, Action::Left, cfg).pose;
  CHECK(l.heading() == doctest::Approx(pi / 6));
  const auto back = step_dynamics(s.grid, l, Action::Right, cfg).pose;
  CHECK(std::abs(angle_diff(back.heading(), s.start.heading())) < 1e-12);
  CHECK_THROWS_AS(step_dynamics(s.grid, s.start, Action::Stop, cfg), InvalidArgument);
}

TEST_CASE("discovered map grows from the view cone") {
  const auto s = open_room();
  const DetectorConfig det;
  OccupancyGrid known(s.grid.width(), s.grid.height(), s.grid.cell_size(), Cell::Unknown);
  const auto first = update_discovered_map(known, s.grid, s.start, det.sensing_range, det.fov);
  CHECK(first > 0);
  // Nothing behind the agent yet.
  CHECK(known.at(world_to_cell(s.start.position() - Vec2{0.3, 0}, s.grid)) == Cell::Unknown);
  // Everything revealed is in the cone (or the agent's own cell).
  for (std::size_t i = 0; i < known.size(); ++i) {
    if (known.raw(i) == Cell::Unknown) continue;
    const Vec2 c = cell_center(known.cell_of(i), known.cell_size());
    const bool own = known.cell_of(i) == world_to_cell(s.start.position(), s.grid);
    CHECK((own || in_view_cone(s.start, c, det.sensing_range + 0.2, det.fov + 0.2)));
    CHECK(known.raw(i) == s.grid.raw(i));
  }
  // Idempotent under repetition.
  const auto snapshot = known.cells();
  CHECK(update_discovered_map(known, s.grid, s.start, det.sensing_range, det.fov) == 0);
  CHECK(known.cells() == snapshot);

  // A full sweep learns every free cell within range.
  Pose p = s.start;
  for (int k = 0; k < 12; ++k) {
    p = Pose(p.position(), p.heading() + pi / 6);
    update_discovered_map(known, s.grid, p, det.sensing_range, det.fov);
  }
  for (int y = 0; y < s.grid.height(); ++y) {
    for (int x = 0; x < s.grid.width(); ++x) {
      const Vec2 c = cell_center({x, y}, 0.1);
      if (s.grid.is_free({x, y}) && euclidean_distance(c, p.position()) < det.sensing_range - 0.1) {
        CHECK(known.at({x, y}) == Cell::Free);
      }
    }
  }
}

TEST_CASE("detector and episode config validation") {
  DetectorConfig d;
  d.p_detect = 1.5;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  d = {};
  d.conf_true_sd = -0.1;
  CHECK_THROWS_AS(d.validate(), InvalidArgument);
  EpisodeConfig e;
  e.max_steps = 0;
  CHECK_THROWS_AS(e.validate(), InvalidArgument);
  e = {};
  e.success_radius = 0;
  CHECK_THROWS_AS(e.validate(), InvalidArgument);
}
