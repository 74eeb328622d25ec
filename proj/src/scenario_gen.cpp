#include "consistnav/scenario_gen.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <random>
#include <string>

#include "consistnav/errors.hpp"
#include "consistnav/sensing.hpp"

namespace consistnav {

std::string_view to_string(Preset p) {
  switch (p) {
    case Preset::Office: return "office";
    case Preset::Maze: return "maze";
    case Preset::Apartment: return "apartment";
  }
  return "?";
}

std::optional<Preset> parse_preset(std::string_view s) {
  for (auto p : {Preset::Office, Preset::Maze, Preset::Apartment}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

namespace {

constexpr double kCell = 0.1;
constexpr int kWall = 2;
constexpr int kClearance = 3;       // cells of free space around start and objects
constexpr double kObjectSpacing = 1.0;
constexpr double kMinTargetDistance = 2.0;

constexpr std::array<const char*, 4> kTargets = {"chair", "bed", "toilet", "tv"};
constexpr std::array<const char*, 8> kDistractors = {"table", "sofa", "plant", "cabinet",
                                                     "chair", "bed", "toilet", "tv"};

using Rng = std::mt19937_64;

int uniform(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void fill(OccupancyGrid& g, int x0, int y0, int x1, int y1, Cell v) {
  for (int y = std::max(0, y0); y < std::min(g.height(), y1); ++y) {
    for (int x = std::max(0, x0); x < std::min(g.width(), x1); ++x) g.set({x, y}, v);
  }
}

void border(OccupancyGrid& g) {
  fill(g, 0, 0, g.width(), 1, Cell::Occupied);
  fill(g, 0, g.height() - 1, g.width(), g.height(), Cell::Occupied);
  fill(g, 0, 0, 1, g.height(), Cell::Occupied);
  fill(g, g.width() - 1, 0, g.width(), g.height(), Cell::Occupied);
}

OccupancyGrid office(Rng& rng) {
  OccupancyGrid g(uniform(rng, 90, 120), uniform(rng, 70, 100), kCell, Cell::Free);
  border(g);
  const int cw = uniform(rng, 12, 16);
  const int cy0 = g.height() / 2 - cw / 2;
  const int lower_wall = cy0 - kWall;
  const int upper_wall = cy0 + cw;
  fill(g, 0, lower_wall, g.width(), cy0, Cell::Occupied);
  fill(g, 0, upper_wall, g.width(), upper_wall + kWall, Cell::Occupied);

  // Rows of rooms on either side of the corridor, each with one door.
  for (int side = 0; side < 2; ++side) {
    const int y0 = side == 0 ? 1 : upper_wall + kWall;
    const int y1 = side == 0 ? lower_wall : g.height() - 1;
    int x = 1;
    while (x < g.width() - 1) {
      int w = uniform(rng, 25, 40);
      if (g.width() - 1 - (x + w) < 20) w = g.width() - 1 - x;
      const int door_w = uniform(rng, 9, 12);
      const int door_x = uniform(rng, x + 2, std::max(x + 2, x + w - door_w - 2));
      const int wy0 = side == 0 ? lower_wall : upper_wall;
      fill(g, door_x, wy0, door_x + door_w, wy0 + kWall, Cell::Free);
      x += w;
      if (x < g.width() - 1) {
        fill(g, x, y0, x + kWall, y1, Cell::Occupied);
        x += kWall;
      }
    }
  }
  return g;
}

OccupancyGrid maze(Rng& rng) {
  constexpr int kCorridor = 12;
  constexpr int kPitch = kCorridor + kWall;
  const int mw = uniform(rng, 5, 7);
  const int mh = uniform(rng, 4, 6);
  OccupancyGrid g(mw * kPitch + kWall, mh * kPitch + kWall, kCell, Cell::Occupied);
  auto carve_cell = [&](int i, int j) {
    fill(g, kWall + i * kPitch, kWall + j * kPitch, kWall + i * kPitch + kCorridor, kWall + j * kPitch + kCorridor,
         Cell::Free);
  };
  std::vector<char> seen(static_cast<std::size_t>(mw) * mh, 0);
  std::vector<std::pair<int, int>> stack{{uniform(rng, 0, mw - 1), uniform(rng, 0, mh - 1)}};
  seen[stack.back().second * mw + stack.back().first] = 1;
  carve_cell(stack.back().first, stack.back().second);
  constexpr std::array<std::pair<int, int>, 4> kDirs{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    std::vector<std::pair<int, int>> options;
    for (const auto& [dx, dy] : kDirs) {
      const int ni = i + dx;
      const int nj = j + dy;
      if (ni >= 0 && nj >= 0 && ni < mw && nj < mh && !seen[nj * mw + ni]) options.push_back({dx, dy});
    }
    if (options.empty()) {
      stack.pop_back();
      continue;
    }
    const auto [dx, dy] = options[uniform(rng, 0, static_cast<int>(options.size()) - 1)];
    const int ni = i + dx;
    const int nj = j + dy;
    seen[nj * mw + ni] = 1;
    carve_cell(ni, nj);
    // open the wall between the two maze cells
    const int x0 = kWall + std::min(i, ni) * kPitch;
    const int y0 = kWall + std::min(j, nj) * kPitch;
    if (dx != 0) {
      fill(g, x0 + kCorridor, y0, x0 + kPitch, y0 + kCorridor, Cell::Free);
    } else {
      fill(g, x0, y0 + kCorridor, x0 + kCorridor, y0 + kPitch, Cell::Free);
    }
    stack.push_back({ni, nj});
  }
  return g;
}

struct Rect {
  int x0, y0, x1, y1;
};

struct Split {
  bool vertical;  // wall runs along y at x = pos
  int pos;
  int lo, hi;     // span of the wall
};

void bsp(OccupancyGrid& g, Rng& rng, Rect r, std::vector<Split>& splits, std::vector<Rect>& leaves) {
  const int w = r.x1 - r.x0;
  const int h = r.y1 - r.y0;
  constexpr int kMaxRoom = 45;
  if (w <= kMaxRoom && h <= kMaxRoom) {
    leaves.push_back(r);
    return;
  }
  const bool vertical = w >= h;
  const int span = vertical ? w : h;
  const int pos = (vertical ? r.x0 : r.y0) + uniform(rng, span * 35 / 100, span * 65 / 100);
  if (vertical) {
    fill(g, pos, r.y0, pos + kWall, r.y1, Cell::Occupied);
    splits.push_back({true, pos, r.y0, r.y1});
    bsp(g, rng, {r.x0, r.y0, pos, r.y1}, splits, leaves);
    bsp(g, rng, {pos + kWall, r.y0, r.x1, r.y1}, splits, leaves);
  } else {
    fill(g, r.x0, pos, r.x1, pos + kWall, Cell::Occupied);
    splits.push_back({false, pos, r.x0, r.x1});
    bsp(g, rng, {r.x0, r.y0, r.x1, pos}, splits, leaves);
    bsp(g, rng, {r.x0, pos + kWall, r.x1, r.y1}, splits, leaves);
  }
}

OccupancyGrid apartment(Rng& rng) {
  OccupancyGrid g(uniform(rng, 90, 120), uniform(rng, 80, 110), kCell, Cell::Free);
  border(g);
  std::vector<Split> splits;
  std::vector<Rect> leaves;
  bsp(g, rng, {1, 1, g.width() - 1, g.height() - 1}, splits, leaves);

  constexpr int kDoor = 10;
  for (const auto& s : splits) {
    for (int attempt = 0; attempt < 40; ++attempt) {
      if (s.hi - s.lo - kDoor - 4 < 0) break;
      const int at = uniform(rng, s.lo + 2, s.hi - kDoor - 2);
      bool ok = true;
      for (int k = at; k < at + kDoor && ok; ++k) {
        const CellIndex before = s.vertical ? CellIndex{s.pos - 1, k} : CellIndex{k, s.pos - 1};
        const CellIndex after = s.vertical ? CellIndex{s.pos + kWall, k} : CellIndex{k, s.pos + kWall};
        ok = g.is_free(before) && g.is_free(after);
      }
      if (!ok) continue;
      if (s.vertical) {
        fill(g, s.pos, at, s.pos + kWall, at + kDoor, Cell::Free);
      } else {
        fill(g, at, s.pos, at + kDoor, s.pos + kWall, Cell::Free);
      }
      break;
    }
  }

  // Furniture blobs away from the walls so doors stay open.
  for (const auto& r : leaves) {
    const int blobs = uniform(rng, 0, 2);
    for (int b = 0; b < blobs; ++b) {
      const int bw = uniform(rng, 4, 10);
      const int bh = uniform(rng, 4, 10);
      if (r.x1 - r.x0 < bw + 14 || r.y1 - r.y0 < bh + 14) continue;
      const int x = uniform(rng, r.x0 + 7, r.x1 - 7 - bw);
      const int y = uniform(rng, r.y0 + 7, r.y1 - 7 - bh);
      fill(g, x, y, x + bw, y + bh, Cell::Occupied);
    }
  }
  return g;
}

bool clear_around(const OccupancyGrid& g, CellIndex c) {
  for (int dy = -kClearance; dy <= kClearance; ++dy) {
    for (int dx = -kClearance; dx <= kClearance; ++dx) {
      if (!g.is_free({c.x + dx, c.y + dy})) return false;
    }
  }
  return true;
}

// Keeps the 4-connected free component of `start`; everything else becomes
// Occupied.
void keep_component(OccupancyGrid& g, CellIndex start) {
  std::vector<char> mark(g.size(), 0);
  std::vector<std::size_t> stack{g.index(start)};
  mark[stack.back()] = 1;
  constexpr std::array<std::pair<int, int>, 4> kN{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  while (!stack.empty()) {
    const CellIndex c = g.cell_of(stack.back());
    stack.pop_back();
    for (const auto& [dx, dy] : kN) {
      const CellIndex n{c.x + dx, c.y + dy};
      if (g.is_free(n) && !mark[g.index(n)]) {
        mark[g.index(n)] = 1;
        stack.push_back(g.index(n));
      }
    }
  }
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!mark[i]) g.set_raw(i, Cell::Occupied);
  }
}

std::optional<CellIndex> random_clear_cell(const OccupancyGrid& g, Rng& rng) {
  for (int attempt = 0; attempt < 5000; ++attempt) {
    const CellIndex c{uniform(rng, 0, g.width() - 1), uniform(rng, 0, g.height() - 1)};
    if (clear_around(g, c)) return c;
  }
  return std::nullopt;
}

Scenario build(Preset preset, Rng& rng, const std::string& id) {
  for (int attempt = 0; attempt < 50; ++attempt) {
    Scenario s;
    s.id = id;
    s.preset = std::string(to_string(preset));
    switch (preset) {
      case Preset::Office: s.grid = office(rng); break;
      case Preset::Maze: s.grid = maze(rng); break;
      case Preset::Apartment: s.grid = apartment(rng); break;
    }
    const auto start = random_clear_cell(s.grid, rng);
    if (!start) continue;
    keep_component(s.grid, *start);
    const double heading = uniform(rng, 0, 11) * std::numbers::pi / 6.0;
    s.start = Pose(cell_center(*start, kCell), heading);

    const std::string target = kTargets[uniform(rng, 0, static_cast<int>(kTargets.size()) - 1)];
    s.target_category = target;
    const int distractors = uniform(rng, 2, 6);
    std::vector<Vec2> placed;
    auto place = [&](double min_start) -> std::optional<Vec2> {
      for (int k = 0; k < 500; ++k) {
        const auto c = random_clear_cell(s.grid, rng);
        if (!c) return std::nullopt;
        const Vec2 p = cell_center(*c, kCell);
        if (euclidean_distance(p, s.start.position()) < min_start) continue;
        bool spaced = std::all_of(placed.begin(), placed.end(),
                                  [&](Vec2 q) { return euclidean_distance(p, q) >= kObjectSpacing; });
        if (spaced) return p;
      }
      return std::nullopt;
    };
    const auto tp = place(kMinTargetDistance);
    if (!tp) continue;
    placed.push_back(*tp);
    s.objects.push_back({*tp, target, true});
    bool ok = true;
    for (int d = 0; d < distractors; ++d) {
      const auto p = place(0.5);
      if (!p) {
        ok = false;
        break;
      }
      std::string cat;
      do {
        cat = kDistractors[uniform(rng, 0, static_cast<int>(kDistractors.size()) - 1)];
      } while (cat == target);
      placed.push_back(*p);
      s.objects.push_back({*p, cat, false});
    }
    if (!ok) continue;
    validate(s);
    return s;
  }
  throw ConsistencyError("scenario generator could not place objects for " + id);
}

}  // namespace

std::vector<Scenario> generate_scenarios(Preset preset, int count, std::uint64_t seed) {
  if (count <= 0) throw InvalidArgument("scenario count must be positive");
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(i) * 3 + static_cast<std::uint64_t>(preset)));
    char id[64];
    std::snprintf(id, sizeof id, "%s_%llu_%03d", std::string(to_string(preset)).c_str(),
                  static_cast<unsigned long long>(seed), i);
    out.push_back(build(preset, rng, id));
  }
  return out;
}

}  // namespace consistnav
