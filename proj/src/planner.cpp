#include "consistnav/planner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <utility>

#include "consistnav/errors.hpp"

namespace consistnav {

namespace {

struct Step {
  int dx, dy;
  double cost;
};

constexpr std::array<Step, 8> kSteps{{{1, 0, 1.0},
                                      {-1, 0, 1.0},
                                      {0, 1, 1.0},
                                      {0, -1, 1.0},
                                      {1, 1, kSqrt2},
                                      {-1, 1, kSqrt2},
                                      {1, -1, kSqrt2},
                                      {-1, -1, kSqrt2}}};

bool free_at(const OccupancyGrid& g, int x, int y) {
  return x >= 0 && y >= 0 && x < g.width() && y < g.height() &&
         g.raw(static_cast<std::size_t>(y) * g.width() + x) == Cell::Free;
}

// Diagonal moves need both orthogonal neighbours free.
bool can_step(const OccupancyGrid& g, int x, int y, const Step& s) {
  if (!free_at(g, x + s.dx, y + s.dy)) return false;
  if (s.dx != 0 && s.dy != 0) return free_at(g, x + s.dx, y) && free_at(g, x, y + s.dy);
  return true;
}

double octile(CellIndex a, CellIndex b) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  return (kSqrt2 - 1.0) * std::min(dx, dy) + std::max(dx, dy);
}

using QueueItem = std::pair<double, std::size_t>;
using MinQueue = std::priority_queue<QueueItem, std::vector<QueueItem>, std::greater<>>;

}  // namespace

std::optional<GridPath> plan_path(const OccupancyGrid& grid, CellIndex from, CellIndex to) {
  if (!grid.is_free(from)) throw InvalidArgument("plan_path: start cell is not free");
  if (!grid.is_free(to)) return std::nullopt;
  if (from == to) return GridPath{{from}, 0.0};

  constexpr double kInf = std::numeric_limits<double>::infinity();
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<double> g(grid.size(), kInf);
  std::vector<std::size_t> parent(grid.size(), kNone);
  std::vector<char> closed(grid.size(), 0);
  MinQueue open;
  const std::size_t start = grid.index(from);
  const std::size_t goal = grid.index(to);
  g[start] = 0.0;
  open.push({octile(from, to), start});

  while (!open.empty()) {
    const auto [f, cur] = open.top();
    open.pop();
    if (closed[cur]) continue;
    closed[cur] = 1;
    if (cur == goal) break;
    const CellIndex c = grid.cell_of(cur);
    for (const Step& s : kSteps) {
      if (!can_step(grid, c.x, c.y, s)) continue;
      const CellIndex n{c.x + s.dx, c.y + s.dy};
      const std::size_t ni = grid.index(n);
      if (closed[ni]) continue;
      const double cand = g[cur] + s.cost;
      if (cand < g[ni] - 1e-12) {
        g[ni] = cand;
        parent[ni] = cur;
        open.push({cand + octile(n, to), ni});
      }
    }
  }
  if (!closed[goal]) return std::nullopt;

  GridPath path;
  path.cost = g[goal];
  for (std::size_t i = goal; i != kNone; i = parent[i]) path.cells.push_back(grid.cell_of(i));
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

std::vector<double> distance_field(const OccupancyGrid& grid, CellIndex source) {
  std::vector<double> dist(grid.size(), std::numeric_limits<double>::infinity());
  if (!grid.is_free(source)) return dist;
  MinQueue open;
  const std::size_t s = grid.index(source);
  dist[s] = 0.0;
  open.push({0.0, s});
  while (!open.empty()) {
    const auto [d, cur] = open.top();
    open.pop();
    if (d > dist[cur]) continue;
    const CellIndex c = grid.cell_of(cur);
    for (const Step& st : kSteps) {
      if (!can_step(grid, c.x, c.y, st)) continue;
      const std::size_t ni = grid.index({c.x + st.dx, c.y + st.dy});
      const double cand = d + st.cost;
      if (cand < dist[ni] - 1e-12) {
        dist[ni] = cand;
        open.push({cand, ni});
      }
    }
  }
  return dist;
}

std::optional<GridPath> path_from_field(const OccupancyGrid& grid, const std::vector<double>& field, CellIndex goal) {
  if (!grid.in_bounds(goal) || field.size() != grid.size()) return std::nullopt;
  const double total = field[grid.index(goal)];
  if (!std::isfinite(total)) return std::nullopt;
  GridPath path;
  path.cost = total;
  CellIndex cur = goal;
  path.cells.push_back(cur);
  while (field[grid.index(cur)] > 0.0) {
    const double here = field[grid.index(cur)];
    std::optional<CellIndex> prev;
    for (const Step& s : kSteps) {
      // moves are symmetric, so a step from cur is also a step into cur
      if (!can_step(grid, cur.x, cur.y, s)) continue;
      const CellIndex n{cur.x + s.dx, cur.y + s.dy};
      if (std::abs(field[grid.index(n)] + s.cost - here) < 1e-6) {
        prev = n;
        break;
      }
    }
    if (!prev) throw ConsistencyError("distance field has no predecessor");
    cur = *prev;
    path.cells.push_back(cur);
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

bool is_frontier_cell(const OccupancyGrid& grid, CellIndex c) {
  if (!grid.is_free(c)) return false;
  constexpr std::array<std::pair<int, int>, 4> kN{{{1, 0}, {-1, 0}, {0, 1}, {0, -1}}};
  for (const auto& [dx, dy] : kN) {
    const CellIndex n{c.x + dx, c.y + dy};
    if (grid.in_bounds(n) && grid.raw(grid.index(n)) == Cell::Unknown) return true;
  }
  return false;
}

std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid, int min_cluster) {
  std::vector<char> is_frontier(grid.size(), 0);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid.raw(i) == Cell::Free && is_frontier_cell(grid, grid.cell_of(i))) is_frontier[i] = 1;
  }
  std::vector<char> seen(grid.size(), 0);
  std::vector<Frontier> out;
  std::vector<std::size_t> cluster;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!is_frontier[i] || seen[i]) continue;
    cluster.clear();
    stack.assign(1, i);
    seen[i] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      cluster.push_back(cur);
      const CellIndex c = grid.cell_of(cur);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const CellIndex n{c.x + dx, c.y + dy};
          if ((dx == 0 && dy == 0) || !grid.in_bounds(n)) continue;
          const std::size_t ni = grid.index(n);
          if (is_frontier[ni] && !seen[ni]) {
            seen[ni] = 1;
            stack.push_back(ni);
          }
        }
      }
    }
    if (static_cast<int>(cluster.size()) < min_cluster) continue;
    std::sort(cluster.begin(), cluster.end());
    double sx = 0, sy = 0;
    for (std::size_t ci : cluster) {
      const CellIndex c = grid.cell_of(ci);
      sx += c.x;
      sy += c.y;
    }
    const double cx = sx / cluster.size();
    const double cy = sy / cluster.size();
    std::size_t best = cluster.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t ci : cluster) {
      const CellIndex c = grid.cell_of(ci);
      const double d = std::hypot(c.x - cx, c.y - cy);
      if (d < best_d - 1e-12) {
        best_d = d;
        best = ci;
      }
    }
    out.push_back({grid.cell_of(best), static_cast<int>(cluster.size())});
  }
  return out;
}

}  // namespace consistnav
