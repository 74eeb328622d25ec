#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <limits>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "consistnav/geometry.hpp"

namespace consistnav {

enum class Cell : std::uint8_t { Free, Occupied, Unknown };

struct CellIndex {
  int x = 0;
  int y = 0;
  auto operator<=>(const CellIndex&) const = default;
};

class OccupancyGrid {
 public:
  OccupancyGrid() = default;
  OccupancyGrid(int width, int height, double cell_size, Cell fill);

  int width() const { return width_; }
  int height() const { return height_; }
  double cell_size() const { return cell_size_; }
  std::size_t size() const { return cells_.size(); }

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  bool contains(Vec2 p) const;

  Cell at(CellIndex c) const;
  void set(CellIndex c, Cell v);
  // Unchecked access by flat index; callers guarantee range.
  Cell raw(std::size_t i) const { return cells_[i]; }
  void set_raw(std::size_t i, Cell v) { cells_[i] = v; }

  std::size_t index(CellIndex c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
  CellIndex cell_of(std::size_t i) const {
    return {static_cast<int>(i % width_), static_cast<int>(i / width_)};
  }

  bool is_free(CellIndex c) const { return in_bounds(c) && cells_[index(c)] == Cell::Free; }

  std::size_t count(Cell v) const;

  const std::vector<Cell>& cells() const { return cells_; }

 private:
  int width_ = 0;
  int height_ = 0;
  double cell_size_ = 0.1;
  std::vector<Cell> cells_;
};

// Floor division by cell size. A coordinate lying exactly on a cell edge
// belongs to the higher-index cell. Throws BoundsError outside the grid.
CellIndex world_to_cell(Vec2 p, const OccupancyGrid& grid);
Vec2 cell_center(CellIndex c, double cell_size);

// Unchecked floor-with-convention used by world_to_cell.
inline int floor_cell(double coord, double cell_size) {
  return static_cast<int>(std::floor(coord / cell_size + 1e-9));
}

// Visits the cells crossed by the segment a->b in traversal order, ending
// with the cell that owns b. Passing exactly through a shared corner steps
// diagonally without visiting the two cells that only touch the corner.
// The visitor returns false to stop early; the function returns false iff
// the visitor stopped it.
template <typename Visitor>
bool for_each_segment_cell(Vec2 a, Vec2 b, double cell_size, Visitor&& visit) {
  int cx = floor_cell(a.x, cell_size);
  int cy = floor_cell(a.y, cell_size);
  const int ex = floor_cell(b.x, cell_size);
  const int ey = floor_cell(b.y, cell_size);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double kInf = std::numeric_limits<double>::infinity();
  double t_max_x = kInf, t_max_y = kInf, t_delta_x = kInf, t_delta_y = kInf;
  if (step_x != 0) {
    const double edge = step_x > 0 ? (cx + 1) * cell_size : cx * cell_size;
    t_max_x = std::abs(edge - a.x) / std::abs(dx);
    t_delta_x = cell_size / std::abs(dx);
  }
  if (step_y != 0) {
    const double edge = step_y > 0 ? (cy + 1) * cell_size : cy * cell_size;
    t_max_y = std::abs(edge - a.y) / std::abs(dy);
    t_delta_y = cell_size / std::abs(dy);
  }
  constexpr double kTie = 1e-9;
  for (;;) {
    if (!visit(CellIndex{cx, cy})) return false;
    const double t_next = std::min(t_max_x, t_max_y);
    if (t_next >= 1.0 - kTie) break;
    if (t_max_x < t_max_y - kTie) {
      cx += step_x;
      t_max_x += t_delta_x;
    } else if (t_max_y < t_max_x - kTie) {
      cy += step_y;
      t_max_y += t_delta_y;
    } else {
      cx += step_x;
      cy += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    }
  }
  if (cx != ex || cy != ey) return visit(CellIndex{ex, ey});
  return true;
}

std::vector<CellIndex> traverse_segment(Vec2 a, Vec2 b, double cell_size);

// True when every traversed cell is in bounds and Free.
bool segment_clear(const OccupancyGrid& grid, Vec2 a, Vec2 b);

}  // namespace consistnav
