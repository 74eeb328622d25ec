#include "consistnav/grid.hpp"

#include <algorithm>
#include <string>

#include "consistnav/errors.hpp"

namespace consistnav {

OccupancyGrid::OccupancyGrid(int width, int height, double cell_size, Cell fill)
    : width_(width), height_(height), cell_size_(cell_size) {
  if (width <= 0 || height <= 0) throw InvalidArgument("OccupancyGrid: dimensions must be positive");
  if (!(cell_size > 0.0) || !std::isfinite(cell_size)) {
    throw InvalidArgument("OccupancyGrid: cell_size must be positive");
  }
  cells_.assign(static_cast<std::size_t>(width) * height, fill);
}

bool OccupancyGrid::contains(Vec2 p) const {
  if (!p.finite()) return false;
  return in_bounds({floor_cell(p.x, cell_size_), floor_cell(p.y, cell_size_)}) && p.x >= 0.0 && p.y >= 0.0;
}

Cell OccupancyGrid::at(CellIndex c) const {
  if (!in_bounds(c)) {
    throw BoundsError("cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") outside grid");
  }
  return cells_[index(c)];
}

void OccupancyGrid::set(CellIndex c, Cell v) {
  if (!in_bounds(c)) {
    throw BoundsError("cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") outside grid");
  }
  cells_[index(c)] = v;
}

std::size_t OccupancyGrid::count(Cell v) const { return std::count(cells_.begin(), cells_.end(), v); }

CellIndex world_to_cell(Vec2 p, const OccupancyGrid& grid) {
  if (!grid.contains(p)) {
    throw BoundsError("point (" + std::to_string(p.x) + "," + std::to_string(p.y) + ") outside grid");
  }
  return {floor_cell(p.x, grid.cell_size()), floor_cell(p.y, grid.cell_size())};
}

Vec2 cell_center(CellIndex c, double cell_size) {
  return {(c.x + 0.5) * cell_size, (c.y + 0.5) * cell_size};
}

std::vector<CellIndex> traverse_segment(Vec2 a, Vec2 b, double cell_size) {
  std::vector<CellIndex> out;
  for_each_segment_cell(a, b, cell_size, [&](CellIndex c) {
    out.push_back(c);
    return true;
  });
  return out;
}

bool segment_clear(const OccupancyGrid& grid, Vec2 a, Vec2 b) {
  return for_each_segment_cell(a, b, grid.cell_size(), [&](CellIndex c) { return grid.is_free(c); });
}

}  // namespace consistnav
