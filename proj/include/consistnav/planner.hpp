#pragma once

#include <optional>
#include <vector>

#include "consistnav/grid.hpp"

namespace consistnav {

inline constexpr double kSqrt2 = 1.4142135623730951;

struct GridPath {
  std::vector<CellIndex> cells;  // from .. to inclusive
  double cost = 0.0;             // in cell units
};

// Shortest 8-connected path over Free cells. Diagonal steps cost sqrt(2)
// and may not cut an Occupied/Unknown corner. Neighbour order is fixed so
// equal-cost ties resolve the same way every run. Throws InvalidArgument
// if `from` is not Free.
std::optional<GridPath> plan_path(const OccupancyGrid& grid, CellIndex from, CellIndex to);

// Single-source costs (cell units) to every Free cell reachable from
// `source`; unreachable cells hold +inf.
std::vector<double> distance_field(const OccupancyGrid& grid, CellIndex source);

// Walks a distance_field back from `goal` to its source; nullopt when the
// goal is unreachable.
std::optional<GridPath> path_from_field(const OccupancyGrid& grid, const std::vector<double>& field, CellIndex goal);

struct Frontier {
  CellIndex cell;  // cluster cell nearest the cluster centroid
  int size = 0;
};

inline constexpr int kMinFrontierCluster = 3;

// Free cells 4-adjacent to Unknown, clustered with 8-connectivity; clusters
// smaller than min_cluster are dropped. Ordered by first cell in row-major
// scan order.
std::vector<Frontier> detect_frontiers(const OccupancyGrid& grid, int min_cluster = kMinFrontierCluster);

bool is_frontier_cell(const OccupancyGrid& grid, CellIndex c);

}  // namespace consistnav
