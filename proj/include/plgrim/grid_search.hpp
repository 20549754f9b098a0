#pragma once

#include <functional>
#include <limits>
#include <span>
#include <unordered_map>
#include <vector>

#include "plgrim/geometry.hpp"

namespace plgrim::grid_search {

using PassableFn = std::function<bool(CellIndex)>;
// Risk of a cell for path aggregation; only queried on passable cells.
using RiskFn = std::function<double(CellIndex)>;

struct GridPath {
  bool found = false;
  std::vector<CellIndex> cells;  // start..goal inclusive
  double length_m = 0.0;
  double max_risk = 0.0;
};

// Deterministic A* over the 8-connected lattice with octile step costs.
// Expansion stops once path cost would exceed max_length_m (<= 0 disables
// the cap). Ties in the open queue break on (f, h, y, x).
GridPath astar(CellIndex start, CellIndex goal, const PassableFn& passable, const RiskFn& risk,
               double resolution, double max_length_m = 0.0);

// Multi-source Dijkstra distance field in meters over passable cells.
std::unordered_map<CellIndex, double, CellHash> distance_field(std::span<const CellIndex> sources,
                                                               const PassableFn& passable,
                                                               double resolution);

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

}  // namespace plgrim::grid_search
