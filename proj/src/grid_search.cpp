#include "plgrim/grid_search.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace plgrim::grid_search {

namespace {

double octile_m(CellIndex a, CellIndex b, double resolution) {
  const int dx = std::abs(a.x - b.x);
  const int dy = std::abs(a.y - b.y);
  const int lo = std::min(dx, dy);
  const int hi = std::max(dx, dy);
  return (lo * std::numbers::sqrt2 + (hi - lo)) * resolution;
}

struct OpenEntry {
  double f;
  double h;
  CellIndex cell;
};

struct OpenOrder {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.h != b.h) return a.h > b.h;
    if (a.cell.y != b.cell.y) return a.cell.y > b.cell.y;
    return a.cell.x > b.cell.x;
  }
};

}  // namespace

GridPath astar(CellIndex start, CellIndex goal, const PassableFn& passable, const RiskFn& risk,
               double resolution, double max_length_m) {
  GridPath out;
  if (!passable(start) || !passable(goal)) return out;
  if (start == goal) {
    out.found = true;
    out.cells = {start};
    out.max_risk = risk(start);
    return out;
  }

  std::unordered_map<CellIndex, double, CellHash> g;
  std::unordered_map<CellIndex, CellIndex, CellHash> parent;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;

  g[start] = 0.0;
  open.push({octile_m(start, goal, resolution), octile_m(start, goal, resolution), start});

  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const CellIndex c = top.cell;
    const double gc = g.at(c);
    if (top.f > gc + top.h + 1e-12) continue;  // stale entry
    if (c == goal) break;
    if (max_length_m > 0.0 && gc > max_length_m) continue;
    for (int h = 0; h < kNumHeadings; ++h) {
      const CellIndex n{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
      if (!passable(n)) continue;
      const double step = step_length_m(static_cast<Heading>(h), resolution);
      const double gn = gc + step;
      if (max_length_m > 0.0 && gn > max_length_m + 1e-9) continue;
      const auto it = g.find(n);
      if (it == g.end() || gn < it->second - 1e-12) {
        g[n] = gn;
        parent[n] = c;
        const double hn = octile_m(n, goal, resolution);
        open.push({gn + hn, hn, n});
      }
    }
  }

  const auto git = g.find(goal);
  if (git == g.end()) return out;
  out.found = true;
  out.length_m = git->second;
  CellIndex c = goal;
  while (true) {
    out.cells.push_back(c);
    if (c == start) break;
    c = parent.at(c);
  }
  std::reverse(out.cells.begin(), out.cells.end());
  for (const CellIndex& cell : out.cells) {
    out.max_risk = std::max(out.max_risk, risk(cell));
  }
  return out;
}

std::unordered_map<CellIndex, double, CellHash> distance_field(std::span<const CellIndex> sources,
                                                               const PassableFn& passable,
                                                               double resolution) {
  std::unordered_map<CellIndex, double, CellHash> dist;
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenOrder> open;
  for (const CellIndex& s : sources) {
    if (!passable(s)) continue;
    dist[s] = 0.0;
    open.push({0.0, 0.0, s});
  }
  while (!open.empty()) {
    const OpenEntry top = open.top();
    open.pop();
    const auto dit = dist.find(top.cell);
    if (dit == dist.end() || top.f > dit->second + 1e-12) continue;
    for (int h = 0; h < kNumHeadings; ++h) {
      const CellIndex n{top.cell.x + kHeadingDx[h], top.cell.y + kHeadingDy[h]};
      if (!passable(n)) continue;
      const double dn = dit->second + step_length_m(static_cast<Heading>(h), resolution);
      const auto it = dist.find(n);
      if (it == dist.end() || dn < it->second - 1e-12) {
        dist[n] = dn;
        open.push({dn, 0.0, n});
      }
    }
  }
  return dist;
}

}  // namespace plgrim::grid_search
