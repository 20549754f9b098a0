#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <queue>
#include <set>

namespace oracles {

using namespace plgrim;

double entropy_bits(std::span<const double> p) {
  const auto h = [](double v) {
    if (v <= 0.0 || v >= 1.0) return 0.0;
    return -(v * std::log2(v) + (1.0 - v) * std::log2(1.0 - v));
  };
  double total = 0.0;
  for (double v : p) total += h(v);
  return total;
}

std::vector<CellIndex> flood_fill_reachable(const world::GroundTruthWorld& w) {
  std::set<std::pair<int, int>> seen;
  std::vector<CellIndex> stack{cell_of(w.start_pose(), w.resolution())};
  seen.insert({stack[0].x, stack[0].y});
  std::vector<CellIndex> out;
  while (!stack.empty()) {
    const CellIndex c = stack.back();
    stack.pop_back();
    out.push_back(c);
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex n{c.x + dx, c.y + dy};
        if (w.traversable(n) && !seen.count({n.x, n.y})) {
          seen.insert({n.x, n.y});
          stack.push_back(n);
        }
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](CellIndex a, CellIndex b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  return out;
}

bool sampled_visible(const world::GroundTruthWorld& w, CellIndex from, CellIndex to) {
  if (from == to) return true;
  const double x0 = from.x + 0.5, y0 = from.y + 0.5;
  const double x1 = to.x + 0.5, y1 = to.y + 0.5;
  const int samples = 4000;
  for (int i = 1; i < samples; ++i) {
    const double t = static_cast<double>(i) / samples;
    const CellIndex c{static_cast<int>(std::floor(x0 + t * (x1 - x0))),
                      static_cast<int>(std::floor(y0 + t * (y1 - y0)))};
    if (c == from || c == to) continue;
    if (!w.traversable(c)) return false;
  }
  return true;
}

double grid_dijkstra(CellIndex start, CellIndex goal,
                     const std::function<bool(CellIndex)>& passable, double resolution) {
  if (!passable(start) || !passable(goal)) return std::numeric_limits<double>::infinity();
  std::map<std::pair<int, int>, double> dist;
  using Entry = std::pair<double, std::pair<int, int>>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[{start.x, start.y}] = 0.0;
  open.push({0.0, {start.x, start.y}});
  while (!open.empty()) {
    const auto [d, key] = open.top();
    open.pop();
    if (d > dist[key] + 1e-12) continue;
    if (key == std::make_pair(goal.x, goal.y)) return d;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) continue;
        const CellIndex n{key.first + dx, key.second + dy};
        if (!passable(n)) continue;
        const double step = (dx != 0 && dy != 0) ? resolution * std::numbers::sqrt2 : resolution;
        const auto it = dist.find({n.x, n.y});
        if (it == dist.end() || d + step < it->second - 1e-12) {
          dist[{n.x, n.y}] = d + step;
          open.push({d + step, {n.x, n.y}});
        }
      }
    }
  }
  return std::numeric_limits<double>::infinity();
}

std::vector<CellIndex> swept_union(const world::GroundTruthWorld& w,
                                   std::span<const CellIndex> path, double radius_m) {
  const int r = static_cast<int>(std::floor(radius_m / w.resolution() + 1e-9));
  std::set<std::pair<int, int>> cells;
  for (const CellIndex& at : path) {
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const CellIndex c{at.x + dx, at.y + dy};
        if (!w.traversable(c)) continue;
        if (!sampled_visible(w, at, c)) continue;
        cells.insert({c.x, c.y});
      }
    }
  }
  std::vector<CellIndex> out;
  for (const auto& [x, y] : cells) out.push_back({x, y});
  std::sort(out.begin(), out.end(),
            [](CellIndex a, CellIndex b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
  return out;
}

irm::GlobalIRM random_global_irm(std::mt19937_64& rng, int max_nodes,
                                 const irm::IrmParams& params) {
  irm::GlobalIRM g;
  const double res = 0.5;
  std::uniform_int_distribution<int> coord(0, 40);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> area(1, 200);

  std::vector<CellIndex> placed;
  const int breadcrumbs = std::max(2, max_nodes * 3 / 4);
  int guard = 0;
  while (static_cast<int>(placed.size()) < breadcrumbs && ++guard < 10000) {
    const CellIndex c{coord(rng), coord(rng)};
    bool ok = true;
    for (const CellIndex& p : placed) {
      if (euclidean_m(c, p, res) < params.breadcrumb_spacing_m) {
        ok = false;
        break;
      }
    }
    if (ok) {
      placed.push_back(c);
      g.add_breadcrumb(c, res);
    }
  }
  const int frontiers = std::max(1, max_nodes - static_cast<int>(placed.size()));
  for (int i = 0; i < frontiers; ++i) {
    g.add_frontier({coord(rng), coord(rng)}, res, area(rng));
  }

  // Edges between nearby pairs with jittered lengths; every frontier gets at
  // least one edge to its nearest breadcrumb.
  const std::vector<int> ids = g.node_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const auto& a = g.node(ids[i]);
      const auto& b = g.node(ids[j]);
      const double d = euclidean_m(a.cell, b.cell, res) * (1.0 + 0.2 * unit(rng));
      if (d < params.edge_max_length_m && unit(rng) < 0.5) {
        g.add_or_update_edge(ids[i], ids[j], std::max(d, 1e-3),
                             unit(rng) * params.edge_max_risk * 0.99);
      }
    }
  }
  for (int id : g.node_ids()) {
    if (g.node(id).kind != irm::GlobalNodeKind::Frontier) continue;
    if (!g.incident_edges(id).empty()) continue;
    int nearest = -1;
    double best = std::numeric_limits<double>::max();
    for (int other : g.node_ids()) {
      if (other == id || g.node(other).kind == irm::GlobalNodeKind::Frontier) continue;
      const double d = euclidean_m(g.node(id).cell, g.node(other).cell, res);
      if (d < best) {
        best = d;
        nearest = other;
      }
    }
    if (nearest >= 0) {
      g.add_or_update_edge(id, nearest, std::min(best + 0.1, params.edge_max_length_m * 0.99),
                           0.0);
    }
  }
  return g;
}

FrontierPlanOracle dijkstra_best_frontier(const irm::GlobalIRM& g, int start,
                                          const reward::RewardWeights& w, double gamma) {
  FrontierPlanOracle out;
  const auto edge_cost = [&](const irm::GlobalEdge& e) {
    return w.k_cost * (w.k_dist * e.d_m + w.k_risk * e.rho);
  };

  // Single-source Dijkstra from `start`; frontier nodes absorb (no outgoing
  // relaxation through them).
  std::map<int, double> dist;
  std::map<int, int> first_hop;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[start] = 0.0;
  open.push({0.0, start});
  while (!open.empty()) {
    const auto [d, id] = open.top();
    open.pop();
    if (d > dist[id] + 1e-12) continue;
    if (id != start && g.node(id).kind == irm::GlobalNodeKind::Frontier) continue;
    for (int e : g.incident_edges(id)) {
      const irm::GlobalEdge& ed = g.edge(e);
      const int other = ed.a == id ? ed.b : ed.a;
      const double nd = d + edge_cost(ed);
      const auto it = dist.find(other);
      if (it == dist.end() || nd < it->second - 1e-12) {
        dist[other] = nd;
        first_hop[other] = id == start ? other : first_hop[id];
        open.push({nd, other});
      }
    }
  }

  for (const auto& [id, d] : dist) {
    if (g.node(id).kind != irm::GlobalNodeKind::Frontier) continue;
    // gamma = 1: value duality is exact (net reward = terminal - path cost).
    (void)gamma;
    const double value = w.k_info * g.node(id).uncovered_area - d;
    if (!out.reachable || value > out.best_value + 1e-12) {
      out.reachable = true;
      out.best_value = value;
      out.best_frontier = id;
      out.first_hop_node = first_hop.count(id) ? first_hop[id] : id;
    }
  }
  return out;
}

namespace {

// Direct reward evaluation of one macro from (cell, heading, covered-set);
// reimplements the footprint sweep with its own loops.
struct EvalState {
  CellIndex cell;
  Heading heading;
  std::set<std::pair<int, int>> covered;
};

double eval_macro(const lcp::LocalSnapshot& snap, EvalState& s, const lcp::MacroAction& macro,
                  double* info_out) {
  const irm::LocalIRM& g = *snap.irm;
  const double res = g.resolution();
  double total = 0.0;
  double discount = 1.0;
  const Heading dir = heading_of(macro.move);
  for (int j = 0; j < macro.length; ++j) {
    const CellIndex next{s.cell.x + kHeadingDx[static_cast<int>(dir)],
                         s.cell.y + kHeadingDy[static_cast<int>(dir)]};
    const double rho = std::max(g.node(*g.node_id(s.cell)).p_risk,
                                g.node(*g.node_id(next)).p_risk);
    const double cost = snap.weights.k_dist * step_length_m(dir, res) +
                        snap.weights.k_risk * rho +
                        snap.weights.k_motion * heading_change(s.heading, dir);
    double gain = 0.0;
    const int r = static_cast<int>(std::floor(snap.sensor.coverage_radius_m / res + 1e-9));
    for (int dy = -r; dy <= r; ++dy) {
      for (int dx = -r; dx <= r; ++dx) {
        const CellIndex c{next.x + dx, next.y + dy};
        const auto id = g.node_id(c);
        if (!id || s.covered.count({c.x, c.y})) continue;
        if (snap.sensor.line_of_sight && std::max(std::abs(dx), std::abs(dy)) > 1) {
          bool blocked = false;
          for (const CellIndex& mid : world::supercover_line(next, c)) {
            if (mid == next || mid == c) continue;
            if (!g.has_node(mid)) {
              blocked = true;
              break;
            }
          }
          if (blocked) continue;
        }
        const double p = g.node(*id).p_covered;
        if (p > 0.0 && p < 1.0) {
          gain += -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
          s.covered.insert({c.x, c.y});
        }
      }
    }
    total += discount * (snap.weights.k_info * gain - snap.weights.k_cost * cost);
    if (info_out) *info_out += gain;
    discount *= snap.weights.gamma;
    s.cell = next;
    s.heading = dir;
  }
  return total;
}

double best_continuation(const lcp::LocalSnapshot& snap, const EvalState& state, int remaining,
                         int macro_length) {
  if (remaining == 0) return 0.0;
  const auto macros = lcp::enumerate_macro_actions(*snap.irm, state.cell, macro_length);
  if (macros.size() == 1 && macros[0].length == 0) return 0.0;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& macro : macros) {
    EvalState s = state;
    double v = eval_macro(snap, s, macro, nullptr);
    v += std::pow(snap.weights.gamma, macro.length) *
         best_continuation(snap, s, remaining - 1, macro_length);
    best = std::max(best, v);
  }
  return best;
}

}  // namespace

ReconcileScenario make_corridor_scenario(std::mt19937_64& rng) {
  ReconcileScenario s;
  const double res = 0.5;
  std::uniform_int_distribution<int> len_dist(28, 40);
  std::uniform_int_distribution<int> covered_dist(2, 5);
  const int corridor_len = len_dist(rng);
  const int covered_prefix = covered_dist(rng);

  s.risk = std::make_unique<belief::RiskMap>(41, res, pose_at_cell({0, 1}, res));
  s.coverage = std::make_unique<belief::CoverageBelief>();

  // Horizontal corridor y = 1 with wall rows above and below, all known.
  world::RiskPatch patch;
  for (int x = 0; x <= corridor_len + 1; ++x) {
    patch.push_back({{x, 0}, 1.0});
    patch.push_back({{x, 2}, 1.0});
    patch.push_back({{x, 1}, (x == corridor_len + 1) ? 1.0 : 0.0});
  }

  // The robot has walked `covered_prefix` cells; everything behind it (and
  // its own cell) is covered, the corridor ahead is known but uncovered.
  std::vector<CellIndex> covered;
  for (int x = 0; x <= covered_prefix; ++x) covered.push_back({x, 1});

  s.pose = pose_at_cell({covered_prefix, 1}, res, Heading::East);
  s.risk->update(patch, s.pose);
  s.coverage->mark_covered(covered);

  // Previous policy: keep marching east for T = 24 primitives, planned one
  // delta-t ago (the executed prefix already brought us here).
  s.executed = 6;
  s.prev.horizon = 24;
  s.prev.t0 = 0.0;
  for (int i = 0; i < 24; ++i) s.prev.actions.push_back(PrimitiveMove::East);
  s.tail_length = 24 - s.executed;
  CellIndex at{covered_prefix, 1};
  for (int k = 0; k < s.tail_length; ++k) {
    at = {at.x + 1, at.y};
    s.tail_cells.push_back(at);
  }
  return s;
}

ExhaustiveResult exhaustive_macro_search(const lcp::LocalSnapshot& snap, int depth,
                                         int macro_length) {
  ExhaustiveResult result;
  EvalState root{cell_of(snap.pose, snap.irm->resolution()), snap.pose.heading, {}};
  for (const CellIndex& c : snap.initial_overlay) root.covered.insert({c.x, c.y});

  const auto macros = lcp::enumerate_macro_actions(*snap.irm, root.cell, macro_length);
  for (const auto& macro : macros) {
    EvalState s = root;
    double v = eval_macro(snap, s, macro, nullptr);
    v += std::pow(snap.weights.gamma, macro.length) *
         best_continuation(snap, s, depth - 1, macro_length);
    result.root_values.push_back({macro, v});
    if (result.best_index < 0 || v > result.root_values[result.best_index].value + 1e-12) {
      result.best_index = static_cast<int>(result.root_values.size()) - 1;
    }
  }
  return result;
}

}  // namespace oracles
