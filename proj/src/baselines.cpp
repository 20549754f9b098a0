#include "plgrim/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "plgrim/grid_search.hpp"
#include "plgrim/kernels.hpp"

namespace plgrim::baselines {

namespace {

// Swept information gain of following `path` with the coverage footprint,
// against the Local IRM's coverage probabilities.
double swept_gain_bits(const irm::LocalIRM& irm, const world::SensorSpec& sensor,
                       const std::vector<CellIndex>& path) {
  std::unordered_map<CellIndex, bool, CellHash> seen;
  std::vector<double> probs;
  const auto open = [&irm](CellIndex c) { return irm.has_node(c); };
  for (const CellIndex& at : path) {
    for (CellIndex c : world::footprint_box(at, sensor.coverage_radius_m, irm.resolution())) {
      const auto id = irm.node_id(c);
      if (!id || seen.count(c)) continue;
      if (sensor.line_of_sight && !world::los_clear(at, c, open)) continue;
      seen[c] = true;
      const double p = irm.node(*id).p_covered;
      if (p > 0.0 && p < 1.0) probs.push_back(p);
    }
  }
  return kernels::binary_entropy_sum(probs);
}

Policy path_to_policy(const std::vector<CellIndex>& path) {
  Policy policy;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const int dx = path[i].x - path[i - 1].x;
    const int dy = path[i].y - path[i - 1].y;
    for (int h = 0; h < kNumHeadings; ++h) {
      if (kHeadingDx[h] == dx && kHeadingDy[h] == dy) {
        policy.actions.push_back(static_cast<PrimitiveMove>(h));
        break;
      }
    }
  }
  policy.horizon = static_cast<int>(policy.actions.size());
  return policy;
}

}  // namespace

NbvResult nbv_plan(const irm::LocalIRM& irm, const world::SensorSpec& sensor,
                   const reward::RewardWeights& weights, int n_samples, double lethal_threshold,
                   std::mt19937_64& rng) {
  NbvResult result;
  const CellIndex pose_cell = cell_of(irm.center(), irm.resolution());
  if (!irm.has_node(pose_cell)) {
    result.stuck = true;
    return result;
  }

  // Uniform viewpoint sampling over the window extent; candidates must land
  // on believed-traversable, sub-lethal cells.
  const int half = [&irm, &pose_cell] {
    int h = 0;
    for (const auto& n : irm.nodes()) h = std::max(h, chebyshev(n.cell, pose_cell));
    return h;
  }();
  std::uniform_int_distribution<int> coord(-half, half);

  const auto passable = [&](CellIndex c) { return irm.has_node(c); };
  const auto no_risk = [](CellIndex) { return 0.0; };

  int attempts = 0;
  const int max_attempts = n_samples * 20;
  while (static_cast<int>(result.candidates.size()) < n_samples && attempts < max_attempts) {
    ++attempts;
    const CellIndex c{pose_cell.x + coord(rng), pose_cell.y + coord(rng)};
    const auto id = irm.node_id(c);
    if (!id || irm.node(*id).p_risk >= lethal_threshold) continue;
    // Deterministic distance-only path; probabilistic risk is ignored by
    // design of this baseline.
    const grid_search::GridPath path =
        grid_search::astar(pose_cell, c, passable, no_risk, irm.resolution());
    if (!path.found) continue;
    Viewpoint vp;
    vp.cell = c;
    vp.path = path.cells;
    vp.path_length_m = path.length_m;
    vp.info_gain_bits = swept_gain_bits(irm, sensor, path.cells);
    vp.reward = weights.k_info * vp.info_gain_bits -
                weights.k_cost * (weights.k_dist * vp.path_length_m);
    result.candidates.push_back(std::move(vp));
  }
  if (result.candidates.empty()) {
    result.stuck = true;
    return result;
  }
  for (std::size_t i = 0; i < result.candidates.size(); ++i) {
    if (result.chosen < 0 ||
        result.candidates[i].reward > result.candidates[result.chosen].reward + 1e-15) {
      result.chosen = static_cast<int>(i);
    }
  }
  result.policy = path_to_policy(result.candidates[result.chosen].path);
  result.policy.source = Policy::Source::Lcp;
  return result;
}

std::vector<double> graph_distances(const irm::GlobalIRM& irm, int source) {
  const std::vector<int> ids = irm.node_ids();
  const int n = ids.empty() ? 0 : ids.back() + 1;
  std::vector<double> dist(std::max(n, source + 1), grid_search::kUnreachable);
  if (!irm.alive(source)) return dist;
  using Entry = std::pair<double, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  dist[source] = 0.0;
  open.push({0.0, source});
  while (!open.empty()) {
    const auto [d, id] = open.top();
    open.pop();
    if (d > dist[id] + 1e-12) continue;
    for (int e : irm.incident_edges(id)) {
      const irm::GlobalEdge& ed = irm.edge(e);
      const int other = ed.a == id ? ed.b : ed.a;
      const double nd = d + ed.d_m;
      if (nd < dist[other] - 1e-12) {
        dist[other] = nd;
        open.push({nd, other});
      }
    }
  }
  return dist;
}

HfeResult hfe_plan(const irm::GlobalIRM& global_irm, const belief::RiskMap& risk,
                   const RobotPose& pose, int window_cells, const irm::IrmParams& params) {
  HfeResult result;
  if (global_irm.frontier_count() == 0) {
    result.done = true;
    return result;
  }
  const double res = risk.resolution();
  const CellIndex pose_cell = cell_of(pose, res);
  const int half = window_cells / 2;

  const auto passable = [&](CellIndex c) {
    const auto r = risk.known_risk(c);
    return r.has_value() && *r < params.lethal_threshold;
  };
  const auto cell_risk = [&](CellIndex c) { return risk.known_risk(c).value_or(0.0); };

  // Local scope first: frontiers inside the rolling window, scored by
  // area / grid-path cost.
  int best = -1;
  double best_score = -1.0;
  grid_search::GridPath best_path;
  for (int id : global_irm.node_ids()) {
    const irm::GlobalNode& n = global_irm.node(id);
    if (n.kind != irm::GlobalNodeKind::Frontier) continue;
    if (chebyshev(n.cell, pose_cell) > half) continue;
    const grid_search::GridPath path =
        grid_search::astar(pose_cell, n.cell, passable, cell_risk, res);
    if (!path.found) continue;
    const double score = n.uncovered_area / std::max(path.length_m, res);
    if (score > best_score + 1e-15) {
      best_score = score;
      best = id;
      best_path = path;
    }
  }

  if (best < 0) {
    // Global scope: score over Global IRM shortest paths from the nearest
    // graph node.
    const int anchor = global_irm.nearest_node(pose);
    if (anchor >= 0) {
      const std::vector<double> dist = graph_distances(global_irm, anchor);
      const double approach = euclidean_m(pose_cell, global_irm.node(anchor).cell, res);
      for (int id : global_irm.node_ids()) {
        const irm::GlobalNode& n = global_irm.node(id);
        if (n.kind != irm::GlobalNodeKind::Frontier) continue;
        if (dist[id] == grid_search::kUnreachable) continue;
        const double cost = approach + dist[id];
        const double score = n.uncovered_area / std::max(cost, res);
        if (score > best_score + 1e-15) {
          best_score = score;
          best = id;
        }
      }
      if (best >= 0) {
        best_path = grid_search::astar(pose_cell, global_irm.node(best).cell, passable, cell_risk,
                                       res);
        if (!best_path.found) best = -1;
      }
    }
  }

  if (best < 0) {
    result.stuck = true;
    return result;
  }
  result.chosen_frontier = best;
  result.score = best_score;
  result.path_cost_m = best_path.length_m;
  result.policy = path_to_policy(best_path.cells);
  result.policy.source = Policy::Source::GcpGuided;
  return result;
}

}  // namespace plgrim::baselines
