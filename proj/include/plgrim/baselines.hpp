#pragma once

#include <optional>
#include <random>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/irm.hpp"
#include "plgrim/policy.hpp"
#include "plgrim/reward.hpp"
#include "plgrim/world.hpp"

namespace plgrim::baselines {

// Candidate viewpoint for NBV: a sampled pose with its deterministic path.
struct Viewpoint {
  CellIndex cell;
  std::vector<CellIndex> path;  // pose..viewpoint on believed-traversable cells
  double path_length_m = 0.0;
  double info_gain_bits = 0.0;
  double reward = 0.0;
};

struct NbvResult {
  bool stuck = false;
  Policy policy;
  std::vector<Viewpoint> candidates;
  int chosen = -1;
};

// Next-Best-View: samples viewpoints uniformly over the Local IRM window,
// plans distance-only paths to each and picks the best k_I*I - k_C*(k_d*len)
// score; ties break on sample index.
NbvResult nbv_plan(const irm::LocalIRM& irm, const world::SensorSpec& sensor,
                   const reward::RewardWeights& weights, int n_samples, double lethal_threshold,
                   std::mt19937_64& rng);

struct HfeResult {
  bool done = false;   // zero frontiers
  bool stuck = false;  // frontiers exist but none reachable
  Policy policy;
  int chosen_frontier = -1;
  double score = 0.0;
  double path_cost_m = 0.0;
};

// Hierarchical frontier-based exploration: one-step look-ahead frontier
// selection by area/cost, scoped to the local window when it holds any
// frontier, otherwise over Global IRM shortest paths.
HfeResult hfe_plan(const irm::GlobalIRM& global_irm, const belief::RiskMap& risk,
                   const RobotPose& pose, int window_cells, const irm::IrmParams& params);

// Graph-level Dijkstra over Global IRM edge lengths (exposed for tests).
std::vector<double> graph_distances(const irm::GlobalIRM& irm, int source);

}  // namespace plgrim::baselines
