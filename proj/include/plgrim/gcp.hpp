#pragma once

#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "plgrim/irm.hpp"
#include "plgrim/reward.hpp"

namespace plgrim::gcp {

struct GcpParams {
  double gamma = 1.0;        // frontiers absorb, so 1 keeps V = net reward-to-go
  double epsilon_vi = 1e-6;  // value-iteration convergence residual
  int max_sweeps = 100000;

  void validate() const;
};

// Per-node values and per-(node, edge) action values from value iteration
// with frontier nodes as absorbing terminals. Nodes with no path to any
// frontier keep -infinity.
class GlobalValueTable {
 public:
  bool exploration_complete = false;  // graph has no frontier nodes
  int iterations = 0;
  double residual = 0.0;

  double value(int node_id) const;
  // Q_MDP of traversing `edge_id` from `node_id`; -infinity when the edge is
  // not incident or leads nowhere useful.
  double q(int node_id, int edge_id) const;

  bool has(int node_id) const { return values_.count(node_id) > 0; }

  // Internal construction surface (value_iteration only).
  std::unordered_map<int, double> values_;
  std::unordered_map<long long, double> q_;  // key = node_id * 2^20 + edge_id
};

GlobalValueTable value_iteration(const irm::GlobalIRM& irm, const reward::RewardWeights& weights,
                                 const GcpParams& params);

// Weighted set of candidate pose nodes, weights summing to 1.
struct PoseBelief {
  std::vector<std::pair<int, double>> weighted_nodes;

  static PoseBelief point_mass(int node_id) { return {{{node_id, 1.0}}}; }
  void validate() const;
};

struct GlobalAction {
  int edge_id = -1;
  int from_node = -1;
  int to_node = -1;          // relocation target of the chosen edge
  double q_value = 0.0;      // belief-weighted action value
  int target_frontier = -1;  // frontier at the end of the greedy value chain
};

// argmax_a sum_q b(q) Q_MDP(q, a) over the actions available at the
// maximum-weight belief node; ties break on lowest node id then lowest edge
// id. nullopt when exploration is complete or no action has finite value.
// Throws std::invalid_argument on an empty belief or a belief node missing
// from the table.
std::optional<GlobalAction> qmdp_action(const irm::GlobalIRM& irm, const GlobalValueTable& table,
                                        const PoseBelief& belief);

// Debug dump: "node id V" per live node.
void dump_value_table(std::ostream& out, const irm::GlobalIRM& irm, const GlobalValueTable& table);

}  // namespace plgrim::gcp
