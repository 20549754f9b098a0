#include "plgrim/gcp.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace plgrim::gcp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

long long q_key(int node_id, int edge_id) {
  return (static_cast<long long>(node_id) << 20) | static_cast<long long>(edge_id);
}

double edge_cost(const irm::GlobalEdge& e, const reward::RewardWeights& w) {
  // Global actions carry no heading information; the motion-primitive term
  // is zero at this level.
  return reward::action_cost(e.d_m, e.rho, 0.0, w);
}

double terminal_reward(const irm::GlobalNode& n, const reward::RewardWeights& w) {
  // Uncovered cells behind the frontier are worth one bit each.
  return w.k_info * static_cast<double>(n.uncovered_area);
}

}  // namespace

void GcpParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gcp gamma must lie in (0,1]");
  if (!(epsilon_vi > 0.0)) throw std::invalid_argument("epsilon_vi must be positive");
}

double GlobalValueTable::value(int node_id) const {
  const auto it = values_.find(node_id);
  return it == values_.end() ? kNegInf : it->second;
}

double GlobalValueTable::q(int node_id, int edge_id) const {
  const auto it = q_.find(q_key(node_id, edge_id));
  return it == q_.end() ? kNegInf : it->second;
}

GlobalValueTable value_iteration(const irm::GlobalIRM& irm, const reward::RewardWeights& weights,
                                 const GcpParams& params) {
  params.validate();
  GlobalValueTable table;
  const std::vector<int> ids = irm.node_ids();

  if (irm.frontier_count() == 0) {
    table.exploration_complete = true;
    for (int id : ids) table.values_[id] = 0.0;
    return table;
  }

  for (int id : ids) {
    const irm::GlobalNode& n = irm.node(id);
    table.values_[id] =
        n.kind == irm::GlobalNodeKind::Frontier ? terminal_reward(n, weights) : kNegInf;
  }

  // Jacobi Bellman sweeps in node-id order; frontiers are absorbing.
  std::unordered_map<int, double> next = table.values_;
  for (int sweep = 0; sweep < params.max_sweeps; ++sweep) {
    double residual = 0.0;
    bool became_finite = false;
    for (int id : ids) {
      const irm::GlobalNode& n = irm.node(id);
      if (n.kind == irm::GlobalNodeKind::Frontier) continue;
      double best = kNegInf;
      for (int e : irm.incident_edges(id)) {
        const irm::GlobalEdge& ed = irm.edge(e);
        const int other = ed.a == id ? ed.b : ed.a;
        const double v_other = table.values_.at(other);
        if (v_other == kNegInf) continue;
        best = std::max(best,
                        -weights.k_cost * edge_cost(ed, weights) + params.gamma * v_other);
      }
      const double v = table.values_.at(id);
      if (v == kNegInf && best != kNegInf) {
        became_finite = true;
      } else if (v != kNegInf && best != kNegInf) {
        residual = std::max(residual, std::abs(best - v));
      }
      next.at(id) = best;
    }
    table.values_.swap(next);
    table.iterations = sweep + 1;
    table.residual = residual;
    if (!became_finite && residual < params.epsilon_vi) break;
  }

  for (int id : ids) {
    for (int e : irm.incident_edges(id)) {
      const irm::GlobalEdge& ed = irm.edge(e);
      const int other = ed.a == id ? ed.b : ed.a;
      const double v_other = table.values_.at(other);
      table.q_[q_key(id, e)] = v_other == kNegInf
                                   ? kNegInf
                                   : -weights.k_cost * edge_cost(ed, weights) +
                                         params.gamma * v_other;
    }
  }
  return table;
}

void PoseBelief::validate() const {
  if (weighted_nodes.empty()) throw std::invalid_argument("empty pose belief");
  double sum = 0.0;
  for (const auto& [id, w] : weighted_nodes) {
    if (w < 0.0) throw std::invalid_argument("pose belief weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("pose belief weights must sum to 1");
}

std::optional<GlobalAction> qmdp_action(const irm::GlobalIRM& irm, const GlobalValueTable& table,
                                        const PoseBelief& belief) {
  belief.validate();
  for (const auto& [id, w] : belief.weighted_nodes) {
    if (!irm.alive(id) || !table.has(id)) {
      throw std::invalid_argument("pose belief node missing from the value table");
    }
  }
  if (table.exploration_complete) return std::nullopt;

  // Actions available at the maximum-weight node's location (lowest id wins
  // weight ties).
  int anchor = belief.weighted_nodes.front().first;
  double best_w = belief.weighted_nodes.front().second;
  for (const auto& [id, w] : belief.weighted_nodes) {
    if (w > best_w + 1e-15 || (std::abs(w - best_w) <= 1e-15 && id < anchor)) {
      anchor = id;
      best_w = w;
    }
  }

  GlobalAction best;
  bool have = false;
  for (int e : irm.incident_edges(anchor)) {
    const irm::GlobalEdge& ed = irm.edge(e);
    const int target = ed.a == anchor ? ed.b : ed.a;
    // Belief-weighted value of relocating to `target`: each candidate pose
    // uses its own edge to the target, -infinity when it has none.
    double q = 0.0;
    for (const auto& [id, w] : belief.weighted_nodes) {
      if (w == 0.0) continue;
      double q_mdp;
      if (id == target) {
        q_mdp = table.value(target);  // candidate is already at the target
      } else {
        const auto edge = irm.edge_between(id, target);
        q_mdp = edge ? table.q(id, *edge) : kNegInf;
      }
      if (q_mdp == kNegInf) {
        q = kNegInf;
        break;
      }
      q += w * q_mdp;
    }
    if (q == kNegInf) continue;
    if (!have || q > best.q_value + 1e-15) {
      best = {e, anchor, target, q, -1};
      have = true;
    }
  }
  if (!have) return std::nullopt;

  // Follow the greedy value chain to the frontier goal.
  int at = best.to_node;
  const std::size_t guard = irm.node_count() + 1;
  for (std::size_t hop = 0; hop < guard; ++hop) {
    if (irm.node(at).kind == irm::GlobalNodeKind::Frontier) {
      best.target_frontier = at;
      break;
    }
    int next = -1;
    double next_q = kNegInf;
    for (int e : irm.incident_edges(at)) {
      const double q = table.q(at, e);
      if (q > next_q + 1e-15) {
        next_q = q;
        next = irm.edge(e).a == at ? irm.edge(e).b : irm.edge(e).a;
      }
    }
    if (next < 0) break;
    at = next;
  }
  return best;
}

void dump_value_table(std::ostream& out, const irm::GlobalIRM& irm, const GlobalValueTable& table) {
  for (int id : irm.node_ids()) {
    out << "node " << id << ' ' << table.value(id) << '\n';
  }
}

}  // namespace plgrim::gcp
