#include "plgrim/lcp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

#include "plgrim/grid_search.hpp"
#include "plgrim/kernels.hpp"

namespace plgrim::lcp {

void LcpParams::validate() const {
  if (macro_length < 1) throw std::invalid_argument("macro_length must be >= 1");
  if (depth < 1) throw std::invalid_argument("depth must be >= 1");
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (!(rollout_epsilon >= 0.0 && rollout_epsilon <= 1.0)) {
    throw std::invalid_argument("rollout_epsilon must lie in [0,1]");
  }
  if (uct_scale < 0.0) throw std::invalid_argument("uct_scale must be non-negative");
}

std::vector<MacroAction> enumerate_macro_actions(const irm::LocalIRM& irm, CellIndex from,
                                                 int max_length) {
  std::vector<MacroAction> macros;
  for (int h = 0; h < kNumHeadings; ++h) {
    CellIndex c = from;
    int len = 0;
    for (int step = 0; step < max_length; ++step) {
      const CellIndex next{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
      if (!irm.has_node(next)) break;
      c = next;
      ++len;
    }
    if (len > 0) macros.push_back({static_cast<PrimitiveMove>(h), len});
  }
  if (macros.empty()) macros.push_back({PrimitiveMove::Wait, 0});  // terminal hold
  return macros;
}

Simulator::Simulator(const LocalSnapshot& snap, const Guidance& guidance, bool guidance_mode,
                     const LcpParams& params)
    : snap_(snap), guidance_(guidance), guidance_mode_(guidance_mode), params_(params) {}

const std::vector<CellIndex>& Simulator::footprint(CellIndex at) const {
  const auto it = footprint_cache_.find(at);
  if (it != footprint_cache_.end()) return it->second;

  const irm::LocalIRM& irm = *snap_.irm;
  const auto open = [&irm](CellIndex c) { return irm.has_node(c); };
  std::vector<CellIndex> cells;
  for (CellIndex c : world::footprint_box(at, snap_.sensor.coverage_radius_m, irm.resolution())) {
    if (!irm.has_node(c)) continue;
    if (snap_.sensor.line_of_sight && !world::los_clear(at, c, open)) continue;
    cells.push_back(c);
  }
  return footprint_cache_.emplace(at, std::move(cells)).first->second;
}

double Simulator::potential_m(CellIndex c) const {
  if (!guidance_.distance_field) return 0.0;
  const auto it = guidance_.distance_field->find(c);
  return it == guidance_.distance_field->end() ? 1e6 : it->second;
}

StepOutcome Simulator::simulate_step(LocalSimState& state, const MacroAction& macro) const {
  StepOutcome out;
  if (!is_motion(macro.move) || macro.length == 0) {
    return out;  // hold
  }
  const irm::LocalIRM& irm = *snap_.irm;
  const Heading dir = heading_of(macro.move);
  const double step_m = step_length_m(dir, irm.resolution());
  double discount = 1.0;
  std::vector<double> gain_probs;
  for (int j = 0; j < macro.length; ++j) {
    const CellIndex next{state.cell.x + kHeadingDx[static_cast<int>(dir)],
                         state.cell.y + kHeadingDy[static_cast<int>(dir)]};
    const auto from_id = irm.node_id(state.cell);
    const auto next_id = irm.node_id(next);
    const double rho = std::max(from_id ? irm.node(*from_id).p_risk : 0.0,
                                next_id ? irm.node(*next_id).p_risk : 0.0);
    const double mu = heading_change(state.heading, dir);
    const double cost = reward::action_cost(step_m, rho, mu, snap_.weights);

    gain_probs.clear();
    for (const CellIndex& c : footprint(next)) {
      if (state.overlay.count(c)) continue;
      const double p = irm.node(*irm.node_id(c)).p_covered;
      if (p > 0.0 && p < 1.0) {
        gain_probs.push_back(p);
        state.overlay.insert(c);
      }
    }
    const double gain = reward::info_gain(gain_probs);

    double r = reward::step_reward(gain, cost, snap_.weights);
    if (guidance_mode_) {
      r += params_.guidance_weight * (potential_m(state.cell) - potential_m(next));
    }
    out.reward += discount * r;
    out.info_bits += gain;
    out.cost += cost;

    state.cell = next;
    state.heading = dir;
    state.steps += 1;
    discount *= snap_.weights.gamma;
  }
  return out;
}

namespace {

struct ActionStat {
  MacroAction macro;
  int n = 0;
  double q = 0.0;
  double info = 0.0;  // mean information bits collected below this action
  int child = -1;
};

struct TreeNode {
  CellIndex cell;
  Heading heading = Heading::East;
  int depth = 0;
  int n = 0;
  std::vector<ActionStat> actions;
};

class Search {
 public:
  Search(const LocalSnapshot& snap, const Guidance& guidance, bool guidance_mode,
         const LcpParams& params, std::uint64_t seed)
      : snap_(snap),
        guidance_(guidance),
        params_(params),
        sim_(snap, guidance, guidance_mode, params),
        rng_(seed) {
    gain_field_ = build_gain_field();
  }

  // Geodesic meters from every IRM node to the nearest node with residual
  // coverage uncertainty.
  std::unordered_map<CellIndex, double, CellHash> build_gain_field() const {
    const irm::LocalIRM& irm = *snap_.irm;
    std::vector<CellIndex> sources;
    for (const auto& n : irm.nodes()) {
      if (n.p_covered > 0.0 && n.p_covered < 1.0) sources.push_back(n.cell);
    }
    const auto passable = [&irm](CellIndex c) { return irm.has_node(c); };
    return grid_search::distance_field(sources, passable, irm.resolution());
  }

  bool gain_reachable(CellIndex from) const {
    const auto it = gain_field_.find(from);
    if (it == gain_field_.end()) return false;
    const double horizon_m =
        params_.depth * params_.macro_length * snap_.irm->resolution() * std::numbers::sqrt2;
    return it->second <= horizon_m + 1e-9;
  }

  PlanResult run() {
    PlanResult result;
    result.guidance_mode = sim_.guidance_mode();

    nodes_.clear();
    make_node(cell_of(snap_.pose, snap_.irm->resolution()), snap_.pose.heading, 0);
    if (nodes_[0].actions.size() == 1 && nodes_[0].actions[0].macro.length == 0) {
      result.stuck = true;
      result.policy.actions = {PrimitiveMove::Wait};
      result.policy.horizon = params_.depth * params_.macro_length;
      result.macros = {{PrimitiveMove::Wait, 0}};
      return result;
    }

    for (int s = 0; s < params_.budget; ++s) {
      LocalSimState state{nodes_[0].cell, nodes_[0].heading, {}, 0};
      for (const CellIndex& c : snap_.initial_overlay) state.overlay.insert(c);
      const double g = simulate(0, state);
      max_abs_return_ = std::max(max_abs_return_, std::abs(g));
      ++result.simulations;
    }

    extract(result);
    return result;
  }

 private:
  int make_node(CellIndex cell, Heading heading, int depth) {
    TreeNode node;
    node.cell = cell;
    node.heading = heading;
    node.depth = depth;
    for (const MacroAction& m : enumerate_macro_actions(*snap_.irm, cell, params_.macro_length)) {
      node.actions.push_back({m, 0, 0.0, 0.0, -1});
    }
    nodes_.push_back(std::move(node));
    return static_cast<int>(nodes_.size()) - 1;
  }

  double uct_c() const {
    return params_.uct_scale * std::max(max_abs_return_, 1e-3);
  }

  int select_action(const TreeNode& node) const {
    // Unvisited actions first, in index order.
    for (std::size_t i = 0; i < node.actions.size(); ++i) {
      if (node.actions[i].n == 0) return static_cast<int>(i);
    }
    const double c = uct_c();
    int best = 0;
    double best_u = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < node.actions.size(); ++i) {
      const ActionStat& a = node.actions[i];
      const double u = a.q + c * std::sqrt(std::log(static_cast<double>(node.n)) / a.n);
      if (u > best_u + 1e-15) {
        best_u = u;
        best = static_cast<int>(i);
      }
    }
    return best;
  }

  // One simulation from `node_id`; returns the discounted return from the
  // node and updates statistics along the way. Node references are not held
  // across make_node calls (the arena may reallocate).
  double simulate(int node_id, LocalSimState& state) {
    if (nodes_[node_id].depth >= params_.depth || nodes_[node_id].actions.empty()) return 0.0;
    if (nodes_[node_id].actions.size() == 1 && nodes_[node_id].actions[0].macro.length == 0) {
      nodes_[node_id].n += 1;  // terminal hold
      return 0.0;
    }

    const int ai = select_action(nodes_[node_id]);
    const MacroAction macro = nodes_[node_id].actions[ai].macro;
    const StepOutcome step = sim_.simulate_step(state, macro);

    double tail = 0.0;
    double tail_info = 0.0;
    if (nodes_[node_id].actions[ai].child >= 0) {
      tail = simulate(nodes_[node_id].actions[ai].child, state);
      tail_info = last_info_;
    } else {
      // Expand one node per simulation, then estimate the remainder with the
      // rollout policy.
      const int child = make_node(state.cell, state.heading, nodes_[node_id].depth + 1);
      nodes_[node_id].actions[ai].child = child;
      tail = rollout(state, nodes_[node_id].depth + 1, tail_info);
    }

    const double g = step.reward + std::pow(snap_.weights.gamma, macro.length) * tail;
    const double info_total = step.info_bits + tail_info;

    TreeNode& nd = nodes_[node_id];
    nd.n += 1;
    ActionStat& a = nd.actions[ai];
    a.n += 1;
    a.q += (g - a.q) / a.n;
    a.info += (info_total - a.info) / a.n;
    last_info_ = info_total;
    return g;
  }

  // Greedy-information rollout with field descent when no gain is in reach;
  // depth capped at D macros total.
  double rollout(LocalSimState& state, int depth, double& info_out) {
    double total = 0.0;
    double discount = 1.0;
    info_out = 0.0;
    for (int d = depth; d < params_.depth; ++d) {
      const auto macros = enumerate_macro_actions(*snap_.irm, state.cell, params_.macro_length);
      if (macros.size() == 1 && macros[0].length == 0) break;
      const int pick = choose_rollout_macro(state, macros, /*deterministic=*/false);
      const StepOutcome step = sim_.simulate_step(state, macros[pick]);
      total += discount * step.reward;
      info_out += step.info_bits;
      discount *= std::pow(snap_.weights.gamma, macros[pick].length);
    }
    return total;
  }

  int choose_rollout_macro(const LocalSimState& state, const std::vector<MacroAction>& macros,
                           bool deterministic) {
    if (!deterministic && params_.rollout_epsilon > 0.0) {
      std::uniform_real_distribution<double> u(0.0, 1.0);
      if (u(rng_) < params_.rollout_epsilon) {
        std::uniform_int_distribution<std::size_t> pick(0, macros.size() - 1);
        return static_cast<int>(pick(rng_));
      }
    }
    // One-step greedy information gain over candidate macros.
    int best = 0;
    double best_gain = -1.0;
    std::vector<double> gains(macros.size(), 0.0);
    for (std::size_t i = 0; i < macros.size(); ++i) {
      LocalSimState probe{state.cell, state.heading, state.overlay, state.steps};
      gains[i] = sim_.simulate_step(probe, macros[i]).info_bits;
      if (gains[i] > best_gain + 1e-12) {
        best_gain = gains[i];
        best = static_cast<int>(i);
      }
    }
    if (best_gain > 1e-9) return best;

    // Zero local gain: descend toward the guidance target (or the nearest
    // remaining uncertainty), preferring macros aligned with the guidance
    // direction.
    const auto* field = sim_.guidance_mode() && guidance_.distance_field
                            ? guidance_.distance_field.get()
                            : &gain_field_;
    int pick = 0;
    double best_phi = std::numeric_limits<double>::max();
    int best_align = 8;
    for (std::size_t i = 0; i < macros.size(); ++i) {
      if (macros[i].length == 0) continue;
      CellIndex end = state.cell;
      const CellIndex off = offset_of(macros[i].move);
      end.x += off.x * macros[i].length;
      end.y += off.y * macros[i].length;
      const auto it = field->find(end);
      const double phi = it == field->end() ? 1e9 : it->second;
      const int align = guidance_.valid
                            ? heading_delta_steps(heading_of(macros[i].move), guidance_.direction)
                            : 0;
      if (phi < best_phi - 1e-12 || (std::abs(phi - best_phi) <= 1e-12 && align < best_align)) {
        best_phi = phi;
        best_align = align;
        pick = static_cast<int>(i);
      }
    }
    return pick;
  }

  void extract(PlanResult& result) {
    result.policy.horizon = params_.depth * params_.macro_length;
    result.policy.source = sim_.guidance_mode() ? Policy::Source::GcpGuided : Policy::Source::Lcp;

    for (const ActionStat& a : nodes_[0].actions) {
      result.root_stats.push_back({a.macro, a.n, a.q, a.info});
    }

    LocalSimState state{nodes_[0].cell, nodes_[0].heading, {}, 0};
    for (const CellIndex& c : snap_.initial_overlay) state.overlay.insert(c);

    int node_id = 0;
    for (int d = 0; d < params_.depth; ++d) {
      int pick = -1;
      if (node_id >= 0) {
        const TreeNode& node = nodes_[node_id];
        double best_q = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < node.actions.size(); ++i) {
          const ActionStat& a = node.actions[i];
          if (a.n > 0 && a.q > best_q + 1e-15) {
            best_q = a.q;
            pick = static_cast<int>(i);
          }
        }
        if (d == 0 && pick >= 0) {
          result.root_value = best_q;
          result.root_info_bits = node.actions[pick].info;
        }
      }

      MacroAction macro;
      int next_node = -1;
      if (pick >= 0) {
        macro = nodes_[node_id].actions[pick].macro;
        next_node = nodes_[node_id].actions[pick].child;
      } else {
        // Tree ran out: continue with the deterministic rollout policy.
        const auto macros = enumerate_macro_actions(*snap_.irm, state.cell, params_.macro_length);
        if (macros.size() == 1 && macros[0].length == 0) break;
        macro = macros[choose_rollout_macro(state, macros, /*deterministic=*/true)];
      }
      if (macro.length == 0) break;
      sim_.simulate_step(state, macro);
      result.macros.push_back(macro);
      for (int j = 0; j < macro.length; ++j) result.policy.actions.push_back(macro.move);
      node_id = next_node;
    }
  }

  const LocalSnapshot& snap_;
  const Guidance& guidance_;
  const LcpParams& params_;
  Simulator sim_;
  std::mt19937_64 rng_;
  std::vector<TreeNode> nodes_;
  std::unordered_map<CellIndex, double, CellHash> gain_field_;
  double max_abs_return_ = 0.0;
  double last_info_ = 0.0;
};

}  // namespace

void dump_trace(std::ostream& out, const PlanResult& result) {
  for (std::size_t i = 0; i < result.root_stats.size(); ++i) {
    const RootActionStat& a = result.root_stats[i];
    out << i << ' ' << a.visits << ' ' << a.q << '\n';
  }
}

PlanResult pomcp_plan(const LocalSnapshot& snap, const Guidance& guidance, const LcpParams& params,
                      std::uint64_t seed) {
  params.validate();
  snap.weights.validate();

  // Mode choice: nominal information gathering when residual uncertainty is
  // within simulation reach, otherwise guidance-driven relocation.
  Search probe(snap, guidance, /*guidance_mode=*/false, params, seed);
  const bool local_gain =
      probe.gain_reachable(cell_of(snap.pose, snap.irm->resolution()));
  if (local_gain || !guidance.valid) {
    PlanResult result = probe.run();
    if (!result.stuck && result.root_info_bits < params.epsilon_info_bits && guidance.valid) {
      Search relocate(snap, guidance, /*guidance_mode=*/true, params, seed);
      return relocate.run();
    }
    return result;
  }
  Search relocate(snap, guidance, /*guidance_mode=*/true, params, seed);
  return relocate.run();
}

}  // namespace plgrim::lcp
