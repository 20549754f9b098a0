#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "plgrim/irm.hpp"
#include "plgrim/policy.hpp"
#include "plgrim/reward.hpp"
#include "plgrim/world.hpp"

namespace plgrim::lcp {

struct LcpParams {
  int macro_length = 6;            // L: primitive steps per macro
  int depth = 4;                   // D: macro actions per simulation
  int budget = 3000;               // simulations per planning episode
  double uct_scale = 2.0;          // c = uct_scale * max observed |return|
  double rollout_epsilon = 0.1;    // random-macro probability in rollouts
  double epsilon_info_bits = 1e-3; // local-coverage-exhausted threshold
  double guidance_weight = 1.0;    // per-meter progress reward in guidance mode
  double coverage_prior = 0.5;

  void validate() const;
};

// Straight-line run of primitive moves in one of the 8 directions.
struct MacroAction {
  PrimitiveMove move = PrimitiveMove::Wait;
  int length = 0;  // 0 marks the terminal hold action
};

// All applicable macros at `from`: per direction, the longest straight run
// (up to max_length) of believed-traversable cells, truncated at the first
// non-node cell; zero-length macros are dropped. Exposes the hold action
// only when every direction is blocked.
std::vector<MacroAction> enumerate_macro_actions(const irm::LocalIRM& irm, CellIndex from,
                                                 int max_length);

// Guidance parameter handed down from the global planner: the target
// frontier, the direction of the chosen global action, and a geodesic
// distance-to-target field over known space (meters).
struct Guidance {
  bool valid = false;
  CellIndex target_cell;
  Heading direction = Heading::East;
  std::shared_ptr<const std::unordered_map<CellIndex, double, CellHash>> distance_field;
};

// Immutable planning inputs for one episode.
struct LocalSnapshot {
  const irm::LocalIRM* irm = nullptr;
  RobotPose pose;
  world::SensorSpec sensor;
  reward::RewardWeights weights;
  // Cells already swept by a kept policy prefix this episode.
  std::vector<CellIndex> initial_overlay;
};

// Simulated robot-world state during tree search: pose on the Local IRM and
// a copy-on-write coverage overlay (cells only ever flip toward covered).
struct LocalSimState {
  CellIndex cell;
  Heading heading = Heading::East;
  std::unordered_set<CellIndex, CellHash> overlay;  // cells covered during simulation
  int steps = 0;                                    // accumulated discount exponent
};

struct StepOutcome {
  double reward = 0.0;     // discounted from the macro start
  double info_bits = 0.0;  // undiscounted information gathered
  double cost = 0.0;       // undiscounted action cost
};

// Generative model: applies the macro over the believed map, sweeping the
// predicted coverage footprint along intermediate cells. Caller guarantees
// applicability (macros come from enumerate_macro_actions at state.cell).
class Simulator {
 public:
  Simulator(const LocalSnapshot& snap, const Guidance& guidance, bool guidance_mode,
            const LcpParams& params);

  StepOutcome simulate_step(LocalSimState& state, const MacroAction& macro) const;

  // Footprint of a pose cell: visible believed-traversable node cells within
  // the coverage radius (memoized).
  const std::vector<CellIndex>& footprint(CellIndex at) const;

  bool guidance_mode() const { return guidance_mode_; }

 private:
  double potential_m(CellIndex c) const;

  const LocalSnapshot& snap_;
  const Guidance& guidance_;
  bool guidance_mode_;
  const LcpParams& params_;
  mutable std::unordered_map<CellIndex, std::vector<CellIndex>, CellHash> footprint_cache_;
};

struct RootActionStat {
  MacroAction macro;
  int visits = 0;
  double q = 0.0;
  double info_bits = 0.0;
};

struct PlanResult {
  Policy policy;
  std::vector<MacroAction> macros;
  std::vector<RootActionStat> root_stats;
  double root_value = 0.0;
  double root_info_bits = 0.0;  // info component of the best root action
  bool guidance_mode = false;
  bool stuck = false;
  int simulations = 0;
};

// Planning trace: one "action_idx N Q" line per root action.
void dump_trace(std::ostream& out, const PlanResult& result);

// POMCP with UCT over macro actions and deterministic belief-predicted
// observations (one child per action). Returns the root-greedy macro
// sequence of depth D flattened to a primitive policy; deterministic for a
// fixed snapshot, seed and budget.
PlanResult pomcp_plan(const LocalSnapshot& snap, const Guidance& guidance, const LcpParams& params,
                      std::uint64_t seed);

}  // namespace plgrim::lcp
