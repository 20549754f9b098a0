#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/gcp.hpp"
#include "plgrim/irm.hpp"
#include "plgrim/lcp.hpp"
#include "plgrim/policy.hpp"
#include "plgrim/reward.hpp"
#include "plgrim/world.hpp"

namespace plgrim::executive {

enum class PlannerKind { Plgrim, Nbv, Hfe };

const char* planner_name(PlannerKind p);

struct ExecParams {
  int step_budget = 0;     // 0 = unbounded
  int stuck_episodes = 10; // consecutive no-progress episodes before aborting
  int execute_steps = 0;   // delta-t; 0 defaults to one LCP macro
};

struct NbvParams {
  int samples = 30;
};

// Everything a single run needs besides the world and the seed.
struct MissionConfig {
  PlannerKind planner = PlannerKind::Plgrim;
  world::SensorSpec sensor;
  world::MotionNoise noise;
  int window_cells = 21;
  irm::IrmParams irm;
  reward::RewardWeights weights;
  gcp::GcpParams gcp;
  lcp::LcpParams lcp;
  NbvParams nbv;
  ExecParams exec;

  void validate() const;
};

enum class EpisodeMode { LocalCoverage, Relocate, Done };

const char* mode_name(EpisodeMode m);

struct EpisodeReport {
  int episode = 0;
  double wall_time_ms = 0.0;
  EpisodeMode mode = EpisodeMode::LocalCoverage;
  int tau_star = 0;
  Policy policy;
  double coverage_fraction = 0.0;
  int frontier_count = 0;
  std::size_t global_nodes = 0;
};

struct StepRecord {
  int step = 0;
  double sim_time = 0.0;
  std::size_t covered_cells = 0;
  double coverage_fraction = 0.0;
  RobotPose pose;
  EpisodeMode mode = EpisodeMode::LocalCoverage;
  int episode = 0;
  double cumulative_distance_m = 0.0;
};

using StepObserver = std::function<void(const StepRecord&)>;

struct MissionResult {
  std::vector<EpisodeReport> episodes;
  bool completed = false;      // terminated with zero frontiers
  bool aborted = false;        // stuck-detector fired
  std::string diagnostic;
  std::size_t steps = 0;
  double final_coverage = 0.0;
  double trajectory_length_m = 0.0;
  std::size_t global_nodes = 0;
  std::size_t frontier_events = 0;  // total frontier insertions over the run
};

// Receding-horizon mission loop: sense, update beliefs, rebuild IRMs, plan
// (GCP guidance -> LCP, or a baseline planner), reconcile with the previous
// policy and execute a prefix. Terminates when no frontiers remain or the
// step budget runs out; aborts after stuck_episodes no-progress episodes.
MissionResult run_mission(world::GroundTruthWorld& world, const MissionConfig& config,
                          std::uint64_t seed, const StepObserver& observer = {});

// ---------------------------------------------------------------------------
// Policy reconciliation (exposed for tests).

// Belief view used to re-simulate a policy tail under current knowledge.
struct BeliefView {
  const belief::RiskMap* risk = nullptr;
  const belief::CoverageBelief* coverage = nullptr;
  RobotPose pose;
  world::SensorSpec sensor;
  double lethal_threshold = 0.95;
  double coverage_prior = 0.5;
};

struct ReconcileResult {
  int tau_star = 0;
  std::vector<PrimitiveMove> kept_prefix;
  std::vector<double> j_values;  // J(tau) for tau = 0..T-delta_t
};

// Evaluates J(tau) for every tau by re-simulating the previous policy's tail
// under the updated belief, and keeps the argmax prefix (ties prefer larger
// tau). tau* = 0 means full replan. Steps into believed-lethal or unknown
// cells score a large negative penalty.
ReconcileResult reconcile(const Policy& prev, int executed_steps, const BeliefView& view,
                          const reward::RewardWeights& weights);

}  // namespace plgrim::executive
