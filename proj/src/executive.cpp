#include "plgrim/executive.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>

#include "plgrim/baselines.hpp"
#include "plgrim/grid_search.hpp"
#include "plgrim/kernels.hpp"

namespace plgrim::executive {

namespace {

constexpr double kLethalStepPenalty = 1e9;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t v = seed ^ (salt * 0x9E3779B97F4A7C15ull);
  v ^= v >> 33;
  v *= 0xFF51AFD7ED558CCDull;
  v ^= v >> 33;
  return v;
}

// Predicted footprint over believed known sub-lethal space; used when
// re-simulating a policy tail outside the Local IRM machinery.
std::vector<CellIndex> believed_footprint(const BeliefView& view, CellIndex at) {
  const double res = view.risk->resolution();
  std::vector<CellIndex> cells;
  const auto traversable = [&](CellIndex c) {
    const auto r = view.risk->known_risk(c);
    return r.has_value() && *r < view.lethal_threshold;
  };
  for (CellIndex c : world::footprint_box(at, view.sensor.coverage_radius_m, res)) {
    if (!traversable(c)) continue;
    if (view.sensor.line_of_sight && !world::los_clear(at, c, traversable)) continue;
    cells.push_back(c);
  }
  return cells;
}

}  // namespace

const char* planner_name(PlannerKind p) {
  switch (p) {
    case PlannerKind::Plgrim: return "plgrim";
    case PlannerKind::Nbv: return "nbv";
    case PlannerKind::Hfe: return "hfe";
  }
  return "?";
}

const char* mode_name(EpisodeMode m) {
  switch (m) {
    case EpisodeMode::LocalCoverage: return "local-coverage";
    case EpisodeMode::Relocate: return "relocate";
    case EpisodeMode::Done: return "done";
  }
  return "?";
}

void MissionConfig::validate() const {
  sensor.validate();
  irm.validate();
  weights.validate();
  gcp.validate();
  lcp.validate();
  if (window_cells < 1 || window_cells % 2 == 0) {
    throw std::invalid_argument("window_cells must be a positive odd number");
  }
  if (!(noise.slip_probability >= 0.0 && noise.slip_probability <= 1.0)) {
    throw std::invalid_argument("slip_probability must lie in [0,1]");
  }
  if (nbv.samples < 1) throw std::invalid_argument("nbv.samples must be >= 1");
  if (exec.stuck_episodes < 1) throw std::invalid_argument("stuck_episodes must be >= 1");
  if (exec.step_budget < 0) throw std::invalid_argument("step_budget must be >= 0");
}

ReconcileResult reconcile(const Policy& prev, int executed_steps, const BeliefView& view,
                          const reward::RewardWeights& weights) {
  ReconcileResult result;
  std::vector<PrimitiveMove> tail(
      prev.actions.begin() + std::min<std::size_t>(executed_steps, prev.actions.size()),
      prev.actions.end());

  const double res = view.risk->resolution();
  const auto believed_blocked = [&](CellIndex c) {
    const auto r = view.risk->known_risk(c);
    return !r.has_value() || *r >= view.lethal_threshold;
  };

  // Re-simulate the tail step by step under the current belief; J(tau) keeps
  // the first tau steps.
  result.j_values.assign(tail.size() + 1, 0.0);
  CellIndex cell = cell_of(view.pose, res);
  Heading heading = view.pose.heading;
  std::unordered_set<CellIndex, CellHash> overlay;
  std::vector<double> probs;
  double discount = 1.0;
  double j = 0.0;
  for (std::size_t k = 0; k < tail.size(); ++k) {
    const PrimitiveMove a = tail[k];
    double r = 0.0;
    if (is_motion(a)) {
      const Heading dir = heading_of(a);
      const CellIndex next{cell.x + kHeadingDx[static_cast<int>(dir)],
                           cell.y + kHeadingDy[static_cast<int>(dir)]};
      if (believed_blocked(next)) {
        r = -kLethalStepPenalty;
        // The hypothetical rollout still advances so later taus stay defined.
        cell = next;
        heading = dir;
      } else {
        const double rho = std::max(view.risk->known_risk(cell).value_or(0.0),
                                    view.risk->known_risk(next).value_or(0.0));
        const double cost =
            reward::action_cost(step_length_m(dir, res), rho, heading_change(heading, dir), weights);
        probs.clear();
        for (const CellIndex& c : believed_footprint(view, next)) {
          if (overlay.count(c)) continue;
          const double p = view.coverage->p_or(c, view.coverage_prior);
          if (p > 0.0 && p < 1.0) {
            probs.push_back(p);
            overlay.insert(c);
          }
        }
        r = reward::step_reward(reward::info_gain(probs), cost, weights);
        cell = next;
        heading = dir;
      }
    }
    j += discount * r;
    discount *= weights.gamma;
    result.j_values[k + 1] = j;
  }

  // argmax over tau; ties favor the larger tau (consistency).
  int best = 0;
  for (std::size_t tau = 1; tau < result.j_values.size(); ++tau) {
    if (result.j_values[tau] >= result.j_values[best] - 1e-12) {
      best = static_cast<int>(tau);
    }
  }
  result.tau_star = best;
  result.kept_prefix.assign(tail.begin(), tail.begin() + best);
  return result;
}

namespace {

// Shared per-run state for all planners.
struct Mission {
  world::GroundTruthWorld& world;
  const MissionConfig& config;
  std::uint64_t seed;
  const StepObserver& observer;

  belief::RiskMap risk;
  belief::CoverageBelief coverage;
  belief::PoseGraph path;
  irm::GlobalIRM global_irm;

  RobotPose pose;
  std::mt19937_64 sim_rng;
  int steps = 0;
  double sim_time = 0.0;
  double cum_dist = 0.0;
  double reachable = 1.0;
  EpisodeMode current_mode = EpisodeMode::LocalCoverage;
  int episode = 0;

  Mission(world::GroundTruthWorld& w, const MissionConfig& c, std::uint64_t s,
          const StepObserver& obs)
      : world(w),
        config(c),
        seed(s),
        observer(obs),
        risk(c.window_cells, w.resolution(), w.start_pose()),
        pose(w.start_pose()),
        sim_rng(mix_seed(s, 0xA11CE)) {
    reachable = static_cast<double>(world.reachable_cells().size());
  }

  double coverage_fraction() const {
    return reachable > 0.0 ? static_cast<double>(world.covered_count()) / reachable : 1.0;
  }

  void sense_and_update() {
    risk.update(world.sense_risk(pose, config.sensor), pose);
    const auto fresh = world.sense_coverage(pose, config.sensor);
    coverage.mark_covered(fresh);
    path.append(pose, sim_time);
  }

  void emit_step() {
    if (!observer) return;
    observer({steps, sim_time, world.covered_count(), coverage_fraction(), pose, current_mode,
              episode, cum_dist});
  }

  bool budget_exhausted() const {
    return config.exec.step_budget > 0 && steps >= config.exec.step_budget;
  }

  // Executes one primitive action with the safety interlock; returns false
  // when the step budget is exhausted afterwards.
  bool execute_action(PrimitiveMove a) {
    if (is_motion(a)) {
      const CellIndex target = {cell_of(pose, world.resolution()).x + offset_of(a).x,
                                cell_of(pose, world.resolution()).y + offset_of(a).y};
      // Never step into a cell believed lethal (or unknown) at execution
      // time; new sensing during the episode may have invalidated the plan.
      const auto believed = risk.known_risk(target);
      if (!believed.has_value() || *believed >= config.irm.lethal_threshold) {
        a = PrimitiveMove::Wait;
      }
    }
    const world::StepResult res = world.step_robot(pose, a, config.noise, sim_rng);
    if (is_motion(a) && !res.collided && !res.slipped) {
      cum_dist += step_length_m(heading_of(a), world.resolution());
    }
    pose = res.pose;
    steps += 1;
    sim_time += 1.0;
    sense_and_update();
    emit_step();
    return !budget_exhausted();
  }
};

MissionResult run_plgrim(Mission& m) {
  const MissionConfig& cfg = m.config;
  MissionResult result;
  Policy prev_policy;
  bool have_prev = false;
  int prev_executed = 0;
  int no_progress = 0;
  const int delta_t = cfg.exec.execute_steps > 0 ? cfg.exec.execute_steps : cfg.lcp.macro_length;
  const irm::GridBounds bounds{m.world.width(), m.world.height()};

  while (true) {
    const auto t_start = std::chrono::steady_clock::now();
    EpisodeReport report;
    report.episode = m.episode;

    const std::size_t covered_before = m.world.covered_count();
    const CellIndex pose_cell_before = cell_of(m.pose, m.world.resolution());

    const auto frontiers = irm::detect_frontiers(m.coverage, m.risk, cfg.irm, bounds);
    irm::update_global_irm(m.global_irm, m.path, frontiers, m.risk, cfg.irm);
    report.frontier_count = static_cast<int>(frontiers.size());
    report.global_nodes = m.global_irm.node_count();

    if (frontiers.empty()) {
      report.mode = EpisodeMode::Done;
      report.coverage_fraction = m.coverage_fraction();
      result.episodes.push_back(report);
      result.completed = true;
      break;
    }

    // Global guidance.
    const gcp::GlobalValueTable table = gcp::value_iteration(m.global_irm, cfg.weights, cfg.gcp);
    lcp::Guidance guidance;
    const int near = m.global_irm.nearest_node(m.pose);
    if (near >= 0 && !table.exploration_complete) {
      const auto action = gcp::qmdp_action(m.global_irm, table, gcp::PoseBelief::point_mass(near));
      if (action && action->target_frontier >= 0) {
        const irm::GlobalNode& goal = m.global_irm.node(action->target_frontier);
        const irm::GlobalNode& to = m.global_irm.node(action->to_node);
        guidance.valid = true;
        guidance.target_cell = goal.cell;
        const double dx = to.x_m - m.pose.x_m;
        const double dy = to.y_m - m.pose.y_m;
        const double ang = std::atan2(dy, dx);
        // Quantize the global action direction onto the 8 headings
        // (atan2 measures from +x toward +y, i.e. from East toward South).
        static const Heading by_octant[8] = {Heading::East,  Heading::SouthEast, Heading::South,
                                             Heading::SouthWest, Heading::West,  Heading::NorthWest,
                                             Heading::North, Heading::NorthEast};
        const int octant =
            (static_cast<int>(std::lround(ang / (std::numbers::pi / 4))) % 8 + 8) % 8;
        guidance.direction = by_octant[octant];
      }
    }
    if (!guidance.valid && !frontiers.empty()) {
      // Frontiers exist but none is connected to the graph yet; head for the
      // nearest candidate directly.
      const CellIndex pc = cell_of(m.pose, m.world.resolution());
      const irm::FrontierCandidate* best = nullptr;
      for (const auto& f : frontiers) {
        if (!best || euclidean_m(f.cell, pc, m.world.resolution()) <
                         euclidean_m(best->cell, pc, m.world.resolution())) {
          best = &f;
        }
      }
      guidance.valid = true;
      guidance.target_cell = best->cell;
      guidance.direction = m.pose.heading;
    }
    if (guidance.valid) {
      // Geodesic distance-to-target field over believed known space.
      const auto passable = [&](CellIndex c) {
        const auto r = m.risk.known_risk(c);
        return r.has_value() && *r < cfg.irm.lethal_threshold;
      };
      const CellIndex sources[1] = {guidance.target_cell};
      guidance.distance_field =
          std::make_shared<const std::unordered_map<CellIndex, double, CellHash>>(
              grid_search::distance_field(sources, passable, m.world.resolution()));
    }

    // Reconcile the previous policy under the updated belief.
    BeliefView view{&m.risk, &m.coverage, m.pose, cfg.sensor, cfg.irm.lethal_threshold,
                    cfg.irm.coverage_prior};
    std::vector<PrimitiveMove> kept;
    if (have_prev) {
      const ReconcileResult rec = reconcile(prev_policy, prev_executed, view, cfg.weights);
      report.tau_star = rec.tau_star;
      kept = rec.kept_prefix;
    }

    // Local IRM snapshot and the post-prefix root state for the suffix plan.
    const irm::LocalIRM local = irm::build_local_irm(m.risk, m.coverage, m.pose, cfg.irm);
    lcp::LocalSnapshot snap;
    snap.irm = &local;
    snap.sensor = cfg.sensor;
    snap.weights = cfg.weights;
    RobotPose suffix_pose = m.pose;
    {
      CellIndex c = cell_of(m.pose, m.world.resolution());
      Heading h = m.pose.heading;
      std::unordered_set<CellIndex, CellHash> swept;
      for (PrimitiveMove a : kept) {
        if (!is_motion(a)) continue;
        const Heading dir = heading_of(a);
        c = {c.x + kHeadingDx[static_cast<int>(dir)], c.y + kHeadingDy[static_cast<int>(dir)]};
        h = dir;
        for (const CellIndex& fp : believed_footprint(view, c)) swept.insert(fp);
      }
      snap.initial_overlay.assign(swept.begin(), swept.end());
      std::sort(snap.initial_overlay.begin(), snap.initial_overlay.end(),
                [](CellIndex a, CellIndex b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
      suffix_pose = pose_at_cell(c, m.world.resolution(), h);
    }
    snap.pose = suffix_pose;

    const lcp::PlanResult plan =
        lcp::pomcp_plan(snap, guidance, cfg.lcp, mix_seed(m.seed, 0xB0B + m.episode));

    Policy stitched;
    stitched.t0 = m.sim_time;
    stitched.horizon = cfg.lcp.depth * cfg.lcp.macro_length;
    stitched.actions = kept;
    for (PrimitiveMove a : plan.policy.actions) {
      if (static_cast<int>(stitched.actions.size()) >= stitched.horizon) break;
      stitched.actions.push_back(a);
    }
    stitched.source = !kept.empty() ? Policy::Source::Reconciled
                                    : (plan.guidance_mode ? Policy::Source::GcpGuided
                                                          : Policy::Source::Lcp);

    report.mode = plan.guidance_mode || plan.root_info_bits < cfg.lcp.epsilon_info_bits
                      ? EpisodeMode::Relocate
                      : EpisodeMode::LocalCoverage;
    m.current_mode = report.mode;

    // Execute the policy prefix.
    bool budget_hit = false;
    const int exec_n = std::max<int>(1, std::min<int>(delta_t, stitched.actions.size()));
    for (int k = 0; k < exec_n; ++k) {
      const PrimitiveMove a =
          k < static_cast<int>(stitched.actions.size()) ? stitched.actions[k] : PrimitiveMove::Wait;
      if (!m.execute_action(a)) {
        budget_hit = true;
        break;
      }
    }

    prev_policy = stitched;
    have_prev = !stitched.actions.empty();
    prev_executed = exec_n;
    report.policy = stitched;
    report.coverage_fraction = m.coverage_fraction();
    report.wall_time_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
            .count();
    result.episodes.push_back(report);
    m.episode += 1;

    if (budget_hit) break;

    const bool progressed = m.world.covered_count() > covered_before ||
                            cell_of(m.pose, m.world.resolution()) != pose_cell_before;
    no_progress = progressed ? 0 : no_progress + 1;
    if (no_progress >= cfg.exec.stuck_episodes) {
      result.aborted = true;
      result.diagnostic = "no progress for " + std::to_string(no_progress) +
                          " consecutive episodes (pose and coverage frozen)";
      std::cerr << "[plgrim] abort: " << result.diagnostic << " at step " << m.steps << "\n";
      break;
    }
  }
  return result;
}

MissionResult run_baseline(Mission& m) {
  const MissionConfig& cfg = m.config;
  MissionResult result;
  int no_progress = 0;
  std::mt19937_64 nbv_rng(mix_seed(m.seed, 0x5A5A));
  const irm::GridBounds bounds{m.world.width(), m.world.height()};

  while (true) {
    EpisodeReport report;
    report.episode = m.episode;

    const std::size_t covered_before = m.world.covered_count();
    const CellIndex pose_cell_before = cell_of(m.pose, m.world.resolution());

    const auto frontiers = irm::detect_frontiers(m.coverage, m.risk, cfg.irm, bounds);
    irm::update_global_irm(m.global_irm, m.path, frontiers, m.risk, cfg.irm);
    report.frontier_count = static_cast<int>(frontiers.size());
    report.global_nodes = m.global_irm.node_count();

    if (frontiers.empty()) {
      report.mode = EpisodeMode::Done;
      report.coverage_fraction = m.coverage_fraction();
      result.episodes.push_back(report);
      result.completed = true;
      break;
    }

    Policy policy;
    bool stuck = false;
    if (cfg.planner == PlannerKind::Nbv) {
      const irm::LocalIRM local = irm::build_local_irm(m.risk, m.coverage, m.pose, cfg.irm);
      const auto nbv = baselines::nbv_plan(local, cfg.sensor, cfg.weights, cfg.nbv.samples,
                                           cfg.irm.lethal_threshold, nbv_rng);
      stuck = nbv.stuck;
      policy = nbv.policy;
      report.mode = EpisodeMode::LocalCoverage;
    } else {
      const auto hfe = baselines::hfe_plan(m.global_irm, m.risk, m.pose, cfg.window_cells, cfg.irm);
      stuck = hfe.stuck;
      policy = hfe.policy;
      if (hfe.done) {
        // Candidates were detected but none is in the graph yet; walk to the
        // nearest one over known space instead of declaring completion.
        const CellIndex pc = cell_of(m.pose, m.world.resolution());
        const auto passable = [&](CellIndex c) {
          const auto r = m.risk.known_risk(c);
          return r.has_value() && *r < cfg.irm.lethal_threshold;
        };
        const auto cell_risk = [&](CellIndex c) { return m.risk.known_risk(c).value_or(0.0); };
        stuck = true;
        for (const auto& f : frontiers) {
          const auto path =
              grid_search::astar(pc, f.cell, passable, cell_risk, m.world.resolution());
          if (path.found && path.cells.size() > 1) {
            policy.actions.clear();
            for (std::size_t i = 1; i < path.cells.size(); ++i) {
              const int dx = path.cells[i].x - path.cells[i - 1].x;
              const int dy = path.cells[i].y - path.cells[i - 1].y;
              for (int h = 0; h < kNumHeadings; ++h) {
                if (kHeadingDx[h] == dx && kHeadingDy[h] == dy) {
                  policy.actions.push_back(static_cast<PrimitiveMove>(h));
                  break;
                }
              }
            }
            stuck = false;
            break;
          }
        }
      }
      report.mode = EpisodeMode::Relocate;
    }
    m.current_mode = report.mode;

    bool budget_hit = false;
    if (stuck || policy.actions.empty()) {
      if (!m.execute_action(PrimitiveMove::Wait)) budget_hit = true;
    } else {
      for (PrimitiveMove a : policy.actions) {
        if (!m.execute_action(a)) {
          budget_hit = true;
          break;
        }
      }
    }

    report.policy = policy;
    report.coverage_fraction = m.coverage_fraction();
    result.episodes.push_back(report);
    m.episode += 1;

    if (budget_hit) break;

    const bool progressed = m.world.covered_count() > covered_before ||
                            cell_of(m.pose, m.world.resolution()) != pose_cell_before;
    no_progress = progressed ? 0 : no_progress + 1;
    if (no_progress >= cfg.exec.stuck_episodes) {
      result.aborted = true;
      result.diagnostic = "baseline made no progress for " + std::to_string(no_progress) +
                          " consecutive episodes";
      std::cerr << "[" << planner_name(cfg.planner) << "] abort: " << result.diagnostic
                << " at step " << m.steps << "\n";
      break;
    }
  }
  return result;
}

}  // namespace

MissionResult run_mission(world::GroundTruthWorld& world, const MissionConfig& config,
                          std::uint64_t seed, const StepObserver& observer) {
  config.validate();
  Mission m(world, config, seed, observer);

  // Initial sensing before the first planning episode.
  m.sense_and_update();
  m.emit_step();

  MissionResult result =
      config.planner == PlannerKind::Plgrim ? run_plgrim(m) : run_baseline(m);
  result.steps = static_cast<std::size_t>(m.steps);
  result.final_coverage = m.coverage_fraction();
  result.trajectory_length_m = m.path.path_length_m();
  result.global_nodes = m.global_irm.node_count();
  result.frontier_events = m.global_irm.frontier_insertions();
  return result;
}

}  // namespace plgrim::executive
