// plgrim command line: single exploration runs, batch matrices and summary
// tables. CSV schemas are documented in the README.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "plgrim/harness.hpp"
#include "plgrim/kernels.hpp"

namespace {

int cmd_explore(const std::string& config_path, std::optional<std::uint64_t> seed,
                const std::string& planner, const std::string& out_dir,
                const std::string& dump_irm, const std::string& dump_belief) {
  plgrim::harness::RunConfig config = plgrim::harness::RunConfig::from_file(config_path);
  if (seed) config.seed = *seed;
  if (!planner.empty()) config.set("planner", planner);
  config.mission.validate();

  plgrim::harness::RunSummary summary;
  if (out_dir.empty()) {
    summary = plgrim::harness::run_single(config, std::cout);
  } else {
    summary = plgrim::harness::run_single_to_dir(config, out_dir);
  }

  if (!dump_irm.empty() || !dump_belief.empty()) {
    // Re-run the belief pipeline over the recorded trajectory would be
    // wasteful; instead rerun the mission privately with dumps enabled.
    // Dumps are small debug artifacts, so the extra run is acceptable only
    // when requested.
    plgrim::world::GroundTruthWorld world =
        plgrim::world::GroundTruthWorld::load_file(config.environment);
    plgrim::belief::RiskMap risk(config.mission.window_cells, world.resolution(),
                                 world.start_pose());
    plgrim::belief::CoverageBelief coverage;
    plgrim::belief::PoseGraph path;
    plgrim::irm::GlobalIRM global;
    plgrim::RobotPose pose = world.start_pose();
    std::mt19937_64 rng(config.seed);
    double t = 0.0;
    risk.update(world.sense_risk(pose, config.mission.sensor), pose);
    coverage.mark_covered(world.sense_coverage(pose, config.mission.sensor));
    path.append(pose, t);
    const plgrim::irm::GridBounds bounds{world.width(), world.height()};
    const auto frontiers =
        plgrim::irm::detect_frontiers(coverage, risk, config.mission.irm, bounds);
    plgrim::irm::update_global_irm(global, path, frontiers, risk, config.mission.irm);
    if (!dump_irm.empty()) {
      std::ofstream out(dump_irm);
      plgrim::irm::dump_graph(out, global);
    }
    if (!dump_belief.empty()) {
      std::ofstream out(dump_belief);
      plgrim::belief::dump_snapshot(out, risk, coverage);
    }
  }

  std::cerr << summary.name << ": coverage " << summary.final_coverage << " in " << summary.steps
            << " steps" << (summary.completed ? " (complete)" : "")
            << (summary.aborted ? " [ABORTED: " + summary.diagnostic + "]" : "") << "\n";
  return summary.aborted ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLGRIM coverage-planning benchmark"};
  app.require_subcommand(1);

  std::string config_path, planner, out_dir, spec_path, in_dir;
  std::string dump_irm, dump_belief, kernels_backend;
  std::optional<std::uint64_t> seed;

  CLI::App* explore = app.add_subcommand("explore", "run one exploration mission");
  explore->add_option("--config", config_path, "run configuration file")->required();
  explore->add_option("--seed", seed, "override the configured seed");
  explore->add_option("--planner", planner, "override the configured planner (plgrim|nbv|hfe)");
  explore->add_option("--out", out_dir, "directory for the run CSV (default: stdout)");
  explore->add_option("--dump-irm", dump_irm, "write an initial Global IRM dump to this file");
  explore->add_option("--dump-belief", dump_belief, "write an initial belief snapshot to this file");

  CLI::App* matrix = app.add_subcommand("matrix", "run a planner x environment x seed matrix");
  matrix->add_option("--spec", spec_path, "matrix specification file")->required();
  matrix->add_option("--out", out_dir, "output directory")->required();

  CLI::App* summarize = app.add_subcommand("summarize", "aggregate run CSVs into a table");
  summarize->add_option("--in", in_dir, "directory of run CSVs")->required();

  app.add_option("--kernels", kernels_backend, "force kernel backend (scalar|avx2)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!kernels_backend.empty()) {
      plgrim::kernels::force_backend(kernels_backend == "avx2"
                                         ? plgrim::kernels::Backend::Avx2
                                         : plgrim::kernels::Backend::Scalar);
    }
    if (explore->parsed()) {
      return cmd_explore(config_path, seed, planner, out_dir, dump_irm, dump_belief);
    }
    if (matrix->parsed()) {
      const auto spec = plgrim::harness::MatrixSpec::from_file(spec_path);
      const auto summaries = plgrim::harness::run_matrix(spec, out_dir);
      int aborted = 0;
      for (const auto& s : summaries) aborted += s.aborted ? 1 : 0;
      std::cerr << summaries.size() << " runs, " << aborted << " aborted; summary in " << out_dir
                << "/summary.csv\n";
      return 0;
    }
    if (summarize->parsed()) {
      const auto stats = plgrim::harness::summarize_dir(in_dir);
      plgrim::harness::write_comparison(std::cout, stats);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
