#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "plgrim/executive.hpp"

namespace plgrim::harness {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One benchmark run: environment x planner x seed plus every module
// parameter. Parsed from flat "key = value" text with dotted module
// prefixes; unknown keys are rejected.
struct RunConfig {
  std::string environment;
  std::uint64_t seed = 0;
  executive::MissionConfig mission;

  static RunConfig from_stream(std::istream& in);
  static RunConfig from_file(const std::string& path);
  // Applies a single "key = value" assignment; throws ConfigError on unknown
  // keys or out-of-domain values.
  void set(const std::string& key, const std::string& value);

  std::string run_name() const;  // "<planner>__<env-stem>__seed<k>"
};

struct RunSummary {
  std::string name;
  std::string planner;
  std::string environment;
  std::uint64_t seed = 0;
  std::size_t steps = 0;
  double final_coverage = 0.0;
  double auc = 0.0;  // mean coverage fraction over emitted steps
  std::optional<std::size_t> steps_to_90;  // censored at budget when absent
  bool completed = false;
  bool aborted = false;
  std::string diagnostic;
};

// Executes one run, streaming per-step rows to `csv_out` (see write_csv_
// header for the schema). Deterministic per seed.
RunSummary run_single(const RunConfig& config, std::ostream& csv_out);

// Convenience wrapper writing "<out_dir>/<run_name>.csv".
RunSummary run_single_to_dir(const RunConfig& config, const std::string& out_dir);

// Matrix spec: flat text with keys
//   config = <base RunConfig file>   (optional)
//   environments = a.env,b.env
//   planners = plgrim,nbv,hfe
//   seeds = 1,2,3  or  1..10
//   jobs = N                          (optional, default hardware)
// plus any RunConfig override key applied to every run.
struct MatrixSpec {
  std::vector<RunConfig> runs;
  int jobs = 0;

  static MatrixSpec from_file(const std::string& path);
};

// Runs every config (in parallel up to `jobs`), one CSV per run plus
// summary.csv in out_dir. Aborted runs are recorded, not fatal.
std::vector<RunSummary> run_matrix(const MatrixSpec& spec, const std::string& out_dir);

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries);

struct PlannerStats {
  std::string planner;
  int runs = 0;
  double median_final_coverage = 0.0;
  std::optional<double> median_steps_to_90;  // absent when >= half the runs censored
  int censored = 0;
};

// Aggregates per-run CSVs found in `dir` into a per-planner comparison
// table; steps-to-90% is censored, never extrapolated.
std::vector<PlannerStats> summarize_dir(const std::string& dir);
std::vector<PlannerStats> summarize(const std::vector<RunSummary>& summaries);

void write_comparison(std::ostream& out, const std::vector<PlannerStats>& stats);

}  // namespace plgrim::harness
