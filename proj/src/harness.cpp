#include "plgrim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

namespace plgrim::harness {

namespace {

namespace fs = std::filesystem;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw ConfigError("");
    return v;
  } catch (...) {
    throw ConfigError("invalid numeric value for " + key + ": '" + value + "'");
  }
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw ConfigError("");
    return v;
  } catch (...) {
    throw ConfigError("invalid integer value for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("invalid boolean value for " + key + ": '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string env_stem(const std::string& path) { return fs::path(path).stem().string(); }

void apply_file(const std::string& path,
                const std::function<void(const std::string&, const std::string&)>& set) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    }
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  auto& m = mission;
  if (key == "environment") {
    environment = value;
  } else if (key == "planner") {
    if (value == "plgrim") m.planner = executive::PlannerKind::Plgrim;
    else if (value == "nbv") m.planner = executive::PlannerKind::Nbv;
    else if (value == "hfe") m.planner = executive::PlannerKind::Hfe;
    else throw ConfigError("unknown planner: '" + value + "'");
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "step_budget") {
    m.exec.step_budget = static_cast<int>(parse_int(key, value));
  } else if (key == "sensor.risk_radius_m") {
    m.sensor.risk_radius_m = parse_double(key, value);
  } else if (key == "sensor.coverage_radius_m") {
    m.sensor.coverage_radius_m = parse_double(key, value);
  } else if (key == "sensor.line_of_sight") {
    m.sensor.line_of_sight = parse_bool(key, value);
  } else if (key == "noise.enabled") {
    m.noise.enabled = parse_bool(key, value);
  } else if (key == "noise.slip_probability") {
    m.noise.slip_probability = parse_double(key, value);
  } else if (key == "belief.window_cells") {
    m.window_cells = static_cast<int>(parse_int(key, value));
  } else if (key == "irm.breadcrumb_spacing_m") {
    m.irm.breadcrumb_spacing_m = parse_double(key, value);
  } else if (key == "irm.edge_max_length_m") {
    m.irm.edge_max_length_m = parse_double(key, value);
    m.irm.neighborhood_radius_m = std::max(m.irm.neighborhood_radius_m, m.irm.edge_max_length_m);
  } else if (key == "irm.edge_max_risk") {
    m.irm.edge_max_risk = parse_double(key, value);
  } else if (key == "irm.lethal_threshold") {
    m.irm.lethal_threshold = parse_double(key, value);
  } else if (key == "irm.neighborhood_radius_m") {
    m.irm.neighborhood_radius_m = parse_double(key, value);
  } else if (key == "reward.k_info") {
    m.weights.k_info = parse_double(key, value);
  } else if (key == "reward.k_cost") {
    m.weights.k_cost = parse_double(key, value);
  } else if (key == "reward.k_dist") {
    m.weights.k_dist = parse_double(key, value);
  } else if (key == "reward.k_risk") {
    m.weights.k_risk = parse_double(key, value);
  } else if (key == "reward.k_motion") {
    m.weights.k_motion = parse_double(key, value);
  } else if (key == "reward.gamma") {
    m.weights.gamma = parse_double(key, value);
  } else if (key == "gcp.gamma") {
    m.gcp.gamma = parse_double(key, value);
  } else if (key == "gcp.epsilon_vi") {
    m.gcp.epsilon_vi = parse_double(key, value);
  } else if (key == "lcp.macro_length") {
    m.lcp.macro_length = static_cast<int>(parse_int(key, value));
  } else if (key == "lcp.depth") {
    m.lcp.depth = static_cast<int>(parse_int(key, value));
  } else if (key == "lcp.budget") {
    m.lcp.budget = static_cast<int>(parse_int(key, value));
  } else if (key == "lcp.uct_scale") {
    m.lcp.uct_scale = parse_double(key, value);
  } else if (key == "lcp.rollout_epsilon") {
    m.lcp.rollout_epsilon = parse_double(key, value);
  } else if (key == "lcp.epsilon_info_bits") {
    m.lcp.epsilon_info_bits = parse_double(key, value);
  } else if (key == "lcp.guidance_weight") {
    m.lcp.guidance_weight = parse_double(key, value);
  } else if (key == "lcp.coverage_prior") {
    m.lcp.coverage_prior = parse_double(key, value);
    m.irm.coverage_prior = m.lcp.coverage_prior;
  } else if (key == "nbv.samples") {
    m.nbv.samples = static_cast<int>(parse_int(key, value));
  } else if (key == "executive.stuck_episodes") {
    m.exec.stuck_episodes = static_cast<int>(parse_int(key, value));
  } else if (key == "executive.execute_steps") {
    m.exec.execute_steps = static_cast<int>(parse_int(key, value));
  } else {
    throw ConfigError("unknown config key: '" + key + "'");
  }
}

RunConfig RunConfig::from_stream(std::istream& in) {
  RunConfig config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    config.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  try {
    config.mission.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

RunConfig RunConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return from_stream(in);
}

std::string RunConfig::run_name() const {
  return std::string(executive::planner_name(mission.planner)) + "__" + env_stem(environment) +
         "__seed" + std::to_string(seed);
}

namespace {

void write_step_row(std::ostream& out, const char* planner, const executive::StepRecord& rec) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%d,%.1f,%zu,%.6f,%.3f,%.3f,%s,%s,%d,%.3f", rec.step,
                rec.sim_time, rec.covered_cells, rec.coverage_fraction, rec.pose.x_m, rec.pose.y_m,
                heading_name(rec.pose.heading), executive::mode_name(rec.mode), rec.episode,
                rec.cumulative_distance_m);
  out << planner << ',' << buf << '\n';
}

}  // namespace

RunSummary run_single(const RunConfig& config, std::ostream& csv_out) {
  if (config.environment.empty()) throw ConfigError("no environment configured");
  world::GroundTruthWorld world = world::GroundTruthWorld::load_file(config.environment);

  csv_out << "planner,step,time,covered_cells,coverage_fraction,x,y,heading,mode,episode,"
             "cumulative_distance_m\n";

  RunSummary summary;
  summary.name = config.run_name();
  summary.planner = executive::planner_name(config.mission.planner);
  summary.environment = config.environment;
  summary.seed = config.seed;

  double auc_acc = 0.0;
  std::size_t rows = 0;
  const char* planner = executive::planner_name(config.mission.planner);
  const executive::StepObserver observer = [&](const executive::StepRecord& rec) {
    write_step_row(csv_out, planner, rec);
    auc_acc += rec.coverage_fraction;
    ++rows;
    if (!summary.steps_to_90 && rec.coverage_fraction >= 0.9) {
      summary.steps_to_90 = static_cast<std::size_t>(rec.step);
    }
  };

  const executive::MissionResult result =
      executive::run_mission(world, config.mission, config.seed, observer);

  summary.steps = result.steps;
  summary.final_coverage = result.final_coverage;
  summary.auc = rows > 0 ? auc_acc / static_cast<double>(rows) : 0.0;
  summary.completed = result.completed;
  summary.aborted = result.aborted;
  summary.diagnostic = result.diagnostic;
  return summary;
}

RunSummary run_single_to_dir(const RunConfig& config, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const std::string path = (fs::path(out_dir) / (config.run_name() + ".csv")).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  return run_single(config, out);
}

MatrixSpec MatrixSpec::from_file(const std::string& path) {
  RunConfig base;
  std::vector<std::string> environments;
  std::vector<std::string> planners;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> overrides;
  int jobs = 0;

  apply_file(path, [&](const std::string& key, const std::string& value) {
    if (key == "config") {
      base = RunConfig::from_file(value);
    } else if (key == "environments") {
      environments = split_list(value);
    } else if (key == "planners") {
      planners = split_list(value);
    } else if (key == "seeds") {
      const auto dots = value.find("..");
      if (dots != std::string::npos) {
        const long lo = parse_int(key, trim(value.substr(0, dots)));
        const long hi = parse_int(key, trim(value.substr(dots + 2)));
        if (hi < lo) throw ConfigError("empty seed range: " + value);
        for (long s = lo; s <= hi; ++s) seeds.push_back(static_cast<std::uint64_t>(s));
      } else {
        for (const std::string& s : split_list(value)) {
          seeds.push_back(static_cast<std::uint64_t>(parse_int(key, s)));
        }
      }
    } else if (key == "jobs") {
      jobs = static_cast<int>(parse_int(key, value));
    } else {
      overrides.emplace_back(key, value);
    }
  });

  if (environments.empty()) {
    if (base.environment.empty()) throw ConfigError("matrix spec names no environments");
    environments.push_back(base.environment);
  }
  if (planners.empty()) planners.push_back(executive::planner_name(base.mission.planner));
  if (seeds.empty()) seeds.push_back(base.seed);

  MatrixSpec spec;
  spec.jobs = jobs;
  for (const std::string& env : environments) {
    for (const std::string& planner : planners) {
      for (std::uint64_t seed : seeds) {
        RunConfig config = base;
        config.set("environment", env);
        config.set("planner", planner);
        config.seed = seed;
        for (const auto& [k, v] : overrides) config.set(k, v);
        config.mission.validate();
        spec.runs.push_back(std::move(config));
      }
    }
  }
  return spec;
}

std::vector<RunSummary> run_matrix(const MatrixSpec& spec, const std::string& out_dir) {
  fs::create_directories(out_dir);
  std::vector<RunSummary> summaries(spec.runs.size());
  const int jobs = spec.jobs > 0
                       ? spec.jobs
                       : std::max(1u, std::thread::hardware_concurrency());

  std::atomic<std::size_t> next{0};
  const auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.runs.size()) return;
      try {
        summaries[i] = run_single_to_dir(spec.runs[i], out_dir);
      } catch (const std::exception& e) {
        summaries[i].name = spec.runs[i].run_name();
        summaries[i].planner = executive::planner_name(spec.runs[i].mission.planner);
        summaries[i].environment = spec.runs[i].environment;
        summaries[i].seed = spec.runs[i].seed;
        summaries[i].aborted = true;
        summaries[i].diagnostic = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ofstream out(fs::path(out_dir) / "summary.csv", std::ios::binary);
  write_summary_csv(out, summaries);
  return summaries;
}

void write_summary_csv(std::ostream& out, const std::vector<RunSummary>& summaries) {
  out << "run,planner,environment,seed,steps,final_coverage,auc,steps_to_90,censored,completed,"
         "aborted,diagnostic\n";
  std::vector<const RunSummary*> rows;
  for (const auto& s : summaries) rows.push_back(&s);
  std::sort(rows.begin(), rows.end(),
            [](const RunSummary* a, const RunSummary* b) { return a->name < b->name; });
  for (const RunSummary* s : rows) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%zu,%.6f,%.6f", s->steps, s->final_coverage, s->auc);
    out << s->name << ',' << s->planner << ',' << s->environment << ',' << s->seed << ',' << buf
        << ',';
    if (s->steps_to_90) {
      out << *s->steps_to_90 << ",0,";
    } else {
      out << ",1,";
    }
    out << (s->completed ? 1 : 0) << ',' << (s->aborted ? 1 : 0) << ','
        << s->diagnostic << '\n';
  }
}

namespace {

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<PlannerStats> summarize(const std::vector<RunSummary>& summaries) {
  std::map<std::string, std::vector<const RunSummary*>> by_planner;
  for (const auto& s : summaries) by_planner[s.planner].push_back(&s);

  std::vector<PlannerStats> out;
  for (const auto& [planner, runs] : by_planner) {
    PlannerStats stats;
    stats.planner = planner;
    stats.runs = static_cast<int>(runs.size());
    std::vector<double> coverage;
    std::vector<double> to90;
    for (const RunSummary* s : runs) {
      coverage.push_back(s->final_coverage);
      if (s->steps_to_90) {
        to90.push_back(static_cast<double>(*s->steps_to_90));
      } else {
        ++stats.censored;
      }
    }
    stats.median_final_coverage = median(coverage);
    // The median crossing time is known only when a majority crossed;
    // censored runs are never extrapolated.
    if (stats.censored * 2 < stats.runs) {
      // Censored runs sort above every observed crossing.
      std::vector<double> padded = to90;
      for (int i = 0; i < stats.censored; ++i) {
        padded.push_back(std::numeric_limits<double>::infinity());
      }
      std::sort(padded.begin(), padded.end());
      const std::size_t n = padded.size();
      const double med =
          n % 2 == 1 ? padded[n / 2] : 0.5 * (padded[n / 2 - 1] + padded[n / 2]);
      if (std::isfinite(med)) stats.median_steps_to_90 = med;
    }
    out.push_back(std::move(stats));
  }
  return out;
}

std::vector<PlannerStats> summarize_dir(const std::string& dir) {
  std::vector<RunSummary> summaries;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".csv" && entry.path().filename() != "summary.csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  for (const auto& file : files) {
    std::ifstream in(file);
    std::string header;
    if (!std::getline(in, header) || header.rfind("planner,step,", 0) != 0) continue;
    RunSummary s;
    s.name = file.stem().string();
    std::string line;
    double auc = 0.0;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      std::vector<std::string> fields = split_list(line);
      if (fields.size() < 11) continue;
      s.planner = fields[0];
      const std::size_t step = static_cast<std::size_t>(std::stoul(fields[1]));
      const double fraction = std::stod(fields[4]);
      s.steps = step;
      s.final_coverage = fraction;
      auc += fraction;
      ++rows;
      if (!s.steps_to_90 && fraction >= 0.9) s.steps_to_90 = step;
    }
    if (rows == 0) continue;
    s.auc = auc / static_cast<double>(rows);
    summaries.push_back(std::move(s));
  }
  return summarize(summaries);
}

void write_comparison(std::ostream& out, const std::vector<PlannerStats>& stats) {
  out << "planner,runs,median_final_coverage,median_steps_to_90,censored_runs\n";
  for (const auto& s : stats) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", s.median_final_coverage);
    out << s.planner << ',' << s.runs << ',' << buf << ',';
    if (s.median_steps_to_90) {
      std::snprintf(buf, sizeof(buf), "%.1f", *s.median_steps_to_90);
      out << buf;
    } else {
      out << "censored";
    }
    out << ',' << s.censored << '\n';
  }
}

}  // namespace plgrim::harness
