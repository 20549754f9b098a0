#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "plgrim/geometry.hpp"
#include "plgrim/world.hpp"

namespace plgrim::belief {

// Rolling-window risk belief. The window recenters with the robot and scopes
// what the Local IRM sees; cells scrolled out of the window report unknown
// through the window query. Sensed values are additionally retained in a
// persistent store so global-graph edge metrics and frontier validity can be
// evaluated away from the robot (walls must stay known or exploration would
// never terminate).
class RiskMap {
 public:
  RiskMap(int window_cells, double resolution, const RobotPose& center);

  // Latest-wins fusion of a sensed patch, then recenter on pose.
  void update(const world::RiskPatch& patch, const RobotPose& pose);

  // Risk estimate visible to the Local IRM: unknown outside the window.
  std::optional<double> risk_in_window(CellIndex c) const;

  // Persistent estimate: last sensed value regardless of window position.
  std::optional<double> known_risk(CellIndex c) const;

  bool known_lethal(CellIndex c, double lethal_threshold) const;

  bool in_window(CellIndex c) const;
  int window_cells() const { return window_cells_; }
  CellIndex window_center() const { return center_; }
  double resolution() const { return resolution_; }

  // Known in-window cells sorted by (y, x).
  std::vector<CellIndex> known_window_cells() const;
  // All cells ever sensed, sorted by (y, x).
  std::vector<CellIndex> known_cells() const;

 private:
  int window_cells_;
  double resolution_;
  CellIndex center_;
  std::unordered_map<CellIndex, double, CellHash> memory_;
};

// Global sparse coverage belief: cell -> p(covered). Absent cells are
// unknown; callers apply the max-entropy prior where appropriate.
class CoverageBelief {
 public:
  void mark_covered(std::span<const CellIndex> cells);
  void set(CellIndex c, double p);

  std::optional<double> p_covered(CellIndex c) const;
  double p_or(CellIndex c, double prior) const;
  bool is_covered(CellIndex c) const;

  std::size_t covered_count() const { return covered_count_; }
  std::size_t size() const { return p_.size(); }

  // Covered cells (p = 1) sorted by (y, x).
  std::vector<CellIndex> covered_cells() const;

 private:
  std::unordered_map<CellIndex, double, CellHash> p_;
  std::size_t covered_count_ = 0;
};

struct TimedPose {
  RobotPose pose;
  double time = 0.0;
};

// Past trajectory with odometry edges between consecutive poses.
class PoseGraph {
 public:
  void append(const RobotPose& pose, double time);

  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  const TimedPose& at(std::size_t i) const { return poses_[i]; }
  const TimedPose& latest() const { return poses_.back(); }

  std::size_t edge_count() const { return poses_.empty() ? 0 : poses_.size() - 1; }
  double path_length_m() const;

 private:
  std::vector<TimedPose> poses_;
};

// Debug/oracle snapshot: one record per known cell, "x y kind value" with
// kind in {risk, coverage}, sorted by (kind, y, x).
void dump_snapshot(std::ostream& out, const RiskMap& risk, const CoverageBelief& coverage);

}  // namespace plgrim::belief
