#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "plgrim/geometry.hpp"

namespace plgrim::world {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Risk at or above this value marks a cell lethal for the start-pose check.
inline constexpr double kLethalRisk = 0.95;

struct SensorSpec {
  double risk_radius_m = 2.5;      // range-sensor horizon feeding the risk belief
  double coverage_radius_m = 1.0;  // coverage-sensor footprint
  bool line_of_sight = true;       // walls occlude both sensors

  void validate() const;
};

struct MotionNoise {
  double slip_probability = 0.0;  // chance a primitive move fails in place
  bool enabled = false;
};

struct RiskReading {
  CellIndex cell;
  double risk = 0.0;
};
using RiskPatch = std::vector<RiskReading>;

struct StepResult {
  RobotPose pose;
  bool collided = false;
  bool slipped = false;
};

// Hidden simulation truth: traversability, risk field and the monotone
// coverage ledger. Immutable after construction except the ledger.
class GroundTruthWorld {
 public:
  // Environment file: header "width height resolution_m", then one row of
  // cells per line; '#'=obstacle, '.'=free, '1'..'9'=free with risk d/9,
  // 'S'=start (exactly one). First row is y=0.
  static GroundTruthWorld load(std::istream& in);
  static GroundTruthWorld load_file(const std::string& path);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const RobotPose& start_pose() const { return start_; }

  bool in_bounds(CellIndex c) const {
    return c.x >= 0 && c.x < width_ && c.y >= 0 && c.y < height_;
  }
  bool traversable(CellIndex c) const { return in_bounds(c) && traversable_[index(c)]; }
  double risk(CellIndex c) const { return risk_[index(c)]; }
  bool covered(CellIndex c) const { return covered_[index(c)]; }
  std::size_t covered_count() const { return covered_count_; }
  std::size_t traversable_count() const;

  // 8-connected flood fill from the start cell over traversable cells,
  // sorted by (y, x).
  std::vector<CellIndex> reachable_cells() const;

  // Applies one primitive move. Moves into non-traversable or out-of-bounds
  // cells leave the pose unchanged and flag a collision; with noise enabled
  // the move fails in place with slip_probability. rng is consumed only when
  // noise is enabled.
  StepResult step_robot(const RobotPose& pose, PrimitiveMove move, const MotionNoise& noise,
                        std::mt19937_64& rng) const;

  // True risk of every in-range (and, with line of sight, visible) cell.
  RiskPatch sense_risk(const RobotPose& pose, const SensorSpec& spec) const;

  // Newly covered traversable cells within the coverage footprint; marks
  // them in the ledger. A repeated call at the same pose returns nothing.
  std::vector<CellIndex> sense_coverage(const RobotPose& pose, const SensorSpec& spec);

  // Supercover line-of-sight between cell centers: false when any strictly
  // intermediate cell is non-traversable.
  bool visible(CellIndex from, CellIndex to) const;

 private:
  std::size_t index(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * width_ + c.x;
  }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 1.0;
  std::vector<std::uint8_t> traversable_;
  std::vector<double> risk_;
  std::vector<std::uint8_t> covered_;
  std::size_t covered_count_ = 0;
  RobotPose start_;
};

// All cells a segment between two cell centers passes through, endpoints
// included. Corner crossings include both touched cells.
std::vector<CellIndex> supercover_line(CellIndex a, CellIndex b);

// Shared line-of-sight rule: adjacent cells are never occluded (the sensor
// touches them); beyond that, every strictly intermediate supercover cell
// must satisfy `open`.
template <typename OpenFn>
bool los_clear(CellIndex from, CellIndex to, OpenFn&& open) {
  if (chebyshev(from, to) <= 1) return true;
  for (const CellIndex& mid : supercover_line(from, to)) {
    if (mid == from || mid == to) continue;
    if (!open(mid)) return false;
  }
  return true;
}

// Cells within Chebyshev distance radius_m of center (sensor footprints are
// squares in cell space), unfiltered by bounds.
std::vector<CellIndex> footprint_box(CellIndex center, double radius_m, double resolution);

}  // namespace plgrim::world
