#include "plgrim/world.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

namespace plgrim::world {

void SensorSpec::validate() const {
  if (!(risk_radius_m > 0.0) || !(coverage_radius_m > 0.0)) {
    throw std::invalid_argument("sensor radii must be positive");
  }
  if (coverage_radius_m > risk_radius_m) {
    throw std::invalid_argument("coverage_radius_m must not exceed risk_radius_m");
  }
}

GroundTruthWorld GroundTruthWorld::load(std::istream& in) {
  GroundTruthWorld w;
  std::string header;
  if (!std::getline(in, header)) throw ParseError("empty environment file");
  {
    std::istringstream hs(header);
    if (!(hs >> w.width_ >> w.height_ >> w.resolution_) || w.width_ <= 0 || w.height_ <= 0 ||
        !(w.resolution_ > 0.0)) {
      throw ParseError("malformed header line (want: width height resolution_m)");
    }
    std::string rest;
    if (hs >> rest) throw ParseError("trailing tokens in header line");
  }

  w.traversable_.assign(static_cast<std::size_t>(w.width_) * w.height_, 0);
  w.risk_.assign(w.traversable_.size(), 1.0);
  w.covered_.assign(w.traversable_.size(), 0);

  int starts = 0;
  CellIndex start_cell;
  for (int y = 0; y < w.height_; ++y) {
    std::string row;
    if (!std::getline(in, row)) {
      throw ParseError("grid has fewer rows than the declared height");
    }
    while (!row.empty() && (row.back() == '\r' || row.back() == ' ')) row.pop_back();
    if (static_cast<int>(row.size()) != w.width_) {
      throw ParseError("non-rectangular grid: row " + std::to_string(y) + " has " +
                       std::to_string(row.size()) + " cells, want " + std::to_string(w.width_));
    }
    for (int x = 0; x < w.width_; ++x) {
      const char c = row[x];
      const std::size_t i = w.index({x, y});
      if (c == '#') {
        continue;  // defaults: non-traversable, risk 1
      }
      w.traversable_[i] = 1;
      if (c == '.') {
        w.risk_[i] = 0.0;
      } else if (c == 'S') {
        w.risk_[i] = 0.0;
        start_cell = {x, y};
        ++starts;
      } else if (c >= '1' && c <= '9') {
        w.risk_[i] = (c - '0') / 9.0;
      } else {
        throw ParseError(std::string("invalid cell character '") + c + "' at (" +
                         std::to_string(x) + "," + std::to_string(y) + ")");
      }
    }
  }
  {
    std::string extra;
    while (std::getline(in, extra)) {
      if (!extra.empty() && extra.find_first_not_of(" \r\t") != std::string::npos) {
        throw ParseError("grid has more rows than the declared height");
      }
    }
  }
  if (starts != 1) {
    throw ParseError(starts == 0 ? "no start cell ('S') in grid"
                                 : "multiple start cells in grid");
  }
  if (!w.traversable_[w.index(start_cell)] || w.risk_[w.index(start_cell)] >= kLethalRisk) {
    throw ParseError("start cell is not traversable with sub-lethal risk");
  }
  w.start_ = pose_at_cell(start_cell, w.resolution_, Heading::East);
  return w;
}

GroundTruthWorld GroundTruthWorld::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open environment file: " + path);
  return load(in);
}

std::size_t GroundTruthWorld::traversable_count() const {
  return static_cast<std::size_t>(std::count(traversable_.begin(), traversable_.end(), 1));
}

std::vector<CellIndex> GroundTruthWorld::reachable_cells() const {
  std::vector<std::uint8_t> seen(traversable_.size(), 0);
  std::deque<CellIndex> queue;
  const CellIndex start = cell_of(start_, resolution_);
  queue.push_back(start);
  seen[index(start)] = 1;
  std::vector<CellIndex> out;
  while (!queue.empty()) {
    const CellIndex c = queue.front();
    queue.pop_front();
    out.push_back(c);
    for (int h = 0; h < kNumHeadings; ++h) {
      const CellIndex n{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
      if (traversable(n) && !seen[index(n)]) {
        seen[index(n)] = 1;
        queue.push_back(n);
      }
    }
  }
  std::sort(out.begin(), out.end(), [](CellIndex a, CellIndex b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  return out;
}

StepResult GroundTruthWorld::step_robot(const RobotPose& pose, PrimitiveMove move,
                                        const MotionNoise& noise, std::mt19937_64& rng) const {
  StepResult res{pose, false, false};
  if (!is_motion(move)) return res;
  if (noise.enabled) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < noise.slip_probability) {
      res.slipped = true;
      return res;
    }
  }
  const CellIndex from = cell_of(pose, resolution_);
  const CellIndex off = offset_of(move);
  const CellIndex to{from.x + off.x, from.y + off.y};
  if (!traversable(to)) {
    res.collided = true;
    return res;
  }
  res.pose = pose_at_cell(to, resolution_, heading_of(move));
  return res;
}

RiskPatch GroundTruthWorld::sense_risk(const RobotPose& pose, const SensorSpec& spec) const {
  const CellIndex center = cell_of(pose, resolution_);
  RiskPatch patch;
  for (CellIndex c : footprint_box(center, spec.risk_radius_m, resolution_)) {
    if (!in_bounds(c)) continue;
    if (spec.line_of_sight && !visible(center, c)) {
      // Rays that end on a wall reveal it: a blocked cell is still sensed
      // when any open cell touching it is visible.
      if (traversable(c)) continue;
      bool face_seen = false;
      for (int h = 0; h < kNumHeadings && !face_seen; ++h) {
        const CellIndex n{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
        face_seen = traversable(n) && visible(center, n);
      }
      if (!face_seen) continue;
    }
    patch.push_back({c, risk_[index(c)]});
  }
  return patch;
}

std::vector<CellIndex> GroundTruthWorld::sense_coverage(const RobotPose& pose,
                                                        const SensorSpec& spec) {
  const CellIndex center = cell_of(pose, resolution_);
  std::vector<CellIndex> fresh;
  for (CellIndex c : footprint_box(center, spec.coverage_radius_m, resolution_)) {
    if (!traversable(c) || covered_[index(c)]) continue;
    if (spec.line_of_sight && !visible(center, c)) continue;
    covered_[index(c)] = 1;
    ++covered_count_;
    fresh.push_back(c);
  }
  return fresh;
}

bool GroundTruthWorld::visible(CellIndex from, CellIndex to) const {
  return los_clear(from, to, [this](CellIndex c) { return traversable(c); });
}

std::vector<CellIndex> supercover_line(CellIndex a, CellIndex b) {
  std::vector<CellIndex> cells;
  int x = a.x, y = a.y;
  int dx = b.x - a.x, dy = b.y - a.y;
  const int xstep = dx >= 0 ? 1 : -1;
  const int ystep = dy >= 0 ? 1 : -1;
  dx = std::abs(dx);
  dy = std::abs(dy);
  cells.push_back(a);
  const int ddx = 2 * dx, ddy = 2 * dy;
  if (ddx >= ddy) {
    int error = dx, errorprev = dx;
    for (int i = 0; i < dx; ++i) {
      x += xstep;
      error += ddy;
      if (error > ddx) {
        y += ystep;
        error -= ddx;
        if (error + errorprev < ddx) {
          cells.push_back({x, y - ystep});
        } else if (error + errorprev > ddx) {
          cells.push_back({x - xstep, y});
        } else {  // exact corner crossing, both cells are touched
          cells.push_back({x, y - ystep});
          cells.push_back({x - xstep, y});
        }
      }
      cells.push_back({x, y});
      errorprev = error;
    }
  } else {
    int error = dy, errorprev = dy;
    for (int i = 0; i < dy; ++i) {
      y += ystep;
      error += ddx;
      if (error > ddy) {
        x += xstep;
        error -= ddy;
        if (error + errorprev < ddy) {
          cells.push_back({x - xstep, y});
        } else if (error + errorprev > ddy) {
          cells.push_back({x, y - ystep});
        } else {
          cells.push_back({x - xstep, y});
          cells.push_back({x, y - ystep});
        }
      }
      cells.push_back({x, y});
      errorprev = error;
    }
  }
  return cells;
}

std::vector<CellIndex> footprint_box(CellIndex center, double radius_m, double resolution) {
  const int r = static_cast<int>(std::floor(radius_m / resolution + 1e-9));
  std::vector<CellIndex> cells;
  cells.reserve(static_cast<std::size_t>(2 * r + 1) * (2 * r + 1));
  for (int y = center.y - r; y <= center.y + r; ++y) {
    for (int x = center.x - r; x <= center.x + r; ++x) {
      cells.push_back({x, y});
    }
  }
  return cells;
}

}  // namespace plgrim::world
