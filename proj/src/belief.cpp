#include "plgrim/belief.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace plgrim::belief {

namespace {
void sort_cells(std::vector<CellIndex>& cells) {
  std::sort(cells.begin(), cells.end(),
            [](CellIndex a, CellIndex b) { return a.y != b.y ? a.y < b.y : a.x < b.x; });
}
}  // namespace

RiskMap::RiskMap(int window_cells, double resolution, const RobotPose& center)
    : window_cells_(window_cells), resolution_(resolution), center_(cell_of(center, resolution)) {
  if (window_cells_ < 1 || window_cells_ % 2 == 0) {
    throw std::invalid_argument("risk window must be a positive odd cell count");
  }
  if (!(resolution_ > 0.0)) throw std::invalid_argument("resolution must be positive");
}

void RiskMap::update(const world::RiskPatch& patch, const RobotPose& pose) {
  for (const auto& reading : patch) {
    memory_[reading.cell] = reading.risk;  // latest wins
  }
  center_ = cell_of(pose, resolution_);
}

bool RiskMap::in_window(CellIndex c) const {
  return chebyshev(c, center_) <= window_cells_ / 2;
}

std::optional<double> RiskMap::risk_in_window(CellIndex c) const {
  if (!in_window(c)) return std::nullopt;
  return known_risk(c);
}

std::optional<double> RiskMap::known_risk(CellIndex c) const {
  const auto it = memory_.find(c);
  if (it == memory_.end()) return std::nullopt;
  return it->second;
}

bool RiskMap::known_lethal(CellIndex c, double lethal_threshold) const {
  const auto it = memory_.find(c);
  return it != memory_.end() && it->second >= lethal_threshold;
}

std::vector<CellIndex> RiskMap::known_window_cells() const {
  std::vector<CellIndex> cells;
  for (const auto& [c, r] : memory_) {
    if (in_window(c)) cells.push_back(c);
  }
  sort_cells(cells);
  return cells;
}

std::vector<CellIndex> RiskMap::known_cells() const {
  std::vector<CellIndex> cells;
  cells.reserve(memory_.size());
  for (const auto& [c, r] : memory_) cells.push_back(c);
  sort_cells(cells);
  return cells;
}

void CoverageBelief::set(CellIndex c, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p_covered must lie in [0,1]");
  auto [it, inserted] = p_.try_emplace(c, p);
  if (!inserted) {
    if (it->second == 1.0) return;  // covered cells stay covered
    it->second = p;
  }
  if (p == 1.0) ++covered_count_;
}

void CoverageBelief::mark_covered(std::span<const CellIndex> cells) {
  for (const CellIndex& c : cells) {
    auto [it, inserted] = p_.try_emplace(c, 1.0);
    if (!inserted) {
      if (it->second == 1.0) continue;
      it->second = 1.0;
    }
    ++covered_count_;
  }
}

std::optional<double> CoverageBelief::p_covered(CellIndex c) const {
  const auto it = p_.find(c);
  if (it == p_.end()) return std::nullopt;
  return it->second;
}

double CoverageBelief::p_or(CellIndex c, double prior) const {
  const auto it = p_.find(c);
  return it == p_.end() ? prior : it->second;
}

bool CoverageBelief::is_covered(CellIndex c) const {
  const auto it = p_.find(c);
  return it != p_.end() && it->second == 1.0;
}

std::vector<CellIndex> CoverageBelief::covered_cells() const {
  std::vector<CellIndex> cells;
  cells.reserve(covered_count_);
  for (const auto& [c, p] : p_) {
    if (p == 1.0) cells.push_back(c);
  }
  sort_cells(cells);
  return cells;
}

void PoseGraph::append(const RobotPose& pose, double time) {
  if (!poses_.empty() && !(time > poses_.back().time)) {
    throw std::invalid_argument("pose graph timestamps must be strictly increasing");
  }
  poses_.push_back({pose, time});
}

double PoseGraph::path_length_m() const {
  double total = 0.0;
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    const double dx = poses_[i].pose.x_m - poses_[i - 1].pose.x_m;
    const double dy = poses_[i].pose.y_m - poses_[i - 1].pose.y_m;
    total += std::sqrt(dx * dx + dy * dy);
  }
  return total;
}

void dump_snapshot(std::ostream& out, const RiskMap& risk, const CoverageBelief& coverage) {
  for (const CellIndex& c : risk.known_cells()) {
    out << c.x << ' ' << c.y << " risk " << *risk.known_risk(c) << '\n';
  }
  std::vector<CellIndex> cov = coverage.covered_cells();
  for (const CellIndex& c : cov) {
    out << c.x << ' ' << c.y << " coverage 1\n";
  }
}

}  // namespace plgrim::belief
