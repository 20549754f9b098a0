#include "plgrim/irm.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <set>
#include <stdexcept>

#include "plgrim/grid_search.hpp"

namespace plgrim::irm {

void IrmParams::validate() const {
  if (!(breadcrumb_spacing_m > 0.0)) throw std::invalid_argument("breadcrumb spacing must be > 0");
  if (!(edge_max_length_m > 0.0)) throw std::invalid_argument("edge max length must be > 0");
  if (!(edge_max_risk > 0.0 && edge_max_risk <= 1.0)) {
    throw std::invalid_argument("edge max risk must lie in (0,1]");
  }
  if (!(lethal_threshold > 0.0 && lethal_threshold <= 1.0)) {
    throw std::invalid_argument("lethal threshold must lie in (0,1]");
  }
  if (!(neighborhood_radius_m > 0.0)) throw std::invalid_argument("neighborhood radius must be > 0");
  if (!(coverage_prior >= 0.0 && coverage_prior <= 1.0)) {
    throw std::invalid_argument("coverage prior must lie in [0,1]");
  }
}

// ---------------------------------------------------------------------------
// Local IRM

int LocalIRM::add_node(const LocalNode& n) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back(n);
  adjacency_.emplace_back();
  by_cell_[n.cell] = id;
  return id;
}

void LocalIRM::add_edge(int a, int b, double d_m, double rho) {
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({a, b, d_m, rho});
  adjacency_[a].push_back(id);
  adjacency_[b].push_back(id);
}

std::optional<int> LocalIRM::node_id(CellIndex c) const {
  const auto it = by_cell_.find(c);
  if (it == by_cell_.end()) return std::nullopt;
  return it->second;
}

LocalIRM build_local_irm(const belief::RiskMap& risk, const belief::CoverageBelief& coverage,
                         const RobotPose& pose, const IrmParams& params) {
  LocalIRM irm(pose, risk.resolution());
  const CellIndex pose_cell = cell_of(pose, risk.resolution());

  // Uniform sampling over the window: one node per known sub-lethal cell.
  for (const CellIndex& c : risk.known_window_cells()) {
    const double r = *risk.risk_in_window(c);
    if (r >= params.lethal_threshold) continue;
    irm.add_node({c, r, coverage.p_or(c, params.coverage_prior)});
  }
  if (!irm.has_node(pose_cell)) {
    // The robot is standing there; an empty or stale window still yields a
    // single-node graph.
    irm.add_node({pose_cell, risk.known_risk(pose_cell).value_or(0.0),
                  coverage.p_or(pose_cell, params.coverage_prior)});
  }

  // 8-connected edges; scan half the directions so each pair appears once.
  const auto& nodes = irm.nodes();
  const int n = static_cast<int>(nodes.size());
  for (int id = 0; id < n; ++id) {
    const CellIndex c = nodes[id].cell;
    for (const Heading h : {Heading::East, Heading::SouthEast, Heading::South, Heading::SouthWest}) {
      const CellIndex off = offset_of(h);
      const auto other = irm.node_id({c.x + off.x, c.y + off.y});
      if (!other) continue;
      const double d = step_length_m(h, risk.resolution());
      const double rho = std::max(nodes[id].p_risk, nodes[*other].p_risk);
      irm.add_edge(id, *other, d, rho);
    }
  }
  return irm;
}

// ---------------------------------------------------------------------------
// Frontier detection

std::vector<FrontierCandidate> detect_frontiers(const belief::CoverageBelief& coverage,
                                                const belief::RiskMap& risk,
                                                const IrmParams& params, const GridBounds& bounds) {
  const std::vector<CellIndex> covered = coverage.covered_cells();

  const auto uncovered_openable = [&](CellIndex c) {
    return bounds.contains(c) && !coverage.is_covered(c) &&
           !risk.known_lethal(c, params.lethal_threshold);
  };

  std::vector<CellIndex> boundary;
  for (const CellIndex& c : covered) {
    for (int h = 0; h < kNumHeadings; ++h) {
      const CellIndex nb{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
      if (uncovered_openable(nb)) {
        boundary.push_back(c);
        break;
      }
    }
  }
  if (boundary.empty()) return {};

  // 8-connected clustering of boundary cells (covered order is already
  // canonical, so cluster ids are deterministic).
  std::unordered_map<CellIndex, int, CellHash> cluster_of;
  std::vector<std::vector<CellIndex>> clusters;
  std::unordered_map<CellIndex, bool, CellHash> is_boundary;
  for (const CellIndex& c : boundary) is_boundary[c] = true;
  for (const CellIndex& seed : boundary) {
    if (cluster_of.count(seed)) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    std::deque<CellIndex> queue{seed};
    cluster_of[seed] = id;
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      clusters[id].push_back(c);
      for (int h = 0; h < kNumHeadings; ++h) {
        const CellIndex nb{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
        if (is_boundary.count(nb) && !cluster_of.count(nb)) {
          cluster_of[nb] = id;
          queue.push_back(nb);
        }
      }
    }
  }

  // Uncovered-region sizes, shared between clusters bordering the same
  // region.
  std::unordered_map<CellIndex, int, CellHash> region_of;
  std::vector<int> region_size;
  const auto grow_region = [&](CellIndex seed) {
    const int id = static_cast<int>(region_size.size());
    region_size.push_back(0);
    std::deque<CellIndex> queue{seed};
    region_of[seed] = id;
    while (!queue.empty()) {
      const CellIndex c = queue.front();
      queue.pop_front();
      ++region_size[id];
      for (int h = 0; h < kNumHeadings; ++h) {
        const CellIndex nb{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
        if (uncovered_openable(nb) && !region_of.count(nb)) {
          region_of[nb] = id;
          queue.push_back(nb);
        }
      }
    }
    return id;
  };

  std::vector<FrontierCandidate> out;
  for (const auto& members : clusters) {
    std::set<int> regions;
    for (const CellIndex& c : members) {
      for (int h = 0; h < kNumHeadings; ++h) {
        const CellIndex nb{c.x + kHeadingDx[h], c.y + kHeadingDy[h]};
        if (!uncovered_openable(nb)) continue;
        const auto it = region_of.find(nb);
        regions.insert(it == region_of.end() ? grow_region(nb) : it->second);
      }
    }
    int area = 0;
    for (int r : regions) area += region_size[r];

    double mx = 0.0, my = 0.0;
    for (const CellIndex& c : members) {
      mx += c.x;
      my += c.y;
    }
    mx /= members.size();
    my /= members.size();
    CellIndex best = members.front();
    double best_d2 = std::numeric_limits<double>::max();
    for (const CellIndex& c : members) {
      const double d2 = (c.x - mx) * (c.x - mx) + (c.y - my) * (c.y - my);
      if (d2 < best_d2 - 1e-12 ||
          (std::abs(d2 - best_d2) <= 1e-12 && (c.y < best.y || (c.y == best.y && c.x < best.x)))) {
        best_d2 = d2;
        best = c;
      }
    }
    out.push_back({best, area, static_cast<int>(members.size())});
  }
  std::sort(out.begin(), out.end(), [](const FrontierCandidate& a, const FrontierCandidate& b) {
    return a.cell.y != b.cell.y ? a.cell.y < b.cell.y : a.cell.x < b.cell.x;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Global IRM

int GlobalIRM::add_breadcrumb(CellIndex cell, double resolution) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({id, GlobalNodeKind::Breadcrumb, cell, cell_center_x(cell.x, resolution),
                    cell_center_y(cell.y, resolution), 1.0, 0});
  alive_.push_back(true);
  adjacency_.emplace_back();
  return id;
}

int GlobalIRM::add_frontier(CellIndex cell, double resolution, int uncovered_area) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({id, GlobalNodeKind::Frontier, cell, cell_center_x(cell.x, resolution),
                    cell_center_y(cell.y, resolution), 1.0, uncovered_area});
  alive_.push_back(true);
  adjacency_.emplace_back();
  ++frontier_insertions_;
  return id;
}

void GlobalIRM::remove_node(int id) {
  if (!alive(id)) return;
  for (int e : adjacency_[id]) edge_alive_[e] = false;
  adjacency_[id].clear();
  alive_[id] = false;
  // drop dangling adjacency references lazily via edge_alive_
}

void GlobalIRM::move_frontier(int id, CellIndex cell, double resolution, int uncovered_area) {
  GlobalNode& n = nodes_[id];
  n.cell = cell;
  n.x_m = cell_center_x(cell.x, resolution);
  n.y_m = cell_center_y(cell.y, resolution);
  n.uncovered_area = uncovered_area;
}

std::optional<int> GlobalIRM::edge_between(int a, int b) const {
  for (int e : adjacency_[a]) {
    if (!edge_alive_[e]) continue;
    const GlobalEdge& ed = edges_[e];
    if ((ed.a == a && ed.b == b) || (ed.a == b && ed.b == a)) return e;
  }
  return std::nullopt;
}

int GlobalIRM::add_or_update_edge(int a, int b, double d_m, double rho) {
  if (const auto existing = edge_between(a, b)) {
    edges_[*existing].d_m = d_m;
    edges_[*existing].rho = rho;
    return *existing;
  }
  const int id = static_cast<int>(edges_.size());
  edges_.push_back({id, a, b, d_m, rho});
  edge_alive_.push_back(true);
  adjacency_[a].push_back(id);
  adjacency_[b].push_back(id);
  return id;
}

bool GlobalIRM::remove_edge_between(int a, int b) {
  if (const auto existing = edge_between(a, b)) {
    edge_alive_[*existing] = false;
    return true;
  }
  return false;
}

std::vector<int> GlobalIRM::node_ids() const {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (alive_[i]) ids.push_back(i);
  }
  return ids;
}

std::vector<int> GlobalIRM::edge_ids() const {
  std::vector<int> ids;
  for (int i = 0; i < static_cast<int>(edges_.size()); ++i) {
    if (edge_alive_[i]) ids.push_back(i);
  }
  return ids;
}

std::vector<int> GlobalIRM::incident_edges(int id) const {
  std::vector<int> out;
  for (int e : adjacency_[id]) {
    if (edge_alive_[e]) out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t GlobalIRM::node_count() const {
  return static_cast<std::size_t>(std::count(alive_.begin(), alive_.end(), true));
}

std::size_t GlobalIRM::breadcrumb_count() const {
  std::size_t n = 0;
  for (int id : node_ids()) {
    if (nodes_[id].kind == GlobalNodeKind::Breadcrumb) ++n;
  }
  return n;
}

std::size_t GlobalIRM::frontier_count() const { return node_count() - breadcrumb_count(); }

int GlobalIRM::nearest_node(const RobotPose& pose) const {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::max();
  for (int id : node_ids()) {
    const double dx = nodes_[id].x_m - pose.x_m;
    const double dy = nodes_[id].y_m - pose.y_m;
    const double d2 = dx * dx + dy * dy;
    if (d2 < best_d2 - 1e-12) {
      best_d2 = d2;
      best = id;
    }
  }
  return best;
}

std::vector<std::string> GlobalIRM::validate(const IrmParams& params) const {
  std::vector<std::string> bad;
  const std::vector<int> ids = node_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const GlobalNode& a = nodes_[ids[i]];
      const GlobalNode& b = nodes_[ids[j]];
      if (a.kind == GlobalNodeKind::Breadcrumb && b.kind == GlobalNodeKind::Breadcrumb) {
        const double dx = a.x_m - b.x_m, dy = a.y_m - b.y_m;
        if (std::sqrt(dx * dx + dy * dy) < params.breadcrumb_spacing_m - 1e-9) {
          bad.push_back("breadcrumbs " + std::to_string(a.id) + "," + std::to_string(b.id) +
                        " closer than spacing");
        }
      }
    }
  }
  for (int e : edge_ids()) {
    const GlobalEdge& ed = edges_[e];
    if (!alive(ed.a) || !alive(ed.b)) bad.push_back("edge " + std::to_string(e) + " dangles");
    if (!(ed.d_m < params.edge_max_length_m)) {
      bad.push_back("edge " + std::to_string(e) + " too long");
    }
    if (!(ed.rho < params.edge_max_risk)) bad.push_back("edge " + std::to_string(e) + " too risky");
  }
  for (int id : ids) {
    if (nodes_[id].kind == GlobalNodeKind::Frontier && incident_edges(id).empty()) {
      bad.push_back("isolated frontier " + std::to_string(id));
    }
  }
  return bad;
}

EdgeMetrics edge_metrics(CellIndex a, CellIndex b, const belief::RiskMap& risk,
                         const IrmParams& params) {
  const auto passable = [&](CellIndex c) {
    const auto r = risk.known_risk(c);
    return r.has_value() && *r < params.lethal_threshold;
  };
  const auto cell_risk = [&](CellIndex c) { return risk.known_risk(c).value_or(0.0); };
  const grid_search::GridPath path =
      grid_search::astar(a, b, passable, cell_risk, risk.resolution(), params.edge_max_length_m);
  if (!path.found) return {};
  return {true, path.length_m, path.max_risk};
}

void update_global_irm(GlobalIRM& irm, const belief::PoseGraph& path,
                       const std::vector<FrontierCandidate>& frontiers,
                       const belief::RiskMap& risk, const IrmParams& params) {
  const double res = risk.resolution();
  const RobotPose pose = path.empty() ? RobotPose{} : path.latest().pose;
  const CellIndex pose_cell = cell_of(pose, res);

  // Breadcrumb sampling from the latest pose.
  if (!path.empty()) {
    bool spaced = true;
    for (int id : irm.node_ids()) {
      const GlobalNode& n = irm.node(id);
      if (n.kind != GlobalNodeKind::Breadcrumb) continue;
      const double dx = n.x_m - pose.x_m, dy = n.y_m - pose.y_m;
      if (std::sqrt(dx * dx + dy * dy) < params.breadcrumb_spacing_m) {
        spaced = false;
        break;
      }
    }
    if (spaced) irm.add_breadcrumb(pose_cell, res);
  }

  // Frontier sync: match detections to existing frontier nodes (nearest
  // first), move matched nodes, insert the rest, prune unmatched nodes.
  std::vector<int> existing;
  for (int id : irm.node_ids()) {
    if (irm.node(id).kind == GlobalNodeKind::Frontier) existing.push_back(id);
  }
  std::vector<bool> candidate_taken(frontiers.size(), false);
  std::vector<bool> node_matched(existing.size(), false);

  struct Match {
    double d;
    std::size_t node_idx;
    std::size_t cand_idx;
  };
  std::vector<Match> matches;
  for (std::size_t i = 0; i < existing.size(); ++i) {
    const GlobalNode& n = irm.node(existing[i]);
    for (std::size_t j = 0; j < frontiers.size(); ++j) {
      const double d = euclidean_m(n.cell, frontiers[j].cell, res);
      if (d <= params.frontier_match_radius_m) matches.push_back({d, i, j});
    }
  }
  std::sort(matches.begin(), matches.end(), [](const Match& a, const Match& b) {
    if (a.d != b.d) return a.d < b.d;
    if (a.node_idx != b.node_idx) return a.node_idx < b.node_idx;
    return a.cand_idx < b.cand_idx;
  });
  std::vector<int> moved_or_new;
  for (const Match& m : matches) {
    if (node_matched[m.node_idx] || candidate_taken[m.cand_idx]) continue;
    node_matched[m.node_idx] = true;
    candidate_taken[m.cand_idx] = true;
    const int id = existing[m.node_idx];
    const FrontierCandidate& cand = frontiers[m.cand_idx];
    const bool moved = irm.node(id).cell != cand.cell;
    irm.move_frontier(id, cand.cell, res, cand.uncovered_area);
    if (moved) moved_or_new.push_back(id);
  }
  for (std::size_t i = 0; i < existing.size(); ++i) {
    if (!node_matched[i]) irm.remove_node(existing[i]);  // boundary vanished
  }
  for (std::size_t j = 0; j < frontiers.size(); ++j) {
    if (!candidate_taken[j]) {
      moved_or_new.push_back(irm.add_frontier(frontiers[j].cell, res, frontiers[j].uncovered_area));
    }
  }

  // Edge recomputation among nodes near the robot plus any node that moved
  // or was just created.
  std::set<int> recompute;
  for (int id : irm.node_ids()) {
    const GlobalNode& n = irm.node(id);
    const double dx = n.x_m - pose.x_m, dy = n.y_m - pose.y_m;
    if (std::sqrt(dx * dx + dy * dy) <= params.neighborhood_radius_m) recompute.insert(id);
  }
  for (int id : moved_or_new) {
    if (irm.alive(id)) recompute.insert(id);
  }
  for (int i : recompute) {
    const GlobalNode& a = irm.node(i);
    for (int j : irm.node_ids()) {
      if (j == i) continue;
      const GlobalNode& b = irm.node(j);
      const double dx = a.x_m - b.x_m, dy = a.y_m - b.y_m;
      if (std::sqrt(dx * dx + dy * dy) > params.neighborhood_radius_m) continue;
      const EdgeMetrics m = edge_metrics(a.cell, b.cell, risk, params);
      if (m.reachable && m.d_m < params.edge_max_length_m && m.rho < params.edge_max_risk) {
        irm.add_or_update_edge(i, j, m.d_m, m.rho);
      } else {
        irm.remove_edge_between(i, j);
      }
    }
  }

  // A frontier is admitted only with at least one valid edge.
  for (int id : moved_or_new) {
    if (irm.alive(id) && irm.node(id).kind == GlobalNodeKind::Frontier &&
        irm.incident_edges(id).empty()) {
      irm.remove_node(id);
    }
  }
}

void dump_graph(std::ostream& out, const LocalIRM& irm) {
  const double res = irm.resolution();
  for (std::size_t i = 0; i < irm.nodes().size(); ++i) {
    const LocalNode& n = irm.nodes()[i];
    out << "node " << i << " local " << cell_center_x(n.cell.x, res) << ' '
        << cell_center_y(n.cell.y, res) << ' ' << n.p_risk << ' ' << n.p_covered << " 0\n";
  }
  for (const LocalEdge& e : irm.edges()) {
    out << "edge " << e.a << ' ' << e.b << ' ' << e.d_m << ' ' << e.rho << '\n';
  }
}

void dump_graph(std::ostream& out, const GlobalIRM& irm) {
  for (int id : irm.node_ids()) {
    const GlobalNode& n = irm.node(id);
    out << "node " << id << ' '
        << (n.kind == GlobalNodeKind::Breadcrumb ? "breadcrumb" : "frontier") << ' ' << n.x_m << ' '
        << n.y_m << " 0 " << n.p_covered << ' ' << n.uncovered_area << '\n';
  }
  for (int e : irm.edge_ids()) {
    const GlobalEdge& ed = irm.edge(e);
    out << "edge " << ed.a << ' ' << ed.b << ' ' << ed.d_m << ' ' << ed.rho << '\n';
  }
}

}  // namespace plgrim::irm
