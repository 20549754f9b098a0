#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "plgrim/belief.hpp"
#include "plgrim/geometry.hpp"

namespace plgrim::irm {

struct IrmParams {
  double breadcrumb_spacing_m = 2.0;    // minimum distance between breadcrumbs
  double edge_max_length_m = 8.0;       // edge admission: d_ij below this
  double edge_max_risk = 0.7;           // edge admission: rho_ij below this
  double lethal_threshold = 0.95;       // node admission: p_risk below this
  double neighborhood_radius_m = 8.0;   // edge recomputation scope around the robot
  double frontier_match_radius_m = 2.0; // drifted-frontier identity radius
  double coverage_prior = 0.5;          // p(covered) for known-traversable, unqueried cells

  void validate() const;
};

// ---------------------------------------------------------------------------
// Local IRM: dense rolling grid graph at cell resolution.

struct LocalNode {
  CellIndex cell;
  double p_risk = 0.0;
  double p_covered = 0.5;
};

struct LocalEdge {
  int a = 0;
  int b = 0;
  double d_m = 0.0;
  double rho = 0.0;
};

class LocalIRM {
 public:
  LocalIRM(RobotPose center, double resolution) : center_(center), resolution_(resolution) {}

  int add_node(const LocalNode& n);
  void add_edge(int a, int b, double d_m, double rho);

  const std::vector<LocalNode>& nodes() const { return nodes_; }
  const std::vector<LocalEdge>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }

  std::optional<int> node_id(CellIndex c) const;
  bool has_node(CellIndex c) const { return node_id(c).has_value(); }
  const LocalNode& node(int id) const { return nodes_[id]; }
  const LocalEdge& edge(int id) const { return edges_[id]; }

  const RobotPose& center() const { return center_; }
  double resolution() const { return resolution_; }

 private:
  RobotPose center_;
  double resolution_;
  std::vector<LocalNode> nodes_;
  std::vector<LocalEdge> edges_;
  std::vector<std::vector<int>> adjacency_;  // node id -> incident edge ids
  std::unordered_map<CellIndex, int, CellHash> by_cell_;
};

// One node per known sub-lethal window cell (the robot's own cell is always
// included), 8-connected edges with d in {res, sqrt2*res} and
// rho = max(p_risk of the endpoints).
LocalIRM build_local_irm(const belief::RiskMap& risk, const belief::CoverageBelief& coverage,
                         const RobotPose& pose, const IrmParams& params);

// ---------------------------------------------------------------------------
// Frontier detection.

struct GridBounds {
  int width = 0;
  int height = 0;
  bool contains(CellIndex c) const { return c.x >= 0 && c.x < width && c.y >= 0 && c.y < height; }
};

struct FrontierCandidate {
  CellIndex cell;          // cluster centroid snapped to a member boundary cell
  int uncovered_area = 0;  // contiguous uncovered cells bordered by the cluster
  int boundary_size = 0;   // cluster member count
};

// Scans the coverage belief for boundary cells (covered cells with at least
// one not-known-lethal neighbor of p < 1 inside bounds), clusters them into
// 8-connected components and returns one candidate per cluster, sorted by
// centroid (y, x). Empty result is the exploration-complete signal.
std::vector<FrontierCandidate> detect_frontiers(const belief::CoverageBelief& coverage,
                                                const belief::RiskMap& risk,
                                                const IrmParams& params, const GridBounds& bounds);

// ---------------------------------------------------------------------------
// Global IRM: sparse breadcrumb/frontier graph.

enum class GlobalNodeKind { Breadcrumb, Frontier };

struct GlobalNode {
  int id = 0;
  GlobalNodeKind kind = GlobalNodeKind::Breadcrumb;
  CellIndex cell;
  double x_m = 0.0;
  double y_m = 0.0;
  double p_covered = 1.0;
  int uncovered_area = 0;  // frontier nodes only
};

struct GlobalEdge {
  int id = 0;
  int a = 0;
  int b = 0;
  double d_m = 0.0;
  double rho = 0.0;
};

class GlobalIRM {
 public:
  int add_breadcrumb(CellIndex cell, double resolution);
  int add_frontier(CellIndex cell, double resolution, int uncovered_area);
  void remove_node(int id);
  void move_frontier(int id, CellIndex cell, double resolution, int uncovered_area);

  int add_or_update_edge(int a, int b, double d_m, double rho);
  bool remove_edge_between(int a, int b);
  std::optional<int> edge_between(int a, int b) const;

  bool alive(int id) const { return id >= 0 && id < static_cast<int>(nodes_.size()) && alive_[id]; }
  const GlobalNode& node(int id) const { return nodes_[id]; }
  const GlobalEdge& edge(int id) const { return edges_[id]; }
  bool edge_alive(int id) const {
    return id >= 0 && id < static_cast<int>(edges_.size()) && edge_alive_[id];
  }

  // Ids of live nodes/edges in ascending order.
  std::vector<int> node_ids() const;
  std::vector<int> edge_ids() const;
  // Incident live edge ids in ascending order.
  std::vector<int> incident_edges(int id) const;

  std::size_t node_count() const;
  std::size_t breadcrumb_count() const;
  std::size_t frontier_count() const;
  std::size_t frontier_insertions() const { return frontier_insertions_; }

  int nearest_node(const RobotPose& pose) const;  // -1 when empty

  // Invariant check; returns human-readable violations (empty = valid).
  std::vector<std::string> validate(const IrmParams& params) const;

 private:
  std::vector<GlobalNode> nodes_;
  std::vector<bool> alive_;
  std::vector<GlobalEdge> edges_;
  std::vector<bool> edge_alive_;
  std::vector<std::vector<int>> adjacency_;
  std::size_t frontier_insertions_ = 0;
};

// A* metrics between two cells over believed known sub-lethal space:
// d = min-cost grid path length, rho = max known risk along it. reachable is
// false when no path exists within max_length (edge rejection, not a fault).
struct EdgeMetrics {
  bool reachable = false;
  double d_m = 0.0;
  double rho = 0.0;
};
EdgeMetrics edge_metrics(CellIndex a, CellIndex b, const belief::RiskMap& risk,
                         const IrmParams& params);

// One construction round: breadcrumb sampling from the latest pose, frontier
// sync against the freshly detected candidates, and edge recomputation among
// nodes near the robot (new and moved nodes get edges regardless of range).
// Newly detected frontiers that cannot be connected are left out; previously
// connected frontiers survive until their boundary vanishes.
void update_global_irm(GlobalIRM& irm, const belief::PoseGraph& path,
                       const std::vector<FrontierCandidate>& frontiers,
                       const belief::RiskMap& risk, const IrmParams& params);

// Text dumps: "node id kind x y p_risk p_covered area" / "edge a b d rho".
void dump_graph(std::ostream& out, const LocalIRM& irm);
void dump_graph(std::ostream& out, const GlobalIRM& irm);

}  // namespace plgrim::irm
