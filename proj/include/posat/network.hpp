#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "posat/cost.hpp"

namespace posat {

/// Arc flow v, one entry per arc.
using ArcFlow = Eigen::VectorXd;
/// Class flow x, rows are OD pairs and columns are arcs.
using ClassFlow = Eigen::MatrixXd;

struct Arc {
  int id;
  int tail;  // node id
  int head;  // node id
};

/// Directed graph with arbitrary integer node ids and dense arc ids 0..|A|-1.
class Network {
 public:
  Network() = default;
  Network(std::vector<int> nodes, std::vector<Arc> arcs);

  int num_nodes() const { return static_cast<int>(nodes_.size()); }
  int num_arcs() const { return static_cast<int>(arcs_.size()); }

  const std::vector<int>& nodes() const { return nodes_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const Arc& arc(int a) const { return arcs_[a]; }

  /// Position of a node id in nodes(); throws UnknownNode.
  int node_index(int node_id) const;
  bool has_node(int node_id) const;

  int tail_index(int a) const { return tail_index_[a]; }
  int head_index(int a) const { return head_index_[a]; }

  /// Outgoing / incoming arc ids of a node index, ascending.
  const std::vector<int>& out_arcs(int node) const { return out_[node]; }
  const std::vector<int>& in_arcs(int node) const { return in_[node]; }

  /// Smallest-id arc running head -> tail of arc a, if any.
  std::optional<int> reverse_arc(int a) const;

 private:
  std::vector<int> nodes_;
  std::vector<Arc> arcs_;
  std::vector<int> tail_index_;
  std::vector<int> head_index_;
  std::vector<std::vector<int>> out_;
  std::vector<std::vector<int>> in_;
  std::vector<std::pair<int, int>> sorted_ids_;  // (node id, index)
};

struct OdPair {
  int origin;  // node id
  int dest;    // node id
  double demand;
};

/// OD demand table; entry position is the OD index w.
struct DemandTable {
  std::vector<OdPair> entries;

  int size() const { return static_cast<int>(entries.size()); }
  double total() const;
};

/// Ring produced by the circular generator: m clockwise hops per OD, l counterclockwise.
struct CircularLayout {
  int m = 0;
  int l = 0;
};

struct Instance {
  std::string name;
  Network network;
  DemandTable demands;
  PolynomialCost cost;
  std::optional<CircularLayout> circular;

  int num_arcs() const { return network.num_arcs(); }
  int num_ods() const { return demands.size(); }

  /// Checks every invariant of the data model; throws Error on violation.
  void validate() const;
  int origin_index(int w) const { return network.node_index(demands.entries[w].origin); }
  int dest_index(int w) const { return network.node_index(demands.entries[w].dest); }
};

struct PathEntry {
  int od;
  std::vector<int> arcs;  // arc ids from origin to destination
  double flow;
};

struct PathFlow {
  std::vector<PathEntry> paths;
};

struct Decomposition {
  PathFlow flow;
  bool cyclic_residual = false;  // a circulation carrying more than tol was discarded
  double discarded_cycle_flow = 0.0;
};

/// Default conservation tolerance for OD w: 1e-9 * max(1, Q_w).
double conservation_tol(const Instance& inst, int w, double base = 1e-9);

ArcFlow aggregate_to_arcflow(const ClassFlow& x);

/// Incidence aggregation; throws PathNotConnected for broken arc sequences.
ClassFlow paths_to_classflow(const Instance& inst, const PathFlow& f);

/// Deterministic flow decomposition (min-hop, lexicographically smallest arc ids).
Decomposition decompose_to_paths(const Instance& inst, const ClassFlow& x, double tol = 1e-9);

/// Max over (w, node) of |outflow - inflow - q^w_i|.
double conservation_residual(const Instance& inst, const ClassFlow& x);

/// Checks the arc sequence is a head-to-tail walk from the OD origin to its destination.
bool is_connected_path(const Instance& inst, int w, const std::vector<int>& arcs);

/// Same network and costs, every demand multiplied by factor.
Instance scale_demands(const Instance& inst, double factor);
/// F_{1+kappa}: every demand multiplied by (1 + kappa); throws NegativeKappa.
Instance scale_demands_kappa(const Instance& inst, double kappa);

PathFlow scale_paths(const PathFlow& f, double factor);

}  // namespace posat
