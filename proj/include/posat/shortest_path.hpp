#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "posat/network.hpp"

namespace posat {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

struct ShortestPathTree {
  int origin = -1;              // node index
  std::vector<double> dist;     // kUnreachable when no path exists
  std::vector<int> pred_arc;    // -1 at the origin and at unreachable nodes
};

/// One-to-all shortest paths (label correcting with a deque). Among tied
/// shortest paths the tree keeps the min-hop one with the smallest arc ids.
/// Throws NegativeArcTime.
ShortestPathTree shortest_paths(const Network& net, const Eigen::VectorXd& times, int origin);

/// Arc ids from the tree origin to dest; empty when dest is the origin or unreachable.
std::vector<int> tree_path(const Network& net, const ShortestPathTree& tree, int dest);

struct AonResult {
  ClassFlow x;
  Eigen::VectorXd mu;  // per-OD shortest path cost
};

/// Loads each OD's demand on one shortest path. Throws DisconnectedOD.
AonResult all_or_nothing(const Instance& inst, const Eigen::VectorXd& times);

/// Per-class costs: OD w sees lambda(w, a) * times(a).
AonResult all_or_nothing(const Instance& inst, const Eigen::VectorXd& times, const Eigen::MatrixXd& lambda);

}  // namespace posat
