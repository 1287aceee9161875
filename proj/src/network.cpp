#include "posat/network.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <string>

namespace posat {

Network::Network(std::vector<int> nodes, std::vector<Arc> arcs) : nodes_(std::move(nodes)), arcs_(std::move(arcs)) {
  sorted_ids_.reserve(nodes_.size());
  for (int i = 0; i < num_nodes(); ++i) sorted_ids_.emplace_back(nodes_[i], i);
  std::sort(sorted_ids_.begin(), sorted_ids_.end());
  for (std::size_t i = 1; i < sorted_ids_.size(); ++i) {
    if (sorted_ids_[i].first == sorted_ids_[i - 1].first) {
      throw Error(ErrorCode::InvalidNetwork, "duplicate node id " + std::to_string(sorted_ids_[i].first));
    }
  }
  tail_index_.resize(arcs_.size());
  head_index_.resize(arcs_.size());
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (int a = 0; a < num_arcs(); ++a) {
    const Arc& arc = arcs_[a];
    if (arc.id != a) {
      throw Error(ErrorCode::InvalidNetwork, "arc ids must be dense and ordered; found " + std::to_string(arc.id) +
                                                 " at position " + std::to_string(a));
    }
    if (arc.tail == arc.head) throw Error(ErrorCode::InvalidNetwork, "self-loop on arc " + std::to_string(a));
    if (!has_node(arc.tail) || !has_node(arc.head)) {
      throw Error(ErrorCode::UnknownNode, "arc " + std::to_string(a) + " references a missing node");
    }
    tail_index_[a] = node_index(arc.tail);
    head_index_[a] = node_index(arc.head);
    out_[tail_index_[a]].push_back(a);
    in_[head_index_[a]].push_back(a);
  }
}

bool Network::has_node(int node_id) const {
  auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), std::make_pair(node_id, -1));
  return it != sorted_ids_.end() && it->first == node_id;
}

int Network::node_index(int node_id) const {
  auto it = std::lower_bound(sorted_ids_.begin(), sorted_ids_.end(), std::make_pair(node_id, -1));
  if (it == sorted_ids_.end() || it->first != node_id) {
    throw Error(ErrorCode::UnknownNode, "node " + std::to_string(node_id));
  }
  return it->second;
}

std::optional<int> Network::reverse_arc(int a) const {
  for (int e : out_[head_index_[a]]) {
    if (head_index_[e] == tail_index_[a]) return e;
  }
  return std::nullopt;
}

double DemandTable::total() const {
  double q = 0.0;
  for (const auto& od : entries) q += od.demand;
  return q;
}

void Instance::validate() const {
  std::set<std::pair<int, int>> seen;
  for (int w = 0; w < num_ods(); ++w) {
    const OdPair& od = demands.entries[w];
    if (!network.has_node(od.origin) || !network.has_node(od.dest)) {
      throw Error(ErrorCode::UnknownNode, "OD " + std::to_string(w) + " references a missing node");
    }
    if (!(od.demand > 0.0) || !std::isfinite(od.demand)) {
      throw Error(ErrorCode::NonpositiveDemand, "OD " + std::to_string(w) + " demand must be finite and > 0");
    }
    if (od.origin == od.dest) throw Error(ErrorCode::InvalidDemand, "OD " + std::to_string(w) + " has origin == destination");
    if (!seen.emplace(od.origin, od.dest).second) {
      throw Error(ErrorCode::InvalidDemand, "duplicate OD pair " + std::to_string(od.origin) + "->" + std::to_string(od.dest));
    }
  }
  if (cost.num_arcs() != network.num_arcs()) {
    throw Error(ErrorCode::InvalidCost, "cost has " + std::to_string(cost.num_arcs()) + " arcs, network has " +
                                            std::to_string(network.num_arcs()));
  }
}

double conservation_tol(const Instance& inst, int w, double base) {
  return base * std::max(1.0, inst.demands.entries[w].demand);
}

ArcFlow aggregate_to_arcflow(const ClassFlow& x) {
  ArcFlow v = ArcFlow::Zero(x.cols());
  // row-by-row keeps the summation order fixed
  for (Eigen::Index w = 0; w < x.rows(); ++w) v += x.row(w).transpose();
  return v;
}

bool is_connected_path(const Instance& inst, int w, const std::vector<int>& arcs) {
  const Network& net = inst.network;
  int at = inst.origin_index(w);
  for (int a : arcs) {
    if (a < 0 || a >= net.num_arcs() || net.tail_index(a) != at) return false;
    at = net.head_index(a);
  }
  return at == inst.dest_index(w);
}

ClassFlow paths_to_classflow(const Instance& inst, const PathFlow& f) {
  ClassFlow x = ClassFlow::Zero(inst.num_ods(), inst.num_arcs());
  for (const auto& p : f.paths) {
    if (p.od < 0 || p.od >= inst.num_ods()) throw Error(ErrorCode::InvalidArgument, "path references unknown OD");
    if (!is_connected_path(inst, p.od, p.arcs)) {
      throw Error(ErrorCode::PathNotConnected, "path of OD " + std::to_string(p.od) + " is not a head-to-tail walk");
    }
    for (int a : p.arcs) x(p.od, a) += p.flow;
  }
  return x;
}

double conservation_residual(const Instance& inst, const ClassFlow& x) {
  const Network& net = inst.network;
  double worst = 0.0;
  for (int w = 0; w < inst.num_ods(); ++w) {
    const int o = inst.origin_index(w);
    const int d = inst.dest_index(w);
    const double q = inst.demands.entries[w].demand;
    for (int i = 0; i < net.num_nodes(); ++i) {
      double net_out = 0.0;
      for (int a : net.out_arcs(i)) net_out += x(w, a);
      for (int a : net.in_arcs(i)) net_out -= x(w, a);
      const double expected = i == o ? q : (i == d ? -q : 0.0);
      worst = std::max(worst, std::abs(net_out - expected));
    }
  }
  return worst;
}

namespace {

// Min-hop path over arcs with residual > tol; BFS in ascending arc id order
// yields the lexicographically smallest arc sequence among min-hop paths.
std::vector<int> min_hop_path(const Network& net, const Eigen::RowVectorXd& residual, int origin, int dest,
                              double tol) {
  std::vector<int> pred(net.num_nodes(), -1);
  std::vector<char> seen(net.num_nodes(), 0);
  std::deque<int> queue{origin};
  seen[origin] = 1;
  while (!queue.empty() && !seen[dest]) {
    const int u = queue.front();
    queue.pop_front();
    for (int a : net.out_arcs(u)) {
      if (residual(a) <= tol) continue;
      const int h = net.head_index(a);
      if (seen[h]) continue;
      seen[h] = 1;
      pred[h] = a;
      queue.push_back(h);
    }
  }
  if (!seen[dest]) return {};
  std::vector<int> path;
  for (int at = dest; at != origin; at = net.tail_index(pred[at])) path.push_back(pred[at]);
  std::reverse(path.begin(), path.end());
  return path;
}

}  // namespace

Decomposition decompose_to_paths(const Instance& inst, const ClassFlow& x, double tol) {
  const Network& net = inst.network;
  Decomposition out;
  for (int w = 0; w < inst.num_ods(); ++w) {
    Eigen::RowVectorXd residual = x.row(w);
    const int o = inst.origin_index(w);
    const int d = inst.dest_index(w);
    for (;;) {
      std::vector<int> path = min_hop_path(net, residual, o, d, tol);
      if (path.empty()) break;
      double bottleneck = residual(path[0]);
      for (int a : path) bottleneck = std::min(bottleneck, residual(a));
      for (int a : path) {
        residual(a) = residual(a) == bottleneck ? 0.0 : residual(a) - bottleneck;
      }
      out.flow.paths.push_back(PathEntry{w, std::move(path), bottleneck});
    }
    const double left = residual.maxCoeff();
    if (left > tol) {
      out.cyclic_residual = true;
      out.discarded_cycle_flow = std::max(out.discarded_cycle_flow, left);
    }
  }
  return out;
}

Instance scale_demands(const Instance& inst, double factor) {
  Instance out = inst;
  for (auto& od : out.demands.entries) od.demand *= factor;
  return out;
}

Instance scale_demands_kappa(const Instance& inst, double kappa) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (kappa == 0.0) return inst;
  return scale_demands(inst, 1.0 + kappa);
}

PathFlow scale_paths(const PathFlow& f, double factor) {
  PathFlow out = f;
  for (auto& p : out.paths) p.flow *= factor;
  return out;
}

}  // namespace posat
