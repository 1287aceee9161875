#include "posat/shortest_path.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <string>

namespace posat {

ShortestPathTree shortest_paths(const Network& net, const Eigen::VectorXd& times, int origin) {
  const int n = net.num_nodes();
  for (int a = 0; a < net.num_arcs(); ++a) {
    if (!(times(a) >= 0.0)) {
      throw Error(ErrorCode::NegativeArcTime, "arc " + std::to_string(a) + " has time " + std::to_string(times(a)));
    }
  }
  ShortestPathTree tree;
  tree.origin = origin;
  tree.dist.assign(n, kUnreachable);
  tree.pred_arc.assign(n, -1);

  // 0 = never queued, 1 = in queue, 2 = was queued
  std::vector<char> state(n, 0);
  std::deque<int> queue{origin};
  tree.dist[origin] = 0.0;
  state[origin] = 1;
  while (!queue.empty()) {
    const int u = queue.front();
    queue.pop_front();
    state[u] = 2;
    for (int a : net.out_arcs(u)) {
      const int h = net.head_index(a);
      const double cand = tree.dist[u] + times(a);
      if (cand < tree.dist[h]) {
        tree.dist[h] = cand;
        if (state[h] == 0) {
          queue.push_back(h);
        } else if (state[h] == 2) {
          queue.push_front(h);
        }
        state[h] = 1;
      }
    }
  }

  // Tie-break: BFS over tight arcs in ascending arc id order.
  std::vector<char> seen(n, 0);
  std::deque<int> bfs{origin};
  seen[origin] = 1;
  while (!bfs.empty()) {
    const int u = bfs.front();
    bfs.pop_front();
    for (int a : net.out_arcs(u)) {
      const int h = net.head_index(a);
      if (seen[h]) continue;
      const double slack = tree.dist[u] + times(a) - tree.dist[h];
      if (slack > 1e-12 * std::max(1.0, std::abs(tree.dist[h]))) continue;
      seen[h] = 1;
      tree.pred_arc[h] = a;
      bfs.push_back(h);
    }
  }
  return tree;
}

std::vector<int> tree_path(const Network& net, const ShortestPathTree& tree, int dest) {
  std::vector<int> path;
  if (dest == tree.origin || tree.pred_arc[dest] < 0) return path;
  for (int at = dest; at != tree.origin; at = net.tail_index(tree.pred_arc[at])) path.push_back(tree.pred_arc[at]);
  std::reverse(path.begin(), path.end());
  return path;
}

namespace {

void load_od(const Instance& inst, const ShortestPathTree& tree, int w, AonResult& out) {
  const int d = inst.dest_index(w);
  if (tree.dist[d] == kUnreachable) {
    const auto& od = inst.demands.entries[w];
    throw Error(ErrorCode::DisconnectedOD,
                "no path from node " + std::to_string(od.origin) + " to node " + std::to_string(od.dest));
  }
  out.mu(w) = tree.dist[d];
  const double q = inst.demands.entries[w].demand;
  for (int a : tree_path(inst.network, tree, d)) out.x(w, a) += q;
}

}  // namespace

AonResult all_or_nothing(const Instance& inst, const Eigen::VectorXd& times) {
  AonResult out{ClassFlow::Zero(inst.num_ods(), inst.num_arcs()), Eigen::VectorXd::Zero(inst.num_ods())};
  std::map<int, ShortestPathTree> trees;
  for (int w = 0; w < inst.num_ods(); ++w) {
    const int o = inst.origin_index(w);
    auto it = trees.find(o);
    if (it == trees.end()) it = trees.emplace(o, shortest_paths(inst.network, times, o)).first;
    load_od(inst, it->second, w, out);
  }
  return out;
}

AonResult all_or_nothing(const Instance& inst, const Eigen::VectorXd& times, const Eigen::MatrixXd& lambda) {
  AonResult out{ClassFlow::Zero(inst.num_ods(), inst.num_arcs()), Eigen::VectorXd::Zero(inst.num_ods())};
  for (int w = 0; w < inst.num_ods(); ++w) {
    const Eigen::VectorXd perceived = lambda.row(w).transpose().cwiseProduct(times);
    load_od(inst, shortest_paths(inst.network, perceived, inst.origin_index(w)), w, out);
  }
  return out;
}

}  // namespace posat
