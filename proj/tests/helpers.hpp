#pragma once

#include <random>
#include <vector>

#include "posat/network.hpp"
#include "posat/random.hpp"

namespace posat::test {

// Small random separable instance: a Hamiltonian chain keeps every OD connected,
// extra arcs are random, costs are b0 + b_n v^n with random nonnegative b.
inline Instance random_separable(std::mt19937_64& rng, int max_nodes, int max_arcs, int n, int max_ods = 2) {
  std::uniform_int_distribution<int> node_count(3, max_nodes);
  const int N = node_count(rng);
  std::vector<int> nodes;
  for (int i = 0; i < N; ++i) nodes.push_back(i + 1);
  std::vector<Arc> arcs;
  auto add = [&](int t, int h) {
    for (const Arc& a : arcs) {
      if (a.tail == t && a.head == h) return;
    }
    arcs.push_back({static_cast<int>(arcs.size()), t, h});
  };
  for (int i = 1; i < N; ++i) add(i, i + 1);
  std::uniform_int_distribution<int> pick(1, N);
  for (int tries = 0; static_cast<int>(arcs.size()) < max_arcs && tries < 100; ++tries) {
    const int t = pick(rng);
    const int h = pick(rng);
    if (t != h) add(t, h);
  }
  std::vector<std::vector<double>> coeffs;
  for (std::size_t a = 0; a < arcs.size(); ++a) {
    std::vector<double> c(n + 1, 0.0);
    c[0] = uniform_draw(rng, 0.0, 2.0);
    c[n] = uniform_draw(rng, 0.1, 2.0);
    coeffs.push_back(c);
  }
  Instance inst;
  inst.network = Network(nodes, arcs);
  inst.cost = PolynomialCost::separable(coeffs);
  std::uniform_int_distribution<int> od_count(1, max_ods);
  const int W = od_count(rng);
  std::vector<std::pair<int, int>> used;
  for (int w = 0; w < W; ++w) {
    std::uniform_int_distribution<int> o(1, N - 1);
    const int origin = o(rng);
    std::uniform_int_distribution<int> d(origin + 1, N);
    const int dest = d(rng);
    bool dup = false;
    for (auto& p : used) dup = dup || (p.first == origin && p.second == dest);
    if (dup) continue;
    used.emplace_back(origin, dest);
    inst.demands.entries.push_back({origin, dest, uniform_draw(rng, 0.5, 3.0)});
  }
  inst.validate();
  return inst;
}

}  // namespace posat::test
