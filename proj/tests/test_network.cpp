#include <doctest.h>

#include "helpers.hpp"
#include "posat/error.hpp"
#include "posat/instances.hpp"
#include "posat/network.hpp"
#include "posat/shortest_path.hpp"

using namespace posat;

namespace {

Instance two_od_grid() {
  // 1 -> 2 -> 4, 1 -> 3 -> 4, 2 -> 3
  Instance inst;
  inst.network = Network({1, 2, 3, 4}, {{0, 1, 2}, {1, 2, 4}, {2, 1, 3}, {3, 3, 4}, {4, 2, 3}});
  inst.demands.entries = {{1, 4, 5.0}, {2, 4, 2.0}};
  inst.cost = PolynomialCost::separable({{1, 1}, {1, 1}, {1, 1}, {1, 1}, {1, 1}});
  inst.validate();
  return inst;
}

}  // namespace

TEST_CASE("network rejects malformed graphs") {
  CHECK_THROWS_AS(Network({1, 2}, {{0, 1, 1}}), Error);
  CHECK_THROWS_AS(Network({1, 2}, {{0, 1, 3}}), Error);
  CHECK_THROWS_AS(Network({1, 2}, {{1, 1, 2}}), Error);
  const Network net({5, 9}, {{0, 5, 9}, {1, 9, 5}});
  CHECK(net.node_index(9) == 1);
  CHECK_THROWS_AS(net.node_index(7), Error);
  CHECK(net.reverse_arc(0) == 1);
}

TEST_CASE("demand validation") {
  Instance inst = gen_example1(1.0);
  inst.demands.entries.push_back({1, 2, 2.0});
  CHECK_THROWS_AS(inst.validate(), Error);
  inst = gen_example1(1.0);
  inst.demands.entries[0].demand = 0.0;
  CHECK_THROWS_AS(inst.validate(), Error);
  CHECK_THROWS_AS(gen_example1(-1.0), Error);
}

TEST_CASE("aggregate_to_arcflow") {
  CHECK(aggregate_to_arcflow(ClassFlow::Zero(2, 4)).isZero());
  ClassFlow x = ClassFlow::Zero(2, 4);
  x(0, 3) = 1.0;
  x(1, 3) = 1.0;
  CHECK(aggregate_to_arcflow(x)(3) == 2.0);

  const CircularInstance c = gen_circular(1.0, 4);
  const ArcFlow v = aggregate_to_arcflow(paths_to_classflow(c.instance, circular_counterclockwise_flow(c.instance)));
  for (int a = 1; a < c.instance.num_arcs(); a += 2) CHECK(v(a) == doctest::Approx(c.l));
  for (int a = 0; a < c.instance.num_arcs(); a += 2) CHECK(v(a) == 0.0);
}

TEST_CASE("paths_to_classflow") {
  const Instance inst = two_od_grid();
  PathFlow f;
  f.paths = {{0, {0, 1}, 2.0}, {0, {0, 4, 3}, 3.0}};
  const ClassFlow x = paths_to_classflow(inst, f);
  CHECK(x(0, 0) == 5.0);
  CHECK(x(0, 1) == 2.0);
  CHECK(x(0, 3) == 3.0);

  f.paths = {{0, {0, 3}, 1.0}};
  CHECK_THROWS_AS(paths_to_classflow(inst, f), Error);

  const Instance ex2 = gen_example2(1.0);
  const double kappa = 0.4;
  f.paths = {{0, {0}, 1.0 / (2 + kappa)}, {0, {1}, (1 + kappa) / (2 + kappa)}};
  const ClassFlow x2 = paths_to_classflow(ex2, f);
  CHECK(x2(0, 0) == doctest::Approx(1.0 / 2.4));
  CHECK(x2(0, 1) == doctest::Approx(1.4 / 2.4));
}

TEST_CASE("decompose_to_paths") {
  const Instance ex1 = gen_example1(1.0);
  ClassFlow x(1, 2);
  x << 0.75, 0.25;
  const Decomposition d = decompose_to_paths(ex1, x);
  REQUIRE(d.flow.paths.size() == 2);
  CHECK(d.flow.paths[0].arcs == std::vector<int>{0});
  CHECK(d.flow.paths[0].flow == doctest::Approx(0.75));
  CHECK(d.flow.paths[1].arcs == std::vector<int>{1});
  CHECK_FALSE(d.cyclic_residual);

  // a circulation on top of a path flow is reported and dropped
  Instance inst = two_od_grid();
  ClassFlow y = ClassFlow::Zero(2, 5);
  y(0, 2) = 5.0;
  y(0, 3) = 5.0;
  const Decomposition single = decompose_to_paths(inst, y);
  REQUIRE(single.flow.paths.size() == 1);
  CHECK(single.flow.paths[0].arcs == std::vector<int>{2, 3});
}

TEST_CASE("decomposition round trip on random conservative flows") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const Instance inst = test::random_separable(rng, 6, 10, 2, 3);
    PathFlow f;
    for (int w = 0; w < inst.num_ods(); ++w) {
      // random paths via shortest paths under random times
      double left = inst.demands.entries[w].demand;
      for (int k = 0; k < 3; ++k) {
        Eigen::VectorXd times(inst.num_arcs());
        for (int a = 0; a < inst.num_arcs(); ++a) times(a) = uniform_draw(rng, 0.1, 1.0);
        const ShortestPathTree tree = shortest_paths(inst.network, times, inst.origin_index(w));
        const double share = k == 2 ? left : left * unit_draw(rng);
        left -= share;
        f.paths.push_back({w, tree_path(inst.network, tree, inst.dest_index(w)), share});
      }
    }
    const ClassFlow x = paths_to_classflow(inst, f);
    CHECK(conservation_residual(inst, x) < 1e-12);
    const Decomposition d = decompose_to_paths(inst, x, 1e-12);
    const ClassFlow back = paths_to_classflow(inst, d.flow);
    CHECK((back - x).cwiseAbs().maxCoeff() <= inst.num_arcs() * 1e-12 * 10);
  }
}

TEST_CASE("scale_demands_kappa") {
  Instance inst = two_od_grid();
  inst.demands.entries = {{1, 4, 1.0}, {2, 4, 2.0}};
  const Instance same = scale_demands_kappa(inst, 0.0);
  CHECK(same.demands.entries[1].demand == 2.0);
  const Instance scaled = scale_demands_kappa(inst, 0.5);
  CHECK(scaled.demands.entries[0].demand == doctest::Approx(1.5));
  CHECK(scaled.demands.entries[1].demand == doctest::Approx(3.0));
  CHECK_THROWS_AS(scale_demands_kappa(inst, -0.1), Error);
}

TEST_CASE("shortest paths") {
  const Instance ex1 = gen_example1(1.0);
  Eigen::VectorXd t(2);
  t << 1.0, 2.0;
  const ShortestPathTree tree = shortest_paths(ex1.network, t, ex1.origin_index(0));
  CHECK(tree.dist[ex1.dest_index(0)] == 1.0);
  CHECK(tree.dist[ex1.origin_index(0)] == 0.0);

  t << 1.0, 1.0;
  const AonResult aon = all_or_nothing(ex1, t);
  CHECK(aon.x(0, 0) == 1.0);
  CHECK(aon.x(0, 1) == 0.0);

  t << 1.0, -1.0;
  CHECK_THROWS_AS(shortest_paths(ex1.network, t, 0), Error);

  const CircularInstance c = gen_circular(0.5, 2);
  const Eigen::VectorXd uniform = Eigen::VectorXd::Constant(c.instance.num_arcs(), 0.7);
  for (int w = 0; w < c.instance.num_ods(); ++w) {
    const ShortestPathTree tr = shortest_paths(c.instance.network, uniform, c.instance.origin_index(w));
    CHECK(tr.dist[c.instance.dest_index(w)] == doctest::Approx(std::min(c.m, c.l) * 0.7));
  }
}

TEST_CASE("free-flow all-or-nothing loads all demand on Sioux Falls") {
  TntpMetadata meta;
  const Instance sf = load_tntp(POSAT_DATA_DIR "/sioux_falls/SiouxFalls_net.tntp",
                                POSAT_DATA_DIR "/sioux_falls/SiouxFalls_trips.tntp", &meta);
  const AonResult aon = all_or_nothing(sf, arc_times(sf.cost, ArcFlow::Zero(sf.num_arcs())));
  CHECK(aon.x.sum() > 0.0);
  double out_of_origins = 0.0;
  for (int w = 0; w < sf.num_ods(); ++w) {
    for (int a : sf.network.out_arcs(sf.origin_index(w))) out_of_origins += aon.x(w, a);
  }
  CHECK(out_of_origins == doctest::Approx(sf.demands.total()).epsilon(1e-12));
}
