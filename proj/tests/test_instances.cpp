#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "posat/error.hpp"
#include "posat/instances.hpp"

using namespace posat;

namespace {

std::string temp_file(const std::string& name, const std::string& text) {
  const auto path = std::filesystem::temp_directory_path() / ("posat_test_" + name);
  std::ofstream(path) << text;
  return path.string();
}

}  // namespace

TEST_CASE("circular generator") {
  const CircularInstance c = gen_circular(1.0, 4);
  CHECK(c.m == 2);
  CHECK(c.l == 1);
  CHECK(c.instance.network.num_nodes() == 3);
  CHECK(c.instance.num_arcs() == 6);
  CHECK(c.instance.num_ods() == 3);
  CHECK(c.target_posat == doctest::Approx(32.0));
  CHECK(c.instance.cost.is_shared_argument());
  CHECK_FALSE(c.instance.cost.is_separable());

  const CircularInstance k = gen_circular(0.25, 2);
  CHECK(k.m == 5);
  CHECK(k.l == 4);

  // (m/l)^(n+1) = (1+kappa)^5
  const CircularInstance p = gen_circular(0.1, 4, RatioConvention::Posat);
  CHECK(p.m == 11);
  CHECK(p.l == 10);
  CHECK(p.target_posat == doctest::Approx(std::pow(1.1, 5)));
  const CircularInstance p1 = gen_circular(0.2, 4, RatioConvention::Posat);
  CHECK(std::pow(static_cast<double>(p1.m) / p1.l, 5) == doctest::Approx(std::pow(1.2, 5)).epsilon(1e-12));
  CHECK_THROWS_AS(gen_circular(0.2, 1, RatioConvention::Posat), Error);

  CHECK_THROWS_AS(gen_circular(std::sqrt(2.0) - 1.0, 4), Error);
  CHECK_THROWS_AS(gen_circular(-1.0, 4), Error);
  CHECK_THROWS_AS(gen_circular(1.0, -1), Error);
}

TEST_CASE("circular pattern and flows") {
  const CircularInstance c = gen_circular(0.5, 3);
  const LambdaField lambda = circular_pattern(c.instance, 0.5);
  const PathFlow cw = circular_clockwise_flow(c.instance);
  const PathFlow ccw = circular_counterclockwise_flow(c.instance);
  CHECK(cw.paths.size() == static_cast<std::size_t>(c.instance.num_ods()));
  for (const auto& p : cw.paths) {
    CHECK(p.arcs.size() == static_cast<std::size_t>(c.m));
    CHECK(is_connected_path(c.instance, p.od, p.arcs));
    for (int a : p.arcs) CHECK(lambda.values(p.od, a) == doctest::Approx(1.0 / 1.5));
  }
  for (const auto& p : ccw.paths) {
    CHECK(p.arcs.size() == static_cast<std::size_t>(c.l));
    CHECK(is_connected_path(c.instance, p.od, p.arcs));
    for (int a : p.arcs) CHECK(lambda.values(p.od, a) == 1.0);
  }
}

TEST_CASE("example generators") {
  const Instance ex1 = gen_example1(2.0);
  CHECK(ex1.num_arcs() == 2);
  CHECK(ex1.demands.entries[0].demand == 2.0);
  CHECK_THROWS_AS(gen_example2(0.0), Error);
}

TEST_CASE("nine-node table") {
  const auto& rows = nine_node_table();
  REQUIRE(rows.size() == 32);
  bool found = false;
  for (const auto& r : rows) {
    if (r.tail == 8 && r.head == 4) {
      found = true;
      CHECK(r.A == 43);
      CHECK(r.B == 6.45);
      CHECK(r.C == 6);
    }
  }
  CHECK(found);
  for (const auto& r : rows) {
    for (const auto& s : rows) {
      if (s.tail == r.head && s.head == r.tail) {
        CHECK(s.A == r.A);
        CHECK(s.B == r.B);
        CHECK(s.C == r.C);
      }
    }
  }

  DemandTable d;
  d.entries = {{1, 3, 1.0}};
  const Instance nn = gen_nine_node_asymmetric(d);
  CHECK(nn.network.num_nodes() == 9);
  CHECK(nn.num_arcs() == 32);
  const Eigen::VectorXd t0 = arc_times(nn.cost, Eigen::VectorXd::Zero(32));
  for (int a = 0; a < 32; ++a) CHECK(t0(a) == rows[a].A);

  d.entries = {{1, 42, 1.0}};
  CHECK_THROWS_AS(gen_nine_node_asymmetric(d), Error);
}

TEST_CASE("asymmetric variant") {
  DemandTable d;
  d.entries = {{1, 3, 1.0}};
  const Instance base = gen_nine_node_separable(d);
  std::mt19937_64 rng(9);
  Eigen::VectorXd v(base.num_arcs());
  for (int a = 0; a < v.size(); ++a) v(a) = static_cast<double>(rng() % 100) / 10.0;

  const AsymmetricVariant same = make_asymmetric_variant(base, 0.0);
  CHECK((arc_times(same.instance.cost, v) - arc_times(base.cost, v)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(same.unpaired_arcs.empty());

  const AsymmetricVariant asym = make_asymmetric_variant(base, 0.5);
  const Instance nn = gen_nine_node_asymmetric(d);
  CHECK((arc_times(asym.instance.cost, v) - arc_times(nn.cost, v)).cwiseAbs().maxCoeff() < 1e-12);

  // equal flow on both arcs of every pair: the v^4 term scales by 1.5^4
  const Eigen::VectorXd flat = Eigen::VectorXd::Constant(base.num_arcs(), 3.0);
  const Eigen::VectorXd tb = arc_times(base.cost, flat);
  const Eigen::VectorXd ta = arc_times(nn.cost, flat);
  for (int a = 0; a < base.num_arcs(); ++a) {
    const double A = nine_node_table()[a].A;
    CHECK(ta(a) - A == doctest::Approx((tb(a) - A) * std::pow(1.5, 4)));
  }

  Instance one_way = gen_example2(1.0);
  CHECK(make_asymmetric_variant(one_way).unpaired_arcs.size() == 2);
}

TEST_CASE("Sioux Falls") {
  TntpMetadata meta;
  const Instance sf = load_tntp(POSAT_DATA_DIR "/sioux_falls/SiouxFalls_net.tntp",
                                POSAT_DATA_DIR "/sioux_falls/SiouxFalls_trips.tntp", &meta);
  CHECK(sf.network.num_nodes() == 24);
  CHECK(sf.num_arcs() == 76);
  CHECK(meta.listed_od_entries == 576);
  CHECK(meta.od_pairs == sf.num_ods());
  CHECK(sf.num_ods() <= 576);
  CHECK(sf.cost.degree() == 4);
  CHECK(sf.cost.is_separable());
  CHECK(sf.demands.total() == doctest::Approx(meta.total_od_flow));
}

TEST_CASE("hand-written TNTP") {
  const std::string net = temp_file("net.tntp",
                                    "<NUMBER OF ZONES> 2\n<NUMBER OF NODES> 2\n<FIRST THRU NODE> 1\n"
                                    "<NUMBER OF LINKS> 2\n<END OF METADATA>\n\n"
                                    "~ init term cap len fft B power speed toll type ;\n"
                                    "\t1\t2\t1\t0\t1\t0\t4\t0\t0\t1\t;\n"
                                    "\t1\t2\t1\t0\t1\t1\t1\t0\t0\t1\t;\n");
  const std::string trips = temp_file("trips.tntp",
                                      "<NUMBER OF ZONES> 2\n<TOTAL OD FLOW> 3.0\n<END OF METADATA>\n\n"
                                      "Origin 1\n    1 :    0.0;    2 :    3.0;\n"
                                      "Origin 2\n    1 :    0.0;    2 :    0.0;\n");
  TntpMetadata meta;
  const Instance inst = load_tntp(net, trips, &meta);
  CHECK(inst.num_arcs() == 2);
  REQUIRE(inst.num_ods() == 1);
  CHECK(inst.demands.entries[0].demand == 3.0);
  CHECK(meta.listed_od_entries == 4);
  Eigen::VectorXd v(2);
  v << 0.7, 0.7;
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  CHECK(t(0) == doctest::Approx(1.0));
  CHECK(t(1) == doctest::Approx(1.7));

  const std::string bad = temp_file("bad.tntp",
                                    "<NUMBER OF NODES> 2\n<END OF METADATA>\n"
                                    "\t1\t2\t1\t0\t1\t1\t0.5\t0\t0\t1\t;\n");
  CHECK_THROWS_AS(load_tntp(bad, trips), Error);
  CHECK_THROWS_AS(load_tntp(temp_file("missing_dir/none", ""), trips), Error);
}

TEST_CASE("demand CSV") {
  const DemandTable d = load_demands_csv(POSAT_DATA_DIR "/nine_node/demands.csv");
  CHECK(d.size() == 4);
  CHECK(d.entries[3].origin == 2);
  CHECK(d.entries[3].dest == 4);
  CHECK_THROWS_AS(load_demands_csv(temp_file("demands_bad.csv", "origin,dest,q\n1,x,2\n")), Error);
}
