#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "posat/analysis.hpp"
#include "posat/error.hpp"
#include "posat/instances.hpp"
#include "posat/search.hpp"

using namespace posat;

namespace {

PathFlow two_arc_flow(double f1, double f2) {
  PathFlow f;
  f.paths = {{0, {0}, f1}, {0, {1}, f2}};
  return f;
}

}  // namespace

TEST_CASE("verify_msatue") {
  const Instance ex2 = gen_example2(2.0);
  const EquilibriumReport prue = solve_prue(ex2);
  CHECK(verify_msatue(ex2, prue.x, 0.0).certified());

  const CircularInstance c = gen_circular(0.5, 4);
  const ClassFlow cw = paths_to_classflow(c.instance, circular_clockwise_flow(c.instance));
  const double k_exact = static_cast<double>(c.m) / c.l - 1.0;
  const SatisficingCertificate at = verify_msatue(c.instance, cw, k_exact);
  CHECK(at.status == CertificateStatus::Certified);
  CHECK(at.threshold == doctest::Approx(k_exact));
  CHECK_FALSE(verify_msatue(c.instance, cw, k_exact - 1e-3).certified());

  for (double kappa : {0.2, 0.7}) {
    const Instance ex1 = gen_example1(1.0);
    const ClassFlow x = paths_to_classflow(ex1, two_arc_flow(1.0 - kappa, kappa));
    const SatisficingCertificate cert = verify_msatue(ex1, x, kappa);
    CHECK(cert.certified());
    CHECK(cert.threshold == doctest::Approx(kappa));
  }
}

TEST_CASE("verify_msatue on a cyclic support falls back to one decomposition") {
  // 1 -> 2 -> 3 with a 2 <-> 4 loop carrying flow inside the OD class
  Instance inst;
  inst.network = Network({1, 2, 3, 4}, {{0, 1, 2}, {1, 2, 3}, {2, 2, 4}, {3, 4, 2}});
  inst.demands.entries = {{1, 3, 1.0}};
  inst.cost = PolynomialCost::separable({{1}, {1}, {1}, {1}});
  ClassFlow x = ClassFlow::Zero(1, 4);
  x << 1.0, 1.0, 0.5, 0.5;
  const SatisficingCertificate cert = verify_msatue(inst, x, 0.0);
  CHECK(cert.status == CertificateStatus::DecompositionOnly);
  CHECK(cert.per_od[0].cyclic);
}

TEST_CASE("zero shortest path is reported") {
  Instance inst = gen_example1(1.0);
  inst.cost = PolynomialCost::separable({{0.0}, {1.0}});
  ClassFlow x(1, 2);
  x << 0.5, 0.5;
  const SatisficingCertificate cert = verify_msatue(inst, x, 1.0);
  CHECK(cert.per_od[0].zero_shortest_path);
  CHECK_FALSE(cert.certified());
}

TEST_CASE("verify_asatue") {
  const Instance ex2 = gen_example2(1.0);
  CHECK(verify_asatue(ex2, solve_prue(ex2).x, 0.0).certified());

  const double kappa = 0.4;
  const Instance ex1 = gen_example1(1.0);
  const SatisficingCertificate e1 = verify_asatue(ex1, paths_to_classflow(ex1, two_arc_flow(1 - kappa, kappa)), 1.0);
  CHECK(e1.threshold == doctest::Approx(kappa));

  const CircularInstance c = gen_circular(0.5, 2);
  const ClassFlow cw = paths_to_classflow(c.instance, circular_clockwise_flow(c.instance));
  const double e = (c.m - c.l) * std::pow(c.m, 2);
  const SatisficingCertificate ec = verify_asatue(c.instance, cw, e);
  CHECK(ec.certified());
  CHECK(ec.threshold == doctest::Approx(e));
  CHECK_FALSE(verify_asatue(c.instance, cw, 0.9 * e).certified());
}

TEST_CASE("necessary condition") {
  const Instance ex2 = gen_example2(1.0);
  const NecessaryCondition prue = check_necessary_condition(ex2, solve_prue(ex2, {1e-12, 50000}).v, 0.0);
  CHECK(prue.holds);
  CHECK(std::abs(prue.slack) < 1e-9);

  const CircularInstance c = gen_circular(1.0, 4);
  const ArcFlow cw = aggregate_to_arcflow(paths_to_classflow(c.instance, circular_clockwise_flow(c.instance)));
  const NecessaryCondition tight = check_necessary_condition(c.instance, cw, 1.0);
  CHECK(tight.holds);
  CHECK(tight.slack == doctest::Approx(0.0));

  const Instance ex1 = gen_example1(1.0);
  Eigen::VectorXd long_path(2);
  long_path << 0.0, 1.0;
  CHECK_FALSE(check_necessary_condition(ex1, long_path, 0.5).holds);
}

TEST_CASE("zeta bound") {
  CHECK(zeta_bound(0.0, 1) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
  CHECK(zeta_bound(1.0, 1) == doctest::Approx(4.0));
  CHECK(zeta_bound(0.5, 1) == doctest::Approx(2.4));
  for (double kappa : {0.0, 0.3, 0.7, 0.99}) {
    CHECK(zeta_bound(kappa, 1) == doctest::Approx(4 * (1 + kappa) / (3 - kappa)).epsilon(1e-12));
  }
  for (int n = 1; n <= 4; ++n) {
    const double k = zeta_threshold(n);
    CHECK(k == doctest::Approx(std::pow(n + 1.0, 1.0 / n) - 1.0));
    CHECK(std::abs(zeta_bound(k * (1 - 1e-15), n) - zeta_bound(k, n)) < 1e-9);
    const double lower_branch = 1.0 / (1.0 / (1.0 + k) - n / std::pow(n + 1.0, (n + 1.0) / n));
    CHECK(std::abs(lower_branch - std::pow(1 + k, n + 1)) < 1e-9);
    CHECK(zeta_bound(0.0, n) == doctest::Approx(1.0 / (1.0 - n / std::pow(n + 1.0, (n + 1.0) / n))));
    CHECK(zeta_bound(0.0, n) > 1.0);
  }
  CHECK(zeta_bound(0.5, 0) == doctest::Approx(1.5));
  CHECK(zeta_threshold(0) == doctest::Approx(std::exp(1.0) - 1.0));
  CHECK_THROWS_AS(zeta_bound(-0.1, 2), Error);
  CHECK_THROWS_AS(zeta_bound(0.1, -1), Error);
}

TEST_CASE("simple and deviation bounds") {
  CHECK(simple_posat_bound(0.0, 3) == 1.0);
  CHECK(simple_posat_bound(1.0, 4) == doctest::Approx(32.0));
  CHECK(simple_posat_bound(0.2, 1) == doctest::Approx(1.44));

  for (double Q : {0.5, 2.0}) {
    CHECK(deviation_ratio_bound(gen_example1(Q), 0.3) == doctest::Approx(1 + 0.3 * Q));
  }
  CHECK(deviation_ratio_bound(gen_example1(1.0), 0.0) == 1.0);

  Instance five;
  five.network = Network({1, 2, 3, 4, 5}, {{0, 1, 2}, {1, 2, 3}, {2, 3, 4}, {3, 4, 5}});
  five.demands.entries = {{1, 3, 1.5}, {1, 5, 0.5}};
  five.cost = PolynomialCost::separable({{1}, {1}, {1}, {1}});
  CHECK(deviation_ratio_bound(five, 0.5) == doctest::Approx(3.0));

  five.demands.entries.push_back({2, 4, 1.0});
  CHECK_THROWS_AS(deviation_ratio_bound(five, 0.5), Error);
}

TEST_CASE("condition 21") {
  const Instance ex2 = gen_example2(1.0);
  const PathFlow same = two_arc_flow(0.5, 0.5);
  const ConditionCheck zero = check_condition_21(ex2, same, same, 0.0);
  CHECK(zero.holds);
  CHECK(zero.lhs == 0.0);
  CHECK(zero.rhs == 0.0);

  for (double kappa : {0.05, 0.5, 2.0}) {
    const double Q = 1.0;
    const PathFlow hat = two_arc_flow((1 + kappa) * Q, 0.0);
    const PathFlow worst = kappa <= Q ? two_arc_flow(Q - kappa, kappa) : two_arc_flow(0.0, Q);
    CHECK_FALSE(check_condition_21(gen_example1(Q), hat, worst, kappa).holds);
  }

  const double kappa = 0.1;
  const PathFlow hat = two_arc_flow((1 + kappa) / 2, (1 + kappa) / 2);
  const PathFlow worst = two_arc_flow(1 / (2 + kappa), (1 + kappa) / (2 + kappa));
  CHECK(check_condition_21(ex2, hat, worst, kappa).holds);
}

TEST_CASE("condition 23") {
  const Instance ex2 = gen_example2(1.0);
  const PathFlow same = two_arc_flow(0.5, 0.5);
  const ConditionCheck zero = check_condition_23(ex2, same, same, 0.0, 1);
  CHECK(zero.holds);
  CHECK(zero.lhs == 0.0);

  auto at = [&](double kappa) {
    const PathFlow hat = two_arc_flow((1 + kappa) / 2, (1 + kappa) / 2);
    const PathFlow worst = two_arc_flow(1 / (2 + kappa), (1 + kappa) / (2 + kappa));
    return check_condition_23(ex2, hat, worst, kappa, 1);
  };
  CHECK(at(0.2).holds);
  CHECK_FALSE(at(0.3).holds);
  CHECK(at(0.205).holds);
  CHECK_FALSE(at(0.207).holds);
}

TEST_CASE("closed-form instances") {
  const double Q = 1.0;
  CHECK(solve_prue(gen_example1(Q)).Z == doctest::Approx(1.0));
  for (double kappa : {0.3, 1.5}) {
    const Instance ex1 = gen_example1(Q);
    const double expected = kappa <= Q ? Q + kappa * kappa : (1 + Q) * Q;
    const PathFlow worst = kappa <= Q ? two_arc_flow(Q - kappa, kappa) : two_arc_flow(0.0, Q);
    const ClassFlow x = paths_to_classflow(ex1, worst);
    CHECK(total_travel_time(ex1.cost, aggregate_to_arcflow(x)) == doctest::Approx(expected));
    CHECK(verify_msatue(ex1, x, kappa).certified());
  }

  const Instance ex2 = gen_example2(Q);
  CHECK(solve_prue(ex2).Z == doctest::Approx(Q * Q / 2));
  const double kappa = 0.6;
  const ClassFlow worst = paths_to_classflow(ex2, two_arc_flow(Q / (2 + kappa), (1 + kappa) * Q / (2 + kappa)));
  CHECK(total_travel_time(ex2.cost, aggregate_to_arcflow(worst)) ==
        doctest::Approx((2 + 2 * kappa + kappa * kappa) / ((2 + kappa) * (2 + kappa)) * Q));
  CHECK(solve_prue(scale_demands_kappa(ex2, kappa)).Z == doctest::Approx((1 + kappa) * (1 + kappa) / 2 * Q));
}

TEST_CASE("search_worst_posat basics") {
  const Instance ex1 = gen_example1(1.0);
  const PoSatResult zero = search_worst_posat(ex1, 0.0, {4, 1});
  CHECK(zero.ok);
  CHECK(zero.posat == doctest::Approx(1.0));

  const PoSatResult r = search_worst_posat(ex1, 0.5, {4, 1});
  CHECK(r.ok);
  CHECK(r.posat >= 1.0 - 1e-9);
  CHECK(r.posat <= r.zeta + 1e-9);
  REQUIRE(r.trace.size() == 4);
  CHECK(r.trace[0].seed == 1);
  CHECK(r.best_lambda.values.minCoeff() >= r.best_lambda.lo() - 1e-12);

  CHECK_THROWS_AS(search_worst_posat(ex1, -0.5), Error);
  SearchOptions none;
  none.starts = 0;
  CHECK_THROWS_AS(search_worst_posat(ex1, 0.5, none), Error);
}

TEST_CASE("search is independent of thread count") {
  const CircularInstance c = gen_circular(0.3, 4, RatioConvention::Posat);
  SearchOptions opts;
  opts.starts = 6;
  opts.seed = 4;
  opts.budget = 30;
  const PoSatResult one = search_worst_posat(c.instance, 0.3, opts);
  opts.threads = 3;
  const PoSatResult three = search_worst_posat(c.instance, 0.3, opts);
  CHECK(one.z_worst == three.z_worst);
  for (std::size_t i = 0; i < one.trace.size(); ++i) CHECK(one.trace[i].Z == three.trace[i].Z);
}

TEST_CASE("posat_curve") {
  const Instance ex2 = gen_example2(1.0);
  const auto rows = posat_curve(ex2, {0.0, 0.25, 0.5}, {4, 2});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].posat == doctest::Approx(1.0));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].ok);
    CHECK(rows[i].posat <= rows[i].zeta + 1e-9);
    if (i > 0) CHECK(rows[i].posat >= rows[i - 1].posat - 1e-9);
  }
  CHECK_THROWS_AS(posat_curve(ex2, {0.5, 0.25}), Error);
  CHECK_THROWS_AS(posat_curve(ex2, {-0.5}), Error);
}
