#pragma once

#include <string>
#include <utility>
#include <vector>

#include "posat/network.hpp"
#include "posat/solvers.hpp"

namespace posat {

/// Two parallel arcs 1 -> 2 with t1 = 1, t2 = 1 + v2.
Instance gen_example1(double Q);
/// Two parallel arcs 1 -> 2 with t1 = v1, t2 = v2.
Instance gen_example2(double Q);

enum class RatioConvention {
  Kappa,  // m / l = 1 + kappa
  Posat,  // (m / l)^(n+1) = (1 + kappa)^5
};

struct CircularInstance {
  Instance instance;
  int m = 0;
  int l = 0;
  double kappa_exact = 0.0;    // m / l - 1
  double target_posat = 0.0;   // (m / l)^(n+1)
};

/// Ring of m + l nodes (ids 0..m+l-1). Arc 2i runs i -> i+1, arc 2i+1 runs
/// i+1 -> i; both cost (v_2i + v_2i+1)^n. Unit OD (i, i+m) for every node i.
/// Throws NegativeKappa, NegativeDegree, NoIntegerRatio.
CircularInstance gen_circular(double kappa_target, int n, RatioConvention convention = RatioConvention::Kappa);

/// Each OD on its m-hop clockwise path.
PathFlow circular_clockwise_flow(const Instance& inst);
/// Each OD on its l-hop counterclockwise path.
PathFlow circular_counterclockwise_flow(const Instance& inst);
/// lambda = 1/(1+kappa) on every OD's clockwise arcs, 1 elsewhere.
LambdaField circular_pattern(const Instance& inst, double kappa);

/// Table of the asymmetric nine-node network: (tail, head, A, B, C) in arc id order.
struct NineNodeRow {
  int tail;
  int head;
  double A;
  double B;
  double C;
};
const std::vector<NineNodeRow>& nine_node_table();

/// t_a = A + B ((v_a + 0.5 v_rev) / C)^4 on the 32-arc network. Throws UnknownNode.
Instance gen_nine_node_asymmetric(const DemandTable& demands);
/// Same network with separable t_a = A + B (v_a / C)^4.
Instance gen_nine_node_separable(const DemandTable& demands);

/// CSV with header origin,dest,q.
DemandTable load_demands_csv(const std::string& path);

struct TntpMetadata {
  int zones = 0;
  int nodes = 0;
  int links = 0;
  int first_thru_node = 1;
  int listed_od_entries = 0;  // entries in the trips file, zero flows included
  int od_pairs = 0;           // positive off-diagonal entries kept
  double total_od_flow = 0.0;
};

/// BPR costs fft (1 + B (v/cap)^power) as polynomials. Throws ParseError
/// (with line number) and UnsupportedPower.
Instance load_tntp(const std::string& net_path, const std::string& trips_path, TntpMetadata* meta = nullptr);

struct AsymmetricVariant {
  Instance instance;
  std::vector<int> unpaired_arcs;  // arcs without a reverse arc, left separable
};

/// Every non-constant term argument v_a becomes v_a + omega v_rev.
AsymmetricVariant make_asymmetric_variant(const Instance& inst, double omega = 0.5);

}  // namespace posat
