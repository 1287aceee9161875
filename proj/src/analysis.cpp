#include "posat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <string>

#include "posat/random.hpp"
#include "posat/shortest_path.hpp"

namespace posat {

const char* to_string(CertificateStatus s) {
  switch (s) {
    case CertificateStatus::Certified: return "certified";
    case CertificateStatus::DecompositionOnly: return "decomposition_only";
    case CertificateStatus::Failed: return "failed";
  }
  return "unknown";
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Longest origin-destination path over the used arcs, or nullopt when they contain a cycle.
std::optional<double> longest_used_path(const Network& net, const Eigen::VectorXd& t, const std::vector<char>& used,
                                        int origin, int dest) {
  const int n = net.num_nodes();
  std::vector<int> indeg(n, 0);
  for (int a = 0; a < net.num_arcs(); ++a) {
    if (used[a]) ++indeg[net.head_index(a)];
  }
  std::deque<int> ready;
  for (int i = 0; i < n; ++i) {
    if (indeg[i] == 0) ready.push_back(i);
  }
  std::vector<double> longest(n, kNegInf);
  longest[origin] = 0.0;
  int visited = 0;
  while (!ready.empty()) {
    const int u = ready.front();
    ready.pop_front();
    ++visited;
    for (int a : net.out_arcs(u)) {
      if (!used[a]) continue;
      const int h = net.head_index(a);
      if (longest[u] != kNegInf) longest[h] = std::max(longest[h], longest[u] + t(a));
      if (--indeg[h] == 0) ready.push_back(h);
    }
  }
  if (visited < n) return std::nullopt;
  return longest[dest];
}

template <typename Excess>
SatisficingCertificate verify_satisficing(const Instance& inst, const ClassFlow& x, double level, double tol,
                                          bool multiplicative, Excess excess_of) {
  const Network& net = inst.network;
  const Eigen::VectorXd t = arc_times(inst.cost, aggregate_to_arcflow(x));
  const AonResult shortest = all_or_nothing(inst, t);

  SatisficingCertificate cert;
  cert.per_od.resize(inst.num_ods());
  std::optional<Decomposition> decomposition;
  bool any_cyclic = false;
  bool any_failed = false;
  double threshold = 0.0;
  for (int w = 0; w < inst.num_ods(); ++w) {
    OdCertificate& od = cert.per_od[w];
    const double thr = tol * std::max(1.0, inst.demands.entries[w].demand);
    std::vector<char> used(inst.num_arcs(), 0);
    for (int a = 0; a < inst.num_arcs(); ++a) used[a] = x(w, a) > thr;
    od.shortest = shortest.mu(w);

    std::optional<double> longest = longest_used_path(net, t, used, inst.origin_index(w), inst.dest_index(w));
    if (!longest) {
      od.cyclic = true;
      any_cyclic = true;
      if (!decomposition) decomposition = decompose_to_paths(inst, x, 1e-12);
      double worst = kNegInf;
      for (const auto& p : decomposition->flow.paths) {
        if (p.od == w && p.flow > thr) worst = std::max(worst, path_cost(t, p.arcs));
      }
      longest = worst;
    }
    od.max_used_cost = *longest == kNegInf ? od.shortest : *longest;

    if (multiplicative && od.shortest <= tol) {
      if (od.max_used_cost > tol) {
        od.zero_shortest_path = true;
        od.excess = std::numeric_limits<double>::infinity();
      } else {
        od.excess = 0.0;
      }
    } else {
      od.excess = excess_of(od.max_used_cost, od.shortest);
    }
    const double slack = multiplicative ? tol : tol * std::max(1.0, od.shortest);
    od.passed = od.excess <= level + slack;
    any_failed = any_failed || !od.passed;
    threshold = std::max(threshold, od.excess);
  }
  cert.threshold = threshold;
  cert.status = any_failed ? CertificateStatus::Failed
                           : (any_cyclic ? CertificateStatus::DecompositionOnly : CertificateStatus::Certified);
  return cert;
}

}  // namespace

SatisficingCertificate verify_msatue(const Instance& inst, const ClassFlow& x, double kappa, double tol) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  return verify_satisficing(inst, x, kappa, tol, true, [](double longest, double mu) { return longest / mu - 1.0; });
}

SatisficingCertificate verify_asatue(const Instance& inst, const ClassFlow& x, double E, double tol) {
  if (E < 0.0) throw Error(ErrorCode::InvalidArgument, "E must be >= 0");
  return verify_satisficing(inst, x, E, tol, false, [](double longest, double mu) { return longest - mu; });
}

NecessaryCondition check_necessary_condition(const Instance& inst, const ArcFlow& v, double kappa, double tol) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  const AonResult aon = all_or_nothing(inst, t);
  double lower = 0.0;
  for (int w = 0; w < inst.num_ods(); ++w) lower += inst.demands.entries[w].demand * aon.mu(w);
  const double z = t.dot(v);
  NecessaryCondition r;
  r.slack = (1.0 + kappa) * lower - z;
  r.holds = r.slack >= -tol * std::max(1.0, z);
  return r;
}

double zeta_threshold(int n) {
  if (n < 0) throw Error(ErrorCode::NegativeDegree, "degree must be >= 0");
  if (n == 0) return std::exp(1.0) - 1.0;
  return std::pow(n + 1.0, 1.0 / n) - 1.0;
}

double zeta_bound(double kappa, int n) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (n < 0) throw Error(ErrorCode::NegativeDegree, "degree must be >= 0");
  if (n == 0) return 1.0 + kappa;
  if (kappa >= zeta_threshold(n)) return ipow(1.0 + kappa, n + 1);
  return 1.0 / (1.0 / (1.0 + kappa) - n / std::pow(n + 1.0, (n + 1.0) / n));
}

double simple_posat_bound(double kappa, int n) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (n < 0) throw Error(ErrorCode::NegativeDegree, "degree must be >= 0");
  return ipow(1.0 + kappa, n + 1);
}

double deviation_ratio_bound(const Instance& inst, double kappa) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  for (const auto& od : inst.demands.entries) {
    if (od.origin != inst.demands.entries.front().origin) {
      throw Error(ErrorCode::MultipleOrigins, "OD pairs do not share a single origin");
    }
  }
  const int half = inst.network.num_nodes() / 2;  // ceil((|N| - 1) / 2)
  return 1.0 + kappa * half * inst.demands.total();
}

namespace {

struct PathPair {
  double a = 0.0;
  double b = 0.0;
  const std::vector<int>* arcs = nullptr;
};

using PathUnion = std::map<std::pair<int, std::vector<int>>, PathPair>;

PathUnion path_union(const PathFlow& fa, const PathFlow& fb) {
  PathUnion u;
  for (const auto& p : fa.paths) {
    auto& e = u[{p.od, p.arcs}];
    e.a += p.flow;
    e.arcs = &p.arcs;
  }
  for (const auto& p : fb.paths) {
    auto& e = u[{p.od, p.arcs}];
    e.b += p.flow;
    e.arcs = &p.arcs;
  }
  return u;
}

Eigen::VectorXd times_of(const Instance& inst, const PathFlow& f) {
  return arc_times(inst.cost, aggregate_to_arcflow(paths_to_classflow(inst, f)));
}

}  // namespace

ConditionCheck check_condition_21(const Instance& inst, const PathFlow& f_hat0, const PathFlow& f_kappa, double kappa,
                                  double tol) {
  const Eigen::VectorXd ta = times_of(inst, f_hat0);
  const Eigen::VectorXd tb = times_of(inst, f_kappa);
  ConditionCheck r;
  for (const auto& [key, e] : path_union(f_hat0, f_kappa)) {
    const double ca = path_cost(ta, key.second);
    const double cb = path_cost(tb, key.second);
    r.lhs += (ca - cb) * (e.a - e.b);
    r.rhs += kappa * cb * std::abs(e.a - e.b);
  }
  r.holds = r.lhs >= r.rhs - tol;
  return r;
}

ConditionCheck check_condition_23(const Instance& inst, const PathFlow& f_hat_sigma, const PathFlow& f_kappa,
                                  double kappa, int n, double tol) {
  const double sigma = ipow(1.0 + kappa, n) - 1.0;
  const Eigen::VectorXd ta = times_of(inst, f_hat_sigma);
  const Eigen::VectorXd tb = times_of(inst, f_kappa);
  ConditionCheck r;
  for (const auto& [key, e] : path_union(f_hat_sigma, f_kappa)) {
    const double ca = path_cost(ta, key.second);
    const double cb = path_cost(tb, key.second);
    r.lhs += (ca - cb) * (e.a - e.b);
    r.rhs += sigma * std::max(ca, cb) * std::abs(e.a - e.b);
  }
  r.holds = r.lhs >= r.rhs - tol;
  return r;
}

MonotonicityReport monotonicity_probe(const Instance& inst, int samples, std::uint64_t seed, ProbeDomain domain) {
  if (samples < 1) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 1");
  std::mt19937_64 rng(seed);
  const int n_arcs = inst.num_arcs();
  const double q_total = inst.demands.total();
  auto extreme_point = [&]() {
    Eigen::VectorXd times(n_arcs);
    for (int a = 0; a < n_arcs; ++a) times(a) = uniform_draw(rng, 0.1, 1.0);
    return ArcFlow(aggregate_to_arcflow(all_or_nothing(inst, times).x));
  };
  auto sample = [&]() {
    if (domain == ProbeDomain::Orthant) {
      ArcFlow v(n_arcs);
      for (int a = 0; a < n_arcs; ++a) v(a) = uniform_draw(rng, 0.0, q_total);
      return v;
    }
    const ArcFlow y1 = extreme_point();
    const ArcFlow y2 = extreme_point();
    const double theta = unit_draw(rng);
    return ArcFlow(theta * y1 + (1.0 - theta) * y2);
  };

  MonotonicityReport r;
  r.samples = samples;
  r.min_inner = std::numeric_limits<double>::infinity();
  r.alpha = std::numeric_limits<double>::infinity();
  for (int s = 0; s < samples; ++s) {
    const ArcFlow v1 = sample();
    const ArcFlow v2 = sample();
    const double inner = monotonicity_inner(inst.cost, v1, v2);
    r.min_inner = std::min(r.min_inner, inner);
    const double norm2 = (v1 - v2).squaredNorm();
    if (norm2 > 0.0) r.alpha = std::min(r.alpha, inner / norm2);
  }
  if (r.alpha == std::numeric_limits<double>::infinity()) r.alpha = 0.0;
  return r;
}

}  // namespace posat
