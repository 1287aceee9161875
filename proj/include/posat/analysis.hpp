#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "posat/network.hpp"
#include "posat/solvers.hpp"

namespace posat {

enum class CertificateStatus { Certified, DecompositionOnly, Failed };

const char* to_string(CertificateStatus s);

struct OdCertificate {
  double max_used_cost = 0.0;  // longest used path, true costs
  double shortest = 0.0;       // mu_w at t(v)
  double excess = 0.0;         // ratio - 1 (multiplicative) or difference (additive)
  bool zero_shortest_path = false;
  bool cyclic = false;
  bool passed = true;
};

struct SatisficingCertificate {
  CertificateStatus status = CertificateStatus::Certified;
  double threshold = 0.0;  // smallest kappa (or E) certifying the flow
  std::vector<OdCertificate> per_od;

  bool certified() const { return status != CertificateStatus::Failed; }
};

/// Every used path costs at most (1+kappa) times the OD's shortest path.
/// Used arcs are x > tol * max(1, Q_w); acyclic supports are checked over all
/// decompositions via the longest used path.
SatisficingCertificate verify_msatue(const Instance& inst, const ClassFlow& x, double kappa, double tol = 1e-6);

/// Every used path costs at most E more than the OD's shortest path.
SatisficingCertificate verify_asatue(const Instance& inst, const ClassFlow& x, double E, double tol = 1e-6);

struct NecessaryCondition {
  bool holds = false;
  double slack = 0.0;  // (1+kappa) sum_w Q_w mu_w - Z
};

NecessaryCondition check_necessary_condition(const Instance& inst, const ArcFlow& v, double kappa,
                                             double tol = 1e-9);

/// Piecewise PoSat upper bound; throws NegativeKappa, NegativeDegree.
double zeta_bound(double kappa, int n);
/// Kappa where the two branches of zeta_bound meet.
double zeta_threshold(int n);
/// (1+kappa)^(n+1).
double simple_posat_bound(double kappa, int n);
/// 1 + kappa * ceil((|N|-1)/2) * Q for a single common origin; throws MultipleOrigins.
double deviation_ratio_bound(const Instance& inst, double kappa);

struct ConditionCheck {
  bool holds = false;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// f_hat0 lives on the (1+kappa)-scaled demand, f_kappa on the base demand.
ConditionCheck check_condition_21(const Instance& inst, const PathFlow& f_hat0, const PathFlow& f_kappa, double kappa,
                                  double tol = 1e-9);
ConditionCheck check_condition_23(const Instance& inst, const PathFlow& f_hat_sigma, const PathFlow& f_kappa,
                                  double kappa, int n, double tol = 1e-9);

enum class ProbeDomain { Feasible, Orthant };

struct MonotonicityReport {
  int samples = 0;
  double min_inner = 0.0;   // min [t(v1) - t(v2)]^T (v1 - v2)
  double alpha = 0.0;       // min inner / |v1 - v2|^2
};

/// Feasible samples mix random all-or-nothing loadings; orthant samples draw
/// v uniformly in [0, total demand]^|A|.
MonotonicityReport monotonicity_probe(const Instance& inst, int samples, std::uint64_t seed,
                                      ProbeDomain domain = ProbeDomain::Feasible);

}  // namespace posat
