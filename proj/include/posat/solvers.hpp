#pragma once

#include <Eigen/Dense>

#include <optional>

#include "posat/network.hpp"

namespace posat {

/// Per-OD, per-arc perception multipliers in the box [1/(1+kappa), 1].
struct LambdaField {
  Eigen::MatrixXd values;  // rows are ODs, cols are arcs
  double kappa = 0.0;

  static LambdaField ones(int num_ods, int num_arcs);
  static LambdaField lower(int num_ods, int num_arcs, double kappa);

  double lo() const { return 1.0 / (1.0 + kappa); }

  /// Throws NegativeKappa, InvalidArgument (shape) or LambdaOutOfRange.
  void validate(int num_ods, int num_arcs, double tol = 1e-12) const;
};

struct EquilibriumReport {
  ClassFlow x;
  ArcFlow v;
  double Z = 0.0;
  double relative_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  Eigen::VectorXd mu;       // per-OD shortest path cost (perceived for UE-PE)
  PathFlow paths;           // filled by path-based solvers
  bool potential_monotone = true;  // Frank-Wolfe only
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iters = 50000;
};

/// Frank-Wolfe on the Beckmann potential with bisection line search. Accepts
/// separable costs and shared-argument costs (both have a potential).
/// Throws NotSeparable otherwise.
EquilibriumReport solve_prue_fw(const Instance& inst, const SolverOptions& opts = {},
                                const ClassFlow* warm_start = nullptr);

/// Fixed-point method for interacting costs: freeze cross-arc terms, solve the
/// separable subproblem by Frank-Wolfe, average.
EquilibriumReport solve_prue_diagonalization(const Instance& inst, const SolverOptions& opts = {1e-6, 50000});

/// Frank-Wolfe on Z with marginal-cost prices. Separable or shared-argument costs.
EquilibriumReport solve_so(const Instance& inst, const SolverOptions& opts = {});

enum class UepeMethod { GradientProjection, Msa };

struct UepeOptions {
  double tol = 1e-6;
  int max_iters = 50000;
  UepeMethod method = UepeMethod::GradientProjection;
  const PathFlow* warm_start = nullptr;  // gradient projection only
};

/// Multi-class equilibrium under perceived costs lambda(w,a) * t_a(v).
EquilibriumReport solve_uepe(const Instance& inst, const LambdaField& lambda, const UepeOptions& opts = {});

/// PRUE for any cost in the class: solve_uepe with lambda = 1.
EquilibriumReport solve_prue(const Instance& inst, const UepeOptions& opts = {});

struct KktReport {
  double stationarity = 0.0;     // max(0, -reduced cost) / max(1, perceived mu_w)
  double complementarity = 0.0;  // x * |reduced cost| / max(1, Q_w * perceived mu_w)
  double conservation = 0.0;     // node residual / max(1, Q_w)
  bool passed = false;
};

KktReport kkt_certificate(const Instance& inst, const LambdaField& lambda, const ClassFlow& x, double tol);

/// Relative gap of a class flow under perceived costs.
double perceived_relative_gap(const Instance& inst, const Eigen::MatrixXd& lambda, const ClassFlow& x);

}  // namespace posat
