#pragma once

#include <cstdint>
#include <vector>

#include "posat/network.hpp"
#include "posat/solvers.hpp"

namespace posat {

struct SearchStart {
  LambdaField lambda;
  PathFlow warm;  // empty means start from all-or-nothing
};

struct SearchOptions {
  int starts = 16;
  std::uint64_t seed = 0;
  long budget = -1;         // coordinate-ascent solver calls; -1 means 50 |W| |A|
  int threads = 1;
  double solve_tol = 1e-10;  // perceived relative gap of each UE-PE solve
  int max_iters = 20000;
  double certify_tol = 1e-6; // KKT and satisficing checks
  std::vector<SearchStart> extra_starts;
};

struct StartTrace {
  int index = 0;
  std::uint64_t seed = 0;
  double Z = 0.0;
  bool converged = false;
  bool certified = false;
};

struct PoSatResult {
  double kappa = 0.0;
  int degree = 0;
  double z_prue = 0.0;
  double prue_gap = 0.0;
  double z_worst = 0.0;
  double posat = 0.0;
  double zeta = 0.0;
  double simple_bound = 0.0;
  LambdaField best_lambda;
  ClassFlow best_x;
  PathFlow best_paths;
  std::vector<StartTrace> trace;
  int converged_starts = 0;
  long ascent_calls = 0;
  int ascent_flips = 0;
  bool ok = false;  // false when no start produced a certified flow
};

/// Multi-start lambda-box search; coordinate ascent over box corners then runs
/// from each certified start, best first, until the shared budget is spent.
/// Throws PRUEFailed when the reference equilibrium does not converge.
PoSatResult search_worst_posat(const Instance& inst, double kappa, const SearchOptions& opts = {});

/// search_worst_posat over an ascending kappa grid; each kappa also starts
/// from the previous best lambda, unchanged and rescaled into the new box.
/// Rows whose search throws come back with ok = false.
std::vector<PoSatResult> posat_curve(const Instance& inst, const std::vector<double>& kappas,
                                     const SearchOptions& opts = {});

/// Threads to use by default: POSAT_THREADS if set, else 1.
int default_threads();

}  // namespace posat
