#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "posat/shortest_path.hpp"
#include "posat/solvers.hpp"

namespace posat {

namespace {

// Potential of costs whose terms each read the sum over a group of arcs that
// all carry the same term; the separable case is the singleton group.
double group_potential(const PolynomialCost& cost, const Eigen::VectorXd& v) {
  double phi = 0.0;
  for (int a = 0; a < cost.num_arcs(); ++a) {
    for (const auto& term : cost.terms(a)) {
      if (term.power == 0) {
        phi += term.coeff * v(a);
      } else if (term.weights.front().first == a) {
        phi += term.coeff * ipow(term_argument(term, v), term.power + 1) / (term.power + 1);
      }
    }
  }
  return phi;
}

double gap_of(double num, double lower) { return num > 0.0 ? (num - lower) / num : 0.0; }

// Frank-Wolfe for min F over the class-flow polytope, where price(v) is the
// gradient of a convex F and objective(v) evaluates F.
template <typename Price, typename Objective>
EquilibriumReport frank_wolfe(const Instance& inst, Price price, Objective objective, const SolverOptions& opts,
                              const ClassFlow* warm_start) {
  ClassFlow x = warm_start ? *warm_start : all_or_nothing(inst, price(ArcFlow::Zero(inst.num_arcs()))).x;
  ArcFlow v = aggregate_to_arcflow(x);
  double obj = objective(v);

  EquilibriumReport best;
  best.relative_gap = std::numeric_limits<double>::infinity();
  bool monotone = true;
  int k = 0;
  for (;; ++k) {
    const Eigen::VectorXd p = price(v);
    AonResult aon = all_or_nothing(inst, p);
    const double num = p.dot(v);
    double lower = 0.0;
    for (int w = 0; w < inst.num_ods(); ++w) lower += inst.demands.entries[w].demand * aon.mu(w);
    const double gap = gap_of(num, lower);
    if (gap < best.relative_gap) {
      best.x = x;
      best.v = v;
      best.relative_gap = gap;
      best.mu = aon.mu;
      best.iterations = k;
    }
    if (gap <= opts.tol) {
      best.converged = true;
      break;
    }
    if (k >= opts.max_iters) break;

    const ArcFlow y = aggregate_to_arcflow(aon.x);
    const ArcFlow d = y - v;
    auto g = [&](double alpha) { return price(ArcFlow(v + alpha * d)).dot(d); };
    double alpha = 1.0;
    if (g(1.0) > 0.0) {
      const double scale = 1e-12 * std::max(std::abs(num), 1e-300);
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 200; ++it) {
        alpha = 0.5 * (lo + hi);
        const double gm = g(alpha);
        if (std::abs(gm) <= scale) break;
        if (gm > 0.0) {
          hi = alpha;
        } else {
          lo = alpha;
        }
        if (hi - lo <= 1e-17) break;
      }
    }
    x += alpha * (aon.x - x);
    x = x.cwiseMax(0.0);
    v = aggregate_to_arcflow(x);
    const double obj_new = objective(v);
    if (obj_new > obj + 1e-12 * std::max(1.0, std::abs(obj))) monotone = false;
    obj = obj_new;
  }
  best.iterations = std::max(best.iterations, std::min(k, opts.max_iters));
  best.Z = total_travel_time(inst.cost, best.v);
  best.potential_monotone = monotone;
  return best;
}

void require_potential(const PolynomialCost& cost, const char* what) {
  if (!cost.is_separable() && !cost.is_shared_argument()) {
    throw Error(ErrorCode::NotSeparable, std::string(what) + " needs separable costs");
  }
}

double true_relative_gap(const Instance& inst, const ArcFlow& v) {
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  AonResult aon = all_or_nothing(inst, t);
  double lower = 0.0;
  for (int w = 0; w < inst.num_ods(); ++w) lower += inst.demands.entries[w].demand * aon.mu(w);
  return gap_of(t.dot(v), lower);
}

}  // namespace

EquilibriumReport solve_prue_fw(const Instance& inst, const SolverOptions& opts, const ClassFlow* warm_start) {
  require_potential(inst.cost, "Frank-Wolfe PRUE");
  const PolynomialCost& cost = inst.cost;
  return frank_wolfe(
      inst, [&cost](const ArcFlow& v) { return Eigen::VectorXd(arc_times(cost, v)); },
      [&cost](const ArcFlow& v) { return group_potential(cost, v); }, opts, warm_start);
}

EquilibriumReport solve_so(const Instance& inst, const SolverOptions& opts) {
  require_potential(inst.cost, "system optimum");
  const PolynomialCost& cost = inst.cost;
  return frank_wolfe(
      inst, [&cost](const ArcFlow& v) { return Eigen::VectorXd(so_marginal_costs(cost, v)); },
      [&cost](const ArcFlow& v) { return total_travel_time(cost, v); }, opts, nullptr);
}

EquilibriumReport solve_prue_diagonalization(const Instance& inst, const SolverOptions& opts) {
  ClassFlow x = all_or_nothing(inst, arc_times(inst.cost, ArcFlow::Zero(inst.num_arcs()))).x;
  ArcFlow v = aggregate_to_arcflow(x);
  double gap = true_relative_gap(inst, v);

  EquilibriumReport best;
  best.x = x;
  best.v = v;
  best.relative_gap = gap;
  PathFlow paths;
  int step_index = 1;
  int k = 0;
  for (; k < opts.max_iters && best.relative_gap > opts.tol; ++k) {
    Instance sub = inst;
    sub.cost = freeze_interactions(inst.cost, v);
    UepeOptions inner;
    inner.tol = std::max(0.1 * std::min(gap, 1.0), 0.1 * opts.tol);
    inner.max_iters = 5000;
    inner.warm_start = &paths;
    EquilibriumReport sub_eq = solve_prue(sub, inner);
    paths = std::move(sub_eq.paths);
    const ClassFlow& y = sub_eq.x;
    x += (y - x) / static_cast<double>(step_index);
    v = aggregate_to_arcflow(x);
    const double next = true_relative_gap(inst, v);
    // shrink the averaging step only when the full step stops helping
    if (next >= gap) ++step_index;
    gap = next;
    if (gap < best.relative_gap) {
      best.x = x;
      best.v = v;
      best.relative_gap = gap;
    }
  }
  best.iterations = k;
  best.converged = best.relative_gap <= opts.tol;
  best.Z = total_travel_time(inst.cost, best.v);
  best.mu = all_or_nothing(inst, arc_times(inst.cost, best.v)).mu;
  return best;
}

}  // namespace posat
