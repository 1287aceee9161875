#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

#include "posat/error.hpp"

namespace posat {

/// One term b * (d^T v)^m of an arc travel time. weights holds the sparse
/// interaction vector d as (arc id, weight) pairs, ascending by arc id.
struct CostTerm {
  int power = 0;
  double coeff = 0.0;
  std::vector<std::pair<int, double>> weights;
};

/// Polynomial arc travel times t_a(v) = sum_m b_am (d_am^T v)^m with
/// nonnegative b and d.
class PolynomialCost {
 public:
  PolynomialCost() = default;

  /// Empty weights mean the unit vector on the arc itself. Throws InvalidCost
  /// for negative coefficients/weights or out-of-range arc references.
  /// declared_degree is raised to the largest power with a positive coefficient.
  explicit PolynomialCost(std::vector<std::vector<CostTerm>> terms, int declared_degree = 0);

  /// Separable form from per-arc coefficient lists b_a0, b_a1, ...
  static PolynomialCost separable(const std::vector<std::vector<double>>& coeffs);

  int num_arcs() const { return static_cast<int>(terms_.size()); }
  int degree() const { return degree_; }
  bool is_separable() const { return separable_; }

  /// Every term's interaction vector is the 0/1 indicator of a group of arcs
  /// that all carry the identical term. Z is then convex (sum of b * u^(m+1)).
  bool is_shared_argument() const { return shared_argument_; }

  const std::vector<CostTerm>& terms(int a) const { return terms_[a]; }
  const std::vector<std::vector<CostTerm>>& all_terms() const { return terms_; }

  /// dependents(e): arcs whose travel time reads v_e (includes e when it does).
  const std::vector<int>& dependents(int e) const { return dependents_[e]; }

  /// Smallest constant term b_a0 of arc a.
  double free_flow(int a) const;

 private:
  void analyse();

  std::vector<std::vector<CostTerm>> terms_;
  std::vector<std::vector<int>> dependents_;
  int degree_ = 0;
  bool separable_ = true;
  bool shared_argument_ = true;
};

template <typename Scalar>
inline Scalar ipow(Scalar x, int m) {
  Scalar r(1);
  for (int i = 0; i < m; ++i) r *= x;
  return r;
}

template <typename Derived>
typename Derived::Scalar term_argument(const CostTerm& term,
                                       const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Scalar s(0);
  for (const auto& [e, w] : term.weights) s += Scalar(w) * v(e);
  return s;
}

template <typename Derived>
typename Derived::Scalar arc_time(const PolynomialCost& cost, int a,
                                  const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Scalar t(0);
  for (const auto& term : cost.terms(a)) {
    if (term.power == 0) {
      t += Scalar(term.coeff);
    } else {
      t += Scalar(term.coeff) * ipow(term_argument(term, v), term.power);
    }
  }
  return t;
}

/// t(v) for every arc.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> arc_times(
    const PolynomialCost& cost, const Eigen::MatrixBase<Derived>& v) {
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> t(cost.num_arcs());
  for (int a = 0; a < cost.num_arcs(); ++a) t(a) = arc_time(cost, a, v);
  return t;
}

/// Z(v) = sum_a t_a(v) v_a.
template <typename Derived>
typename Derived::Scalar total_travel_time(const PolynomialCost& cost,
                                           const Eigen::MatrixBase<Derived>& v) {
  return arc_times(cost, v).dot(v.derived());
}

/// Gradient of Z: t_a(v) + sum_e v_e dt_e/dv_a.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> so_marginal_costs(
    const PolynomialCost& cost, const Eigen::MatrixBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> grad = arc_times(cost, v);
  for (int e = 0; e < cost.num_arcs(); ++e) {
    if (v(e) == Scalar(0)) continue;
    for (const auto& term : cost.terms(e)) {
      if (term.power == 0) continue;
      const Scalar s = term_argument(term, v);
      const Scalar scale =
          v(e) * Scalar(term.coeff) * Scalar(term.power) * ipow(s, term.power - 1);
      for (const auto& [a, w] : term.weights) grad(a) += scale * Scalar(w);
    }
  }
  return grad;
}

/// Sum of arc times along an arc sequence.
template <typename Derived>
typename Derived::Scalar path_cost(const Eigen::MatrixBase<Derived>& times,
                                   const std::vector<int>& path) {
  typename Derived::Scalar c(0);
  for (int a : path) c += times(a);
  return c;
}

double path_cost(const PolynomialCost& cost, const Eigen::VectorXd& v, const std::vector<int>& path);

/// Beckmann potential sum_a int_0^{v_a} t_a(u) du; throws NotSeparable.
double beckmann_potential(const PolynomialCost& cost, const Eigen::VectorXd& v);

/// sum_a lambda_a int_0^{v_a} t_a(u) du; throws NotSeparable, LambdaOutOfRange.
double perceived_potential(const PolynomialCost& cost, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& lambda);

/// [t(v1) - t(v2)]^T (v1 - v2).
double monotonicity_inner(const PolynomialCost& cost, const Eigen::VectorXd& v1,
                          const Eigen::VectorXd& v2);

/// d t_a / d v_e at v.
double time_partial(const PolynomialCost& cost, int a, int e, const Eigen::VectorXd& v);

/// Frozen-interaction separable cost: each term's cross-arc part is fixed at
/// v_bar, so t_a depends on v_a only. Expanded with the binomial theorem.
PolynomialCost freeze_interactions(const PolynomialCost& cost, const Eigen::VectorXd& v_bar);

}  // namespace posat
