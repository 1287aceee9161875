#include "posat/cost.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace posat {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::InvalidDemand: return "InvalidDemand";
    case ErrorCode::InvalidCost: return "InvalidCost";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::PathNotConnected: return "PathNotConnected";
    case ErrorCode::NegativeKappa: return "NegativeKappa";
    case ErrorCode::NegativeDegree: return "NegativeDegree";
    case ErrorCode::NotSeparable: return "NotSeparable";
    case ErrorCode::LambdaOutOfRange: return "LambdaOutOfRange";
    case ErrorCode::NegativeArcTime: return "NegativeArcTime";
    case ErrorCode::DisconnectedOD: return "DisconnectedOD";
    case ErrorCode::MultipleOrigins: return "MultipleOrigins";
    case ErrorCode::NonpositiveDemand: return "NonpositiveDemand";
    case ErrorCode::NoIntegerRatio: return "NoIntegerRatio";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnsupportedPower: return "UnsupportedPower";
    case ErrorCode::PRUEFailed: return "PRUEFailed";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

PolynomialCost::PolynomialCost(std::vector<std::vector<CostTerm>> terms, int declared_degree)
    : terms_(std::move(terms)) {
  if (declared_degree < 0) throw Error(ErrorCode::NegativeDegree, "cost degree must be >= 0");
  const int n_arcs = num_arcs();
  for (int a = 0; a < n_arcs; ++a) {
    for (auto& term : terms_[a]) {
      if (term.power < 0) throw Error(ErrorCode::InvalidCost, "negative power on arc " + std::to_string(a));
      if (!(term.coeff >= 0.0) || !std::isfinite(term.coeff)) {
        throw Error(ErrorCode::InvalidCost, "coefficient must be finite and >= 0 on arc " + std::to_string(a));
      }
      if (term.weights.empty() || term.power == 0) {
        term.weights = {{a, 1.0}};
        continue;
      }
      std::sort(term.weights.begin(), term.weights.end());
      std::vector<std::pair<int, double>> merged;
      for (const auto& [e, w] : term.weights) {
        if (e < 0 || e >= n_arcs) {
          throw Error(ErrorCode::InvalidCost, "interaction references unknown arc " + std::to_string(e));
        }
        if (!(w >= 0.0) || !std::isfinite(w)) {
          throw Error(ErrorCode::InvalidCost, "interaction weight must be finite and >= 0 on arc " + std::to_string(a));
        }
        if (w == 0.0) continue;
        if (!merged.empty() && merged.back().first == e) {
          merged.back().second += w;
        } else {
          merged.emplace_back(e, w);
        }
      }
      term.weights = std::move(merged);
    }
  }
  degree_ = declared_degree;
  analyse();
}

PolynomialCost PolynomialCost::separable(const std::vector<std::vector<double>>& coeffs) {
  std::vector<std::vector<CostTerm>> terms(coeffs.size());
  for (std::size_t a = 0; a < coeffs.size(); ++a) {
    for (std::size_t m = 0; m < coeffs[a].size(); ++m) {
      if (coeffs[a][m] == 0.0 && m > 0) continue;
      terms[a].push_back(CostTerm{static_cast<int>(m), coeffs[a][m], {}});
    }
  }
  return PolynomialCost(std::move(terms));
}

double PolynomialCost::free_flow(int a) const {
  double b0 = 0.0;
  for (const auto& term : terms_[a]) {
    if (term.power == 0) b0 += term.coeff;
  }
  return b0;
}

void PolynomialCost::analyse() {
  const int n_arcs = num_arcs();
  separable_ = true;
  shared_argument_ = true;
  std::vector<std::set<int>> deps(n_arcs);
  for (int a = 0; a < n_arcs; ++a) {
    for (const auto& term : terms_[a]) {
      if (term.coeff > 0.0) degree_ = std::max(degree_, term.power);
      if (term.power == 0) continue;
      for (const auto& [e, w] : term.weights) deps[e].insert(a);
      const bool unit = term.weights.size() == 1 && term.weights[0].first == a && term.weights[0].second == 1.0;
      if (!unit) separable_ = false;

      bool shared = std::any_of(term.weights.begin(), term.weights.end(),
                                [a](const auto& p) { return p.first == a; });
      for (const auto& [e, w] : term.weights) {
        if (w != 1.0) {
          shared = false;
          break;
        }
        if (e == a) continue;
        const bool partner_has_term =
            std::any_of(terms_[e].begin(), terms_[e].end(), [&term](const CostTerm& other) {
              return other.power == term.power && other.coeff == term.coeff && other.weights == term.weights;
            });
        if (!partner_has_term) {
          shared = false;
          break;
        }
      }
      if (!shared) shared_argument_ = false;
    }
  }
  dependents_.assign(n_arcs, {});
  for (int e = 0; e < n_arcs; ++e) dependents_[e].assign(deps[e].begin(), deps[e].end());
}

double path_cost(const PolynomialCost& cost, const Eigen::VectorXd& v, const std::vector<int>& path) {
  double c = 0.0;
  for (int a : path) c += arc_time(cost, a, v);
  return c;
}

double beckmann_potential(const PolynomialCost& cost, const Eigen::VectorXd& v) {
  if (!cost.is_separable()) throw Error(ErrorCode::NotSeparable, "Beckmann potential needs separable costs");
  double phi = 0.0;
  for (int a = 0; a < cost.num_arcs(); ++a) {
    for (const auto& term : cost.terms(a)) {
      phi += term.coeff * ipow(v(a), term.power + 1) / (term.power + 1);
    }
  }
  return phi;
}

double perceived_potential(const PolynomialCost& cost, const Eigen::VectorXd& v,
                           const Eigen::VectorXd& lambda) {
  if (!cost.is_separable()) throw Error(ErrorCode::NotSeparable, "perceived potential needs separable costs");
  if (lambda.size() != cost.num_arcs()) {
    throw Error(ErrorCode::InvalidArgument, "lambda must have one entry per arc");
  }
  double psi = 0.0;
  for (int a = 0; a < cost.num_arcs(); ++a) {
    if (!(lambda(a) > 0.0 && lambda(a) <= 1.0)) {
      throw Error(ErrorCode::LambdaOutOfRange, "lambda must lie in (0, 1] on arc " + std::to_string(a));
    }
    for (const auto& term : cost.terms(a)) {
      psi += lambda(a) * term.coeff * ipow(v(a), term.power + 1) / (term.power + 1);
    }
  }
  return psi;
}

double monotonicity_inner(const PolynomialCost& cost, const Eigen::VectorXd& v1,
                          const Eigen::VectorXd& v2) {
  return (arc_times(cost, v1) - arc_times(cost, v2)).dot(v1 - v2);
}

double time_partial(const PolynomialCost& cost, int a, int e, const Eigen::VectorXd& v) {
  double d = 0.0;
  for (const auto& term : cost.terms(a)) {
    if (term.power == 0) continue;
    for (const auto& [arc, w] : term.weights) {
      if (arc != e) continue;
      d += term.coeff * term.power * ipow(term_argument(term, v), term.power - 1) * w;
    }
  }
  return d;
}

PolynomialCost freeze_interactions(const PolynomialCost& cost, const Eigen::VectorXd& v_bar) {
  std::vector<std::vector<double>> coeffs(cost.num_arcs(), std::vector<double>(cost.degree() + 1, 0.0));
  for (int a = 0; a < cost.num_arcs(); ++a) {
    for (const auto& term : cost.terms(a)) {
      if (term.power == 0) {
        coeffs[a][0] += term.coeff;
        continue;
      }
      double own = 0.0;
      double shift = 0.0;
      for (const auto& [e, w] : term.weights) {
        if (e == a) {
          own += w;
        } else {
          shift += w * v_bar(e);
        }
      }
      // b (own v + shift)^m = b sum_k C(m,k) own^k shift^(m-k) v^k
      double binom = 1.0;
      for (int k = 0; k <= term.power; ++k) {
        coeffs[a][k] += term.coeff * binom * ipow(own, k) * ipow(shift, term.power - k);
        binom = binom * (term.power - k) / (k + 1);
      }
    }
  }
  return PolynomialCost::separable(coeffs);
}

}  // namespace posat
