#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "posat/shortest_path.hpp"
#include "posat/solvers.hpp"

namespace posat {

LambdaField LambdaField::ones(int num_ods, int num_arcs) {
  return LambdaField{Eigen::MatrixXd::Ones(num_ods, num_arcs), 0.0};
}

LambdaField LambdaField::lower(int num_ods, int num_arcs, double kappa) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  return LambdaField{Eigen::MatrixXd::Constant(num_ods, num_arcs, 1.0 / (1.0 + kappa)), kappa};
}

void LambdaField::validate(int num_ods, int num_arcs, double tol) const {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (values.rows() != num_ods || values.cols() != num_arcs) {
    throw Error(ErrorCode::InvalidArgument, "lambda must be " + std::to_string(num_ods) + " x " +
                                                std::to_string(num_arcs));
  }
  const double low = lo() - tol;
  for (Eigen::Index w = 0; w < values.rows(); ++w) {
    for (Eigen::Index a = 0; a < values.cols(); ++a) {
      const double l = values(w, a);
      if (!(l >= low && l <= 1.0 + tol)) {
        throw Error(ErrorCode::LambdaOutOfRange, "lambda(" + std::to_string(w) + ", " + std::to_string(a) +
                                                     ") = " + std::to_string(l) + " outside [1/(1+kappa), 1]");
      }
    }
  }
}

double perceived_relative_gap(const Instance& inst, const Eigen::MatrixXd& lambda, const ClassFlow& x) {
  const ArcFlow v = aggregate_to_arcflow(x);
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  double num = 0.0;
  double lower = 0.0;
  for (int w = 0; w < inst.num_ods(); ++w) {
    const Eigen::VectorXd perceived = lambda.row(w).transpose().cwiseProduct(t);
    num += perceived.dot(x.row(w).transpose());
    const ShortestPathTree tree = shortest_paths(inst.network, perceived, inst.origin_index(w));
    lower += inst.demands.entries[w].demand * tree.dist[inst.dest_index(w)];
  }
  return num > 0.0 ? (num - lower) / num : 0.0;
}

namespace {

constexpr Eigen::Index kMaxNewtonVars = 1500;
constexpr double kMinBeta = 1.0 / 16.0;

struct OdPaths {
  std::vector<std::vector<int>> arcs;
  std::vector<double> flow;
};

// Path-based gradient projection. Each OD in turn moves flow from its used
// paths to the current perceived shortest path by a Newton step on the cost
// difference; arc times are updated incrementally.
class GradientProjection {
 public:
  GradientProjection(const Instance& inst, const Eigen::MatrixXd& lambda) : inst_(inst), lambda_(lambda) {
    ods_.resize(inst.num_ods());
    in_s_.assign(inst.num_arcs(), 0);
    in_p_.assign(inst.num_arcs(), 0);
    coef_.assign(inst.num_arcs(), 0.0);
  }

  void start_aon() {
    const Eigen::VectorXd t0 = arc_times(inst_.cost, ArcFlow::Zero(inst_.num_arcs()));
    for (int w = 0; w < inst_.num_ods(); ++w) {
      const Eigen::VectorXd perceived = lambda_.row(w).transpose().cwiseProduct(t0);
      const ShortestPathTree tree = shortest_paths(inst_.network, perceived, inst_.origin_index(w));
      require_reachable(tree, w);
      ods_[w].arcs = {tree_path(inst_.network, tree, inst_.dest_index(w))};
      ods_[w].flow = {inst_.demands.entries[w].demand};
    }
    refresh();
  }

  void start_from(const PathFlow& f) {
    for (auto& od : ods_) od = OdPaths{};
    for (const auto& p : f.paths) {
      if (p.od < 0 || p.od >= inst_.num_ods() || !is_connected_path(inst_, p.od, p.arcs)) {
        throw Error(ErrorCode::PathNotConnected, "warm start path does not fit the instance");
      }
      if (p.flow <= 0.0) continue;
      ods_[p.od].arcs.push_back(p.arcs);
      ods_[p.od].flow.push_back(p.flow);
    }
    bool missing = false;
    for (int w = 0; w < inst_.num_ods(); ++w) {
      double total = 0.0;
      for (double f : ods_[w].flow) total += f;
      if (total <= 0.0) {
        missing = true;
        continue;
      }
      const double scale = inst_.demands.entries[w].demand / total;
      for (double& f : ods_[w].flow) f *= scale;
    }
    if (missing) {
      const Eigen::VectorXd t0 = arc_times(inst_.cost, ArcFlow::Zero(inst_.num_arcs()));
      for (int w = 0; w < inst_.num_ods(); ++w) {
        if (!ods_[w].flow.empty()) continue;
        const Eigen::VectorXd perceived = lambda_.row(w).transpose().cwiseProduct(t0);
        const ShortestPathTree tree = shortest_paths(inst_.network, perceived, inst_.origin_index(w));
        require_reachable(tree, w);
        ods_[w].arcs = {tree_path(inst_.network, tree, inst_.dest_index(w))};
        ods_[w].flow = {inst_.demands.entries[w].demand};
      }
    }
    refresh();
  }

  // v and t recomputed from path flows in a fixed order.
  void refresh() {
    v_ = ArcFlow::Zero(inst_.num_arcs());
    for (const auto& od : ods_) {
      for (std::size_t k = 0; k < od.arcs.size(); ++k) {
        for (int a : od.arcs[k]) v_(a) += od.flow[k];
      }
    }
    t_ = arc_times(inst_.cost, v_);
  }

  void sweep(double beta) {
    for (int w = 0; w < inst_.num_ods(); ++w) equilibrate(w, beta);
    refresh();
  }

  // Perceived relative gap and per-OD perceived shortest costs at the current flow.
  double gap(Eigen::VectorXd* mu) const {
    double num = 0.0;
    double lower = 0.0;
    if (mu) mu->resize(inst_.num_ods());
    for (int w = 0; w < inst_.num_ods(); ++w) {
      const Eigen::VectorXd perceived = lambda_.row(w).transpose().cwiseProduct(t_);
      const OdPaths& od = ods_[w];
      for (std::size_t k = 0; k < od.arcs.size(); ++k) num += od.flow[k] * path_cost(perceived, od.arcs[k]);
      const ShortestPathTree tree = shortest_paths(inst_.network, perceived, inst_.origin_index(w));
      const double d = tree.dist[inst_.dest_index(w)];
      lower += inst_.demands.entries[w].demand * d;
      if (mu) (*mu)(w) = d;
    }
    return num > 0.0 ? std::max(0.0, (num - lower) / num) : 0.0;
  }

  PathFlow paths() const {
    PathFlow f;
    for (int w = 0; w < inst_.num_ods(); ++w) {
      for (std::size_t k = 0; k < ods_[w].arcs.size(); ++k) {
        f.paths.push_back(PathEntry{w, ods_[w].arcs[k], ods_[w].flow[k]});
      }
    }
    return f;
  }

  const ArcFlow& v() const { return v_; }

  const std::vector<OdPaths>& state() const { return ods_; }

  // Continues the last sweep's displacement from `prev` by doubling steps, up
  // to the point where a path empties, while the gap keeps falling. Catches
  // flow circulating among ODs with little net effect on arc flows, which a
  // sweep only advances slowly. Returns the resulting gap.
  double extrapolate(const std::vector<OdPaths>& prev, double current_gap) {
    std::vector<OdPaths> base = ods_;
    std::vector<std::vector<double>> dir(ods_.size());
    double s_max = std::numeric_limits<double>::infinity();
    bool moved = false;
    for (std::size_t w = 0; w < ods_.size(); ++w) {
      OdPaths& od = base[w];
      for (std::size_t j = 0; j < prev[w].arcs.size(); ++j) {
        if (std::find(od.arcs.begin(), od.arcs.end(), prev[w].arcs[j]) == od.arcs.end()) {
          od.arcs.push_back(prev[w].arcs[j]);
          od.flow.push_back(0.0);
        }
      }
      dir[w].assign(od.arcs.size(), 0.0);
      for (std::size_t k = 0; k < od.arcs.size(); ++k) {
        double before = 0.0;
        for (std::size_t j = 0; j < prev[w].arcs.size(); ++j) {
          if (prev[w].arcs[j] == od.arcs[k]) before = prev[w].flow[j];
        }
        dir[w][k] = od.flow[k] - before;
        if (dir[w][k] != 0.0) moved = true;
        if (dir[w][k] < 0.0) s_max = std::min(s_max, od.flow[k] / -dir[w][k]);
      }
    }
    if (!moved || !(s_max > 0.0)) return current_gap;

    auto apply = [&](double step) {
      for (std::size_t w = 0; w < ods_.size(); ++w) {
        ods_[w] = base[w];
        for (std::size_t k = 0; k < base[w].arcs.size(); ++k) {
          ods_[w].flow[k] = std::max(0.0, base[w].flow[k] + step * dir[w][k]);
        }
      }
      refresh();
    };
    double best_gap = current_gap;
    double best_step = 0.0;
    for (double step = 1.0; step < 2.0 * s_max; step *= 2.0) {
      apply(std::min(step, s_max));
      const double g = gap(nullptr);
      if (!(g < best_gap)) break;
      best_gap = g;
      best_step = std::min(step, s_max);
    }
    apply(best_step);
    for (auto& od : ods_) prune(od);
    return best_gap;
  }

  // Newton step on the cost differences of every used path against its OD's
  // largest-flow path, backtracked on the gap. Sweeps only creep along
  // near-neutral directions; this step moves along them in one go.
  // Kept only when it cuts the gap below `target`; returns the resulting gap.
  double newton_step(double current_gap, double target) {
    struct Var {
      int w;
      std::size_t k;
    };
    std::vector<std::size_t> basic(ods_.size());
    std::vector<Var> vars;
    for (std::size_t w = 0; w < ods_.size(); ++w) {
      const auto& f = ods_[w].flow;
      basic[w] = std::max_element(f.begin(), f.end()) - f.begin();
      for (std::size_t k = 0; k < f.size(); ++k) {
        if (k != basic[w]) vars.push_back({static_cast<int>(w), k});
      }
    }
    const Eigen::Index P = static_cast<Eigen::Index>(vars.size());
    if (P == 0 || P > kMaxNewtonVars) return current_gap;

    const int A = inst_.num_arcs();
    auto signed_arcs = [&](const Var& var, Eigen::VectorXd& dv) {
      const OdPaths& od = ods_[var.w];
      for (int a : od.arcs[var.k]) dv(a) += 1.0;
      for (int a : od.arcs[basic[var.w]]) dv(a) -= 1.0;
    };
    Eigen::MatrixXd rows(P, A);  // perceived-cost difference weights per variable
    Eigen::VectorXd r(P);
    for (Eigen::Index i = 0; i < P; ++i) {
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(A);
      signed_arcs(vars[i], coef);
      coef = coef.cwiseProduct(lambda_.row(vars[i].w).transpose());
      rows.row(i) = coef.transpose();
      r(i) = coef.dot(t_);
    }
    Eigen::MatrixXd J(P, P);
    Eigen::VectorXd dv(A);
    Eigen::VectorXd dt(A);
    for (Eigen::Index j = 0; j < P; ++j) {
      dv.setZero();
      signed_arcs(vars[j], dv);
      dt.setZero();
      for (int e = 0; e < A; ++e) {
        if (dv(e) == 0.0) continue;
        for (int a : inst_.cost.dependents(e)) dt(a) += dv(e) * time_partial(inst_.cost, a, e, v_);
      }
      J.col(j) = rows * dt;
    }
    Eigen::VectorXd delta = J.partialPivLu().solve(-r);
    if (!delta.allFinite()) delta = J.completeOrthogonalDecomposition().solve(-r);
    if (!delta.allFinite()) return current_gap;

    const std::vector<OdPaths> base = ods_;
    for (double step = 1.0; step > 1e-3; step *= 0.5) {
      ods_ = base;
      for (Eigen::Index i = 0; i < P; ++i) {
        double& f = ods_[vars[i].w].flow[vars[i].k];
        f = std::max(0.0, f + step * delta(i));
      }
      bool feasible = true;
      for (std::size_t w = 0; w < ods_.size(); ++w) {
        double others = 0.0;
        for (std::size_t k = 0; k < ods_[w].flow.size(); ++k) {
          if (k != basic[w]) others += ods_[w].flow[k];
        }
        const double q = inst_.demands.entries[w].demand;
        if (others > q) {
          for (std::size_t k = 0; k < ods_[w].flow.size(); ++k) {
            if (k != basic[w]) ods_[w].flow[k] *= q / others;
          }
          others = q;
        }
        ods_[w].flow[basic[w]] = q - others;
        if (!(ods_[w].flow[basic[w]] >= 0.0)) feasible = false;
      }
      if (!feasible) continue;
      refresh();
      const double g = gap(nullptr);
      if (g < target) {
        for (auto& od : ods_) prune(od);
        return g;
      }
    }
    ods_ = base;
    refresh();
    return current_gap;
  }

 private:
  void require_reachable(const ShortestPathTree& tree, int w) const {
    if (tree.dist[inst_.dest_index(w)] == kUnreachable) {
      const auto& od = inst_.demands.entries[w];
      throw Error(ErrorCode::DisconnectedOD,
                  "no path from node " + std::to_string(od.origin) + " to node " + std::to_string(od.dest));
    }
  }

  double perceived_cost(int w, const std::vector<int>& path) const {
    double c = 0.0;
    for (int a : path) c += lambda_(w, a) * t_(a);
    return c;
  }

  void equilibrate(int w, double beta) {
    OdPaths& od = ods_[w];
    const Eigen::VectorXd perceived = lambda_.row(w).transpose().cwiseProduct(t_);
    const ShortestPathTree tree = shortest_paths(inst_.network, perceived, inst_.origin_index(w));
    std::vector<int> best = tree_path(inst_.network, tree, inst_.dest_index(w));

    std::size_t s = od.arcs.size();
    for (std::size_t k = 0; k < od.arcs.size(); ++k) {
      if (od.arcs[k] == best) s = k;
    }
    if (s == od.arcs.size()) {
      od.arcs.push_back(std::move(best));
      od.flow.push_back(0.0);
    }

    for (std::size_t k = 0; k < od.arcs.size(); ++k) {
      if (k == s || od.flow[k] <= 0.0) continue;
      const double dc = perceived_cost(w, od.arcs[k]) - perceived_cost(w, od.arcs[s]);
      if (dc <= 0.0) continue;
      const double h = curvature(w, od.arcs[s], od.arcs[k]);
      double delta = od.flow[k];
      if (h > 0.0) delta = std::min(delta, beta * dc / h);
      if (delta <= 0.0) continue;
      shift(od, k, s, delta);
    }

    prune(od);
  }

  static void prune(OdPaths& od) {
    std::size_t keep = 0;
    for (std::size_t k = 0; k < od.arcs.size(); ++k) {
      if (od.flow[k] > 0.0) {
        if (keep != k) {
          od.arcs[keep] = std::move(od.arcs[k]);
          od.flow[keep] = od.flow[k];
        }
        ++keep;
      }
    }
    od.arcs.resize(keep);
    od.flow.resize(keep);
  }

  // d/d(delta) of [c_s - c_p] when delta moves from p to s.
  double curvature(int w, const std::vector<int>& s, const std::vector<int>& p) {
    for (int a : s) in_s_[a] = 1;
    for (int a : p) in_p_[a] = 1;
    for (int a : s) coef_[a] = lambda_(w, a) * (in_s_[a] - in_p_[a]);
    for (int a : p) coef_[a] = lambda_(w, a) * (in_s_[a] - in_p_[a]);
    double h = 0.0;
    auto add = [&](int e, double dv) {
      for (int a : inst_.cost.dependents(e)) {
        if (coef_[a] != 0.0) h += dv * coef_[a] * time_partial(inst_.cost, a, e, v_);
      }
    };
    for (int e : s) {
      if (!in_p_[e]) add(e, 1.0);
    }
    for (int e : p) {
      if (!in_s_[e]) add(e, -1.0);
    }
    for (int a : s) in_s_[a] = 0, coef_[a] = 0.0;
    for (int a : p) in_p_[a] = 0, coef_[a] = 0.0;
    return h;
  }

  void shift(OdPaths& od, std::size_t from, std::size_t to, double delta) {
    if (delta >= od.flow[from]) {
      delta = od.flow[from];
      od.flow[from] = 0.0;
    } else {
      od.flow[from] -= delta;
    }
    od.flow[to] += delta;
    for (int a : od.arcs[to]) in_s_[a] = 1;
    for (int a : od.arcs[from]) in_p_[a] = 1;
    touched_.clear();
    for (int a : od.arcs[to]) {
      if (!in_p_[a]) v_(a) += delta, touched_.push_back(a);
    }
    for (int a : od.arcs[from]) {
      if (!in_s_[a]) v_(a) = std::max(0.0, v_(a) - delta), touched_.push_back(a);
    }
    for (int a : od.arcs[to]) in_s_[a] = 0;
    for (int a : od.arcs[from]) in_p_[a] = 0;
    for (int e : touched_) {
      for (int a : inst_.cost.dependents(e)) t_(a) = arc_time(inst_.cost, a, v_);
    }
  }

  const Instance& inst_;
  const Eigen::MatrixXd& lambda_;
  std::vector<OdPaths> ods_;
  ArcFlow v_;
  Eigen::VectorXd t_;
  std::vector<char> in_s_, in_p_;
  std::vector<double> coef_;
  std::vector<int> touched_;
};

EquilibriumReport finish(const Instance& inst, EquilibriumReport r) {
  r.v = aggregate_to_arcflow(r.x);
  r.Z = total_travel_time(inst.cost, r.v);
  return r;
}

EquilibriumReport run_gradient_projection(const Instance& inst, const LambdaField& lambda, const UepeOptions& opts) {
  GradientProjection gp(inst, lambda.values);
  if (opts.warm_start) {
    gp.start_from(*opts.warm_start);
  } else {
    gp.start_aon();
  }

  EquilibriumReport best;
  best.relative_gap = std::numeric_limits<double>::infinity();
  double beta = 1.0;
  int stall = 0;
  int newton_skip = 1;
  int newton_wait = 0;
  int extra_skip = 1;
  int extra_wait = 0;
  int k = 0;
  for (;; ++k) {
    Eigen::VectorXd mu;
    const double gap = gp.gap(&mu);
    if (gap < best.relative_gap) {
      best.relative_gap = gap;
      best.paths = gp.paths();
      best.mu = mu;
      stall = 0;
    } else if (++stall >= 20) {
      beta = std::max(0.5 * beta, kMinBeta);
      stall = 0;
    }
    if (gap <= opts.tol || k >= opts.max_iters) break;
    const std::vector<OdPaths> prev = gp.state();
    gp.sweep(beta);
    // Both accelerations cost extra gap evaluations; keep them only while they pay off.
    --newton_wait;
    --extra_wait;
    if (newton_wait <= 0 || extra_wait <= 0) {
      double g = gp.gap(nullptr);
      if (extra_wait <= 0) {
        const double before = g;
        g = gp.extrapolate(prev, before);
        extra_skip = g < 0.5 * before ? 1 : std::min(2 * extra_skip, 64);
        extra_wait = extra_skip;
      }
      if (newton_wait <= 0) {
        const double before = g;
        newton_skip = gp.newton_step(before, before) < 0.1 * before ? 1 : std::min(2 * newton_skip, 64);
        newton_wait = newton_skip;
      }
    }
  }
  best.iterations = k;
  best.converged = best.relative_gap <= opts.tol;
  best.x = paths_to_classflow(inst, best.paths);
  return finish(inst, std::move(best));
}

EquilibriumReport run_msa(const Instance& inst, const LambdaField& lambda, const UepeOptions& opts) {
  ClassFlow x = all_or_nothing(inst, arc_times(inst.cost, ArcFlow::Zero(inst.num_arcs())), lambda.values).x;
  EquilibriumReport best;
  best.relative_gap = std::numeric_limits<double>::infinity();
  int k = 1;
  for (;; ++k) {
    const Eigen::VectorXd t = arc_times(inst.cost, aggregate_to_arcflow(x));
    AonResult aon = all_or_nothing(inst, t, lambda.values);
    double num = 0.0;
    double lower = 0.0;
    for (int w = 0; w < inst.num_ods(); ++w) {
      num += lambda.values.row(w).dot(t.transpose().cwiseProduct(x.row(w)));
      lower += inst.demands.entries[w].demand * aon.mu(w);
    }
    const double gap = num > 0.0 ? std::max(0.0, (num - lower) / num) : 0.0;
    if (gap < best.relative_gap) {
      best.relative_gap = gap;
      best.x = x;
      best.mu = aon.mu;
    }
    if (gap <= opts.tol || k > opts.max_iters) break;
    x += (aon.x - x) / static_cast<double>(k + 1);
  }
  best.iterations = k;
  best.converged = best.relative_gap <= opts.tol;
  return finish(inst, std::move(best));
}

}  // namespace

EquilibriumReport solve_uepe(const Instance& inst, const LambdaField& lambda, const UepeOptions& opts) {
  lambda.validate(inst.num_ods(), inst.num_arcs());
  if (opts.method == UepeMethod::Msa) return run_msa(inst, lambda, opts);
  return run_gradient_projection(inst, lambda, opts);
}

EquilibriumReport solve_prue(const Instance& inst, const UepeOptions& opts) {
  return solve_uepe(inst, LambdaField::ones(inst.num_ods(), inst.num_arcs()), opts);
}

KktReport kkt_certificate(const Instance& inst, const LambdaField& lambda, const ClassFlow& x, double tol) {
  KktReport r;
  const Network& net = inst.network;
  const ArcFlow v = aggregate_to_arcflow(x);
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  for (int w = 0; w < inst.num_ods(); ++w) {
    const double q = inst.demands.entries[w].demand;
    const Eigen::VectorXd perceived = lambda.values.row(w).transpose().cwiseProduct(t);
    const ShortestPathTree tree = shortest_paths(net, perceived, inst.origin_index(w));
    const double mu = tree.dist[inst.dest_index(w)];
    for (int a = 0; a < inst.num_arcs(); ++a) {
      const double pi_i = tree.dist[net.tail_index(a)];
      const double pi_j = tree.dist[net.head_index(a)];
      if (pi_i == kUnreachable) {
        if (x(w, a) > 0.0) r.complementarity = std::numeric_limits<double>::infinity();
        continue;
      }
      const double rc = perceived(a) + pi_i - pi_j;
      r.stationarity = std::max(r.stationarity, std::max(0.0, -rc) / std::max(1.0, mu));
      r.complementarity = std::max(r.complementarity, x(w, a) * std::abs(rc) / std::max(1.0, q * mu));
    }
  }
  for (int w = 0; w < inst.num_ods(); ++w) {
    const int o = inst.origin_index(w);
    const int d = inst.dest_index(w);
    const double q = inst.demands.entries[w].demand;
    for (int i = 0; i < net.num_nodes(); ++i) {
      double net_out = 0.0;
      for (int a : net.out_arcs(i)) net_out += x(w, a);
      for (int a : net.in_arcs(i)) net_out -= x(w, a);
      const double expected = i == o ? q : (i == d ? -q : 0.0);
      r.conservation = std::max(r.conservation, std::abs(net_out - expected) / std::max(1.0, q));
    }
  }
  r.passed = r.stationarity <= tol && r.complementarity <= tol && r.conservation <= tol;
  return r;
}

}  // namespace posat
