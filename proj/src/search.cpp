#include "posat/search.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>

#include "posat/analysis.hpp"
#include "posat/instances.hpp"
#include "posat/random.hpp"
#include "posat/shortest_path.hpp"

namespace posat {

int default_threads() {
  if (const char* env = std::getenv("POSAT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

namespace {

struct Candidate {
  LambdaField lambda;
  EquilibriumReport report;
  bool certified = false;
};

Candidate evaluate(const Instance& inst, LambdaField lambda, const PathFlow* warm, const SearchOptions& opts) {
  Candidate c;
  UepeOptions uo;
  uo.tol = opts.solve_tol;
  uo.max_iters = opts.max_iters;
  uo.warm_start = warm && !warm->paths.empty() ? warm : nullptr;
  c.report = solve_uepe(inst, lambda, uo);
  c.lambda = std::move(lambda);
  if (c.report.converged) {
    const KktReport kkt = kkt_certificate(inst, c.lambda, c.report.x, opts.certify_tol);
    c.certified = kkt.passed && verify_msatue(inst, c.report.x, c.lambda.kappa, opts.certify_tol).certified();
  }
  return c;
}

LambdaField random_lambda(const Instance& inst, double kappa, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  LambdaField lambda = LambdaField::lower(inst.num_ods(), inst.num_arcs(), kappa);
  const double lo = lambda.lo();
  for (int w = 0; w < inst.num_ods(); ++w) {
    for (int a = 0; a < inst.num_arcs(); ++a) lambda.values(w, a) = std::clamp(uniform_draw(rng, lo, 1.0), lo, 1.0);
  }
  return lambda;
}

// Corner moves worth solving for: raising lambda on a used arc, or lowering
// it where the lowered perceived cost would undercut the current potentials.
// Any other flip leaves the current flow an equilibrium.
struct Move {
  int w;
  int a;
  double value;
};

std::vector<Move> ascent_moves(const Instance& inst, const Candidate& cur, double tol) {
  const Network& net = inst.network;
  const double lo = cur.lambda.lo();
  const Eigen::VectorXd t = arc_times(inst.cost, cur.report.v);
  std::vector<Move> moves;
  for (int w = 0; w < inst.num_ods(); ++w) {
    const double thr = tol * std::max(1.0, inst.demands.entries[w].demand);
    const Eigen::VectorXd perceived = cur.lambda.values.row(w).transpose().cwiseProduct(t);
    const ShortestPathTree tree = shortest_paths(net, perceived, inst.origin_index(w));
    const double scale = 1e-12 * std::max(1.0, tree.dist[inst.dest_index(w)]);
    for (int a = 0; a < inst.num_arcs(); ++a) {
      const double l = cur.lambda.values(w, a);
      if (l < 1.0 && cur.report.x(w, a) > thr) moves.push_back({w, a, 1.0});
      if (l > lo) {
        const double pi_i = tree.dist[net.tail_index(a)];
        if (pi_i == kUnreachable) continue;
        if (lo * t(a) + pi_i - tree.dist[net.head_index(a)] < -scale) moves.push_back({w, a, lo});
      }
    }
  }
  return moves;
}

}  // namespace

PoSatResult search_worst_posat(const Instance& inst, double kappa, const SearchOptions& opts) {
  if (kappa < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (opts.starts < 1) throw Error(ErrorCode::InvalidArgument, "starts must be >= 1");

  PoSatResult res;
  res.kappa = kappa;
  res.degree = inst.cost.degree();
  res.zeta = zeta_bound(kappa, res.degree);
  res.simple_bound = simple_posat_bound(kappa, res.degree);

  UepeOptions prue_opts;
  prue_opts.tol = opts.solve_tol;
  prue_opts.max_iters = opts.max_iters;
  const EquilibriumReport prue = solve_prue(inst, prue_opts);
  if (!prue.converged) {
    throw Error(ErrorCode::PRUEFailed, "reference equilibrium stopped at relative gap " + std::to_string(prue.relative_gap));
  }
  res.z_prue = prue.Z;
  res.prue_gap = prue.relative_gap;

  // Start list: the all-lower field, the circular pattern, random draws, then caller-supplied starts.
  std::vector<SearchStart> starts;
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < opts.starts; ++i) {
    const std::uint64_t seed = opts.seed + static_cast<std::uint64_t>(i);
    seeds.push_back(seed);
    if (i == 0) {
      starts.push_back({LambdaField::lower(inst.num_ods(), inst.num_arcs(), kappa), {}});
    } else if (i == 1 && inst.circular) {
      starts.push_back({circular_pattern(inst, kappa), circular_clockwise_flow(inst)});
    } else {
      starts.push_back({random_lambda(inst, kappa, seed), {}});
    }
  }
  for (const auto& extra : opts.extra_starts) {
    SearchStart s = extra;
    s.lambda.kappa = kappa;
    starts.push_back(std::move(s));
    seeds.push_back(0);
  }

  std::vector<Candidate> results(starts.size());
  std::vector<std::exception_ptr> errors(starts.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i; (i = next.fetch_add(1)) < starts.size();) {
      try {
        results[i] = evaluate(inst, starts[i].lambda, &starts[i].warm, opts);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(opts.threads, 1, static_cast<int>(starts.size()));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::vector<int> order;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const Candidate& c = results[i];
    res.trace.push_back({static_cast<int>(i), seeds[i], c.report.Z, c.report.converged, c.certified});
    if (c.report.converged) ++res.converged_starts;
    if (c.certified) order.push_back(static_cast<int>(i));
  }
  if (order.empty()) return res;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return results[a].report.Z > results[b].report.Z; });

  // Ascent from each certified start in turn, best first, sharing one budget.
  const long budget = opts.budget >= 0 ? opts.budget : 50L * inst.num_ods() * inst.num_arcs();
  std::optional<Candidate> best;
  for (int start : order) {
    if (best && res.ascent_calls >= budget) break;
    Candidate cur = std::move(results[start]);
    while (res.ascent_calls < budget) {
      const auto moves = ascent_moves(inst, cur, opts.certify_tol);
      std::optional<Candidate> improved;
      for (const Move& mv : moves) {
        if (res.ascent_calls >= budget) break;
        LambdaField lambda = cur.lambda;
        lambda.values(mv.w, mv.a) = mv.value;
        ++res.ascent_calls;
        Candidate c = evaluate(inst, std::move(lambda), &cur.report.paths, opts);
        if (!c.certified) continue;
        const double target = improved ? improved->report.Z : cur.report.Z;
        if (c.report.Z > target * (1.0 + 1e-12)) improved = std::move(c);
      }
      if (!improved) break;
      cur = std::move(*improved);
      ++res.ascent_flips;
    }
    if (!best || cur.report.Z > best->report.Z * (1.0 + 1e-12)) best = std::move(cur);
  }
  Candidate cur = std::move(*best);

  res.ok = true;
  res.z_worst = cur.report.Z;
  res.posat = res.z_worst / res.z_prue;
  res.best_lambda = std::move(cur.lambda);
  res.best_x = std::move(cur.report.x);
  res.best_paths = std::move(cur.report.paths);
  return res;
}

std::vector<PoSatResult> posat_curve(const Instance& inst, const std::vector<double>& kappas, const SearchOptions& opts) {
  for (std::size_t i = 0; i < kappas.size(); ++i) {
    if (kappas[i] < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa grid values must be >= 0");
    if (i > 0 && kappas[i] < kappas[i - 1]) throw Error(ErrorCode::InvalidArgument, "kappa grid must be ascending");
  }
  std::vector<PoSatResult> rows;
  rows.reserve(kappas.size());
  const PoSatResult* prev = nullptr;
  for (double kappa : kappas) {
    SearchOptions o = opts;
    if (prev && prev->ok) {
      const double lo_old = prev->best_lambda.lo();
      const double lo_new = 1.0 / (1.0 + kappa);
      o.extra_starts.push_back({prev->best_lambda, prev->best_paths});
      LambdaField rescaled = prev->best_lambda;
      if (lo_old < 1.0) {
        rescaled.values = (1.0 - (1.0 - prev->best_lambda.values.array()) * (1.0 - lo_new) / (1.0 - lo_old)).matrix();
        rescaled.values = rescaled.values.cwiseMax(lo_new).cwiseMin(1.0);
        o.extra_starts.push_back({rescaled, {}});
      }
    }
    try {
      rows.push_back(search_worst_posat(inst, kappa, o));
    } catch (const Error&) {
      PoSatResult failed;
      failed.kappa = kappa;
      failed.degree = inst.cost.degree();
      failed.zeta = zeta_bound(kappa, failed.degree);
      failed.simple_bound = simple_posat_bound(kappa, failed.degree);
      rows.push_back(failed);
    }
    prev = &rows.back();
  }
  return rows;
}

}  // namespace posat
