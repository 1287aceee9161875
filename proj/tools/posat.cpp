#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "posat/analysis.hpp"
#include "posat/instances.hpp"
#include "posat/io.hpp"
#include "posat/search.hpp"
#include "posat/solvers.hpp"

namespace {

using namespace posat;

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNonconvergence = 2;

// "0,0.1,0.5" or "start:stop:step".
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    double a = 0, b = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream ss(text);
    if (!(ss >> a >> c1 >> b >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "grid must be start:stop:step with step > 0");
    }
    for (int i = 0;; ++i) {
      const double k = std::round((a + i * step) * 1e12) / 1e12;
      if (k > b + 1e-12) break;
      out.push_back(k);
    }
    return out;
  }
  std::istringstream ss(text);
  for (std::string cell; std::getline(ss, cell, ',');) {
    try {
      out.push_back(std::stod(cell));
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "bad grid value '" + cell + "'");
    }
  }
  return out;
}

std::vector<double> kappa_values(const std::optional<double>& kappa, const std::string& grid) {
  if (kappa && !grid.empty()) throw Error(ErrorCode::InvalidArgument, "give --kappa or --kappa-grid, not both");
  if (kappa) return {*kappa};
  if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "--kappa or --kappa-grid is required");
  return parse_grid(grid);
}

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

struct SolveArgs {
  std::string kind;
  std::string instance;
  std::string lambda;
  std::string method = "auto";
  double kappa = 0.0;
  double tol = -1.0;
  int max_iters = 50000;
  std::string out;
};

int run_solve(const SolveArgs& args) {
  const Instance inst = load_instance(args.instance);
  EquilibriumReport r;
  const double tol = args.tol;
  if (args.kind == "ue") {
    const std::string method = args.method == "auto" ? "gp" : args.method;
    if (method == "fw") {
      r = solve_prue_fw(inst, {tol > 0 ? tol : 1e-8, args.max_iters});
    } else if (method == "diag") {
      r = solve_prue_diagonalization(inst, {tol > 0 ? tol : 1e-6, args.max_iters});
    } else if (method == "gp") {
      r = solve_prue(inst, {tol > 0 ? tol : 1e-8, args.max_iters});
    } else {
      throw Error(ErrorCode::InvalidArgument, "ue method must be fw, diag or gp");
    }
  } else if (args.kind == "so") {
    r = solve_so(inst, {tol > 0 ? tol : 1e-8, args.max_iters});
  } else {
    if (args.lambda.empty()) throw Error(ErrorCode::InvalidArgument, "solve uepe needs --lambda");
    const LambdaField lambda = load_lambda(inst, args.lambda, args.kappa);
    UepeOptions uo;
    uo.tol = tol > 0 ? tol : 1e-6;
    uo.max_iters = args.max_iters;
    if (args.method == "msa") {
      uo.method = UepeMethod::Msa;
    } else if (args.method != "auto" && args.method != "gp") {
      throw Error(ErrorCode::InvalidArgument, "uepe method must be gp or msa");
    }
    r = solve_uepe(inst, lambda, uo);
  }
  if (args.out.empty()) {
    std::cout << "Z," << fmt(r.Z) << "\nrelative_gap," << fmt(r.relative_gap) << "\niterations," << r.iterations
              << "\nconverged," << (r.converged ? "true" : "false") << "\n";
    std::cout << arc_flow_csv(inst, r.v);
  } else {
    write_text(args.out + ".json", report_to_json(inst, r).dump(2) + "\n");
    write_text(args.out + "_arcs.csv", arc_flow_csv(inst, r.v));
    save_class_flow(r.x, args.out + "_x.csv");
  }
  if (!r.converged) {
    std::fprintf(stderr, "posat: no convergence, relative gap %s after %d iterations\n", fmt(r.relative_gap).c_str(),
                 r.iterations);
    return kNonconvergence;
  }
  return kOk;
}

struct SearchArgs {
  std::string instance;
  int circular_degree = 0;
  std::optional<double> kappa;
  std::string grid;
  int starts = 16;
  std::uint64_t seed = 0;
  long budget = -1;
  int threads = 0;
  std::string out;
  std::string json_out;
};

int run_search(const SearchArgs& args) {
  const std::vector<double> kappas = kappa_values(args.kappa, args.grid);
  SearchOptions opts;
  opts.starts = args.starts;
  opts.seed = args.seed;
  opts.budget = args.budget;
  opts.threads = args.threads > 0 ? args.threads : default_threads();

  std::vector<PoSatResult> rows;
  if (args.circular_degree > 0) {
    if (!args.instance.empty()) throw Error(ErrorCode::InvalidArgument, "give --instance or --circular-degree, not both");
    for (double kappa : kappas) {
      const CircularInstance circ = gen_circular(kappa, args.circular_degree, RatioConvention::Posat);
      auto one = posat_curve(circ.instance, {kappa}, opts);
      rows.push_back(std::move(one.front()));
    }
  } else {
    if (args.instance.empty()) throw Error(ErrorCode::InvalidArgument, "--instance is required");
    rows = posat_curve(load_instance(args.instance), kappas, opts);
  }
  emit(args.out, posat_table_csv(rows));
  if (!args.json_out.empty()) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) j.push_back(posat_to_json(r));
    write_text(args.json_out, j.dump(2) + "\n");
  }
  for (const auto& r : rows) {
    if (!r.ok) return kNonconvergence;
  }
  return kOk;
}

struct BoundsArgs {
  std::optional<double> kappa;
  std::string grid;
  int degree = -1;
  std::string instance;
  std::string out;
};

int run_bounds(const BoundsArgs& args) {
  const std::vector<double> kappas = kappa_values(args.kappa, args.grid);
  std::optional<Instance> inst;
  if (!args.instance.empty()) inst = load_instance(args.instance);
  const int degree = args.degree >= 0 ? args.degree : (inst ? inst->cost.degree() : -1);
  if (degree < 0) throw Error(ErrorCode::NegativeDegree, "--degree is required (>= 0)");
  std::string out = inst ? "kappa,zeta_bound,simple_bound,deviation_bound\n" : "kappa,zeta_bound,simple_bound\n";
  for (double kappa : kappas) {
    out += fmt(kappa) + "," + fmt(zeta_bound(kappa, degree)) + "," + fmt(simple_posat_bound(kappa, degree));
    if (inst) out += "," + fmt(deviation_ratio_bound(*inst, kappa));
    out += "\n";
  }
  emit(args.out, out);
  return kOk;
}

struct VerifyArgs {
  std::string instance;
  std::string flow;
  std::optional<double> kappa;
  std::optional<double> additive;
  std::string lambda;
  double tol = 1e-6;
};

int run_verify(const VerifyArgs& args) {
  if (args.kappa.has_value() == args.additive.has_value()) {
    throw Error(ErrorCode::InvalidArgument, "give exactly one of --kappa or --epsilon-additive");
  }
  const Instance inst = load_instance(args.instance);
  const ClassFlow x = load_class_flow(inst, args.flow);
  const double residual = conservation_residual(inst, x);
  double scale = 1.0;
  for (const auto& od : inst.demands.entries) scale = std::max(scale, od.demand);
  if (residual > 1e-6 * scale) {
    throw Error(ErrorCode::InvalidArgument, "flow violates conservation (residual " + fmt(residual) + ")");
  }
  bool ok = true;
  if (args.kappa) {
    const SatisficingCertificate c = verify_msatue(inst, x, *args.kappa, args.tol);
    const NecessaryCondition nc = check_necessary_condition(inst, aggregate_to_arcflow(x), *args.kappa, args.tol);
    std::cout << "msatue," << to_string(c.status) << "\nmin_kappa," << fmt(c.threshold) << "\nnecessary_condition,"
              << (nc.holds ? "holds" : "violated") << "\nnecessary_slack," << fmt(nc.slack) << "\n";
    for (std::size_t w = 0; w < c.per_od.size(); ++w) {
      if (c.per_od[w].zero_shortest_path) std::cout << "zero_shortest_path,od " << w << "\n";
    }
    ok = c.certified();
  } else {
    const SatisficingCertificate c = verify_asatue(inst, x, *args.additive, args.tol);
    std::cout << "asatue," << to_string(c.status) << "\nmin_E," << fmt(c.threshold) << "\n";
    ok = c.certified();
  }
  if (!args.lambda.empty()) {
    const LambdaField lambda = load_lambda(inst, args.lambda, args.kappa.value_or(0.0));
    const KktReport k = kkt_certificate(inst, lambda, x, args.tol);
    std::cout << "kkt," << (k.passed ? "pass" : "fail") << "\nkkt_stationarity," << fmt(k.stationarity)
              << "\nkkt_complementarity," << fmt(k.complementarity) << "\nkkt_conservation," << fmt(k.conservation)
              << "\n";
  }
  return ok ? kOk : kNonconvergence;
}

struct GenArgs {
  std::string type;
  double q = 1.0;
  double kappa = 1.0;
  int degree = 4;
  std::string convention = "kappa";
  std::string demands;
  std::string net;
  std::string trips;
  std::string out;
};

int run_gen(const GenArgs& args) {
  Instance inst;
  if (args.type == "example1") {
    inst = gen_example1(args.q);
  } else if (args.type == "example2") {
    inst = gen_example2(args.q);
  } else if (args.type == "circular") {
    if (args.convention != "kappa" && args.convention != "posat") {
      throw Error(ErrorCode::InvalidArgument, "--convention must be kappa or posat");
    }
    inst = gen_circular(args.kappa, args.degree,
                        args.convention == "kappa" ? RatioConvention::Kappa : RatioConvention::Posat)
               .instance;
  } else if (args.type == "nine-node-asym") {
    if (args.demands.empty()) throw Error(ErrorCode::InvalidArgument, "nine-node-asym needs --demands");
    inst = gen_nine_node_asymmetric(load_demands_csv(args.demands));
  } else if (args.type == "tntp") {
    if (args.net.empty() || args.trips.empty()) throw Error(ErrorCode::InvalidArgument, "tntp needs --net and --trips");
    inst = load_tntp(args.net, args.trips);
  } else {
    throw Error(ErrorCode::InvalidArgument, "unknown --type " + args.type);
  }
  emit(args.out, instance_to_json(inst).dump(2) + "\n");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Traffic equilibria and the price of satisficing"};
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Solve ue, so or uepe equilibria");
  solve_cmd->add_option("kind", solve.kind, "ue | so | uepe")->required()->check(CLI::IsMember({"ue", "so", "uepe"}));
  solve_cmd->add_option("--instance", solve.instance, "Instance JSON")->required();
  solve_cmd->add_option("--lambda", solve.lambda, "Lambda CSV od,arc,lambda (uepe)");
  solve_cmd->add_option("--kappa", solve.kappa, "Kappa of the lambda box (uepe)");
  solve_cmd->add_option("--method", solve.method, "fw | diag | gp (ue); gp | msa (uepe)");
  solve_cmd->add_option("--tol", solve.tol, "Relative gap tolerance");
  solve_cmd->add_option("--max-iters", solve.max_iters, "Iteration limit");
  solve_cmd->add_option("--out", solve.out, "Output prefix for report JSON and CSVs");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Worst-case PoSat search");
  search_cmd->add_option("--instance", search.instance, "Instance JSON");
  search_cmd->add_option("--circular-degree", search.circular_degree,
                         "Generate a circular network per kappa with (m/l)^(n+1) = (1+kappa)^5");
  search_cmd->add_option("--kappa", search.kappa, "Single kappa");
  search_cmd->add_option("--kappa-grid", search.grid, "Comma list or start:stop:step");
  search_cmd->add_option("--starts", search.starts, "Multi-start count");
  search_cmd->add_option("--seed", search.seed, "Base seed");
  search_cmd->add_option("--budget", search.budget, "Coordinate-ascent solver calls (-1: 50 |W| |A|)");
  search_cmd->add_option("--threads", search.threads, "Concurrent starts (default POSAT_THREADS or 1)");
  search_cmd->add_option("--out", search.out, "CSV output (default stdout)");
  search_cmd->add_option("--json", search.json_out, "Detailed JSON output");

  BoundsArgs bounds;
  auto* bounds_cmd = app.add_subcommand("bounds", "Analytical PoSat bounds");
  bounds_cmd->add_option("--kappa", bounds.kappa, "Single kappa");
  bounds_cmd->add_option("--kappa-grid", bounds.grid, "Comma list or start:stop:step");
  bounds_cmd->add_option("--degree", bounds.degree, "Polynomial degree n");
  bounds_cmd->add_option("--instance", bounds.instance, "Single-origin instance for the deviation bound");
  bounds_cmd->add_option("--out", bounds.out, "CSV output (default stdout)");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Certify a class flow");
  verify_cmd->add_option("--instance", verify.instance, "Instance JSON")->required();
  verify_cmd->add_option("--flow", verify.flow, "Class flow CSV od,arc,flow")->required();
  verify_cmd->add_option("--kappa", verify.kappa, "Multiplicative threshold");
  verify_cmd->add_option("--epsilon-additive", verify.additive, "Additive threshold E");
  verify_cmd->add_option("--lambda", verify.lambda, "Lambda CSV for KKT residuals");
  verify_cmd->add_option("--tol", verify.tol, "Tolerance");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen", "Generate an instance");
  gen_cmd->add_option("--type", gen.type, "example1 | example2 | circular | nine-node-asym | tntp")->required();
  gen_cmd->add_option("--q", gen.q, "Demand (examples)");
  gen_cmd->add_option("--kappa", gen.kappa, "Kappa (circular)");
  gen_cmd->add_option("--degree", gen.degree, "Degree (circular)");
  gen_cmd->add_option("--convention", gen.convention, "kappa | posat (circular)");
  gen_cmd->add_option("--demands", gen.demands, "Demand CSV origin,dest,q (nine-node-asym)");
  gen_cmd->add_option("--net", gen.net, "TNTP network file (tntp)");
  gen_cmd->add_option("--trips", gen.trips, "TNTP trips file (tntp)");
  gen_cmd->add_option("--out", gen.out, "Output JSON (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (solve_cmd->parsed()) return run_solve(solve);
    if (search_cmd->parsed()) return run_search(search);
    if (bounds_cmd->parsed()) return run_bounds(bounds);
    if (verify_cmd->parsed()) return run_verify(verify);
    if (gen_cmd->parsed()) return run_gen(gen);
  } catch (const Error& e) {
    std::fprintf(stderr, "posat: %s\n", e.what());
    return e.code() == ErrorCode::PRUEFailed ? kNonconvergence : kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "posat: %s\n", e.what());
    return kInputError;
  }
  return kInputError;
}
