#include "posat/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace posat {

using nlohmann::json;

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

json instance_to_json(const Instance& inst) {
  json j;
  j["name"] = inst.name;
  j["nodes"] = inst.network.nodes();
  json arcs = json::array();
  for (const Arc& a : inst.network.arcs()) arcs.push_back({{"id", a.id}, {"tail", a.tail}, {"head", a.head}});
  j["arcs"] = std::move(arcs);
  json demands = json::array();
  for (const OdPair& od : inst.demands.entries) demands.push_back({{"origin", od.origin}, {"dest", od.dest}, {"q", od.demand}});
  j["demands"] = std::move(demands);
  json cost_arcs = json::array();
  for (int a = 0; a < inst.num_arcs(); ++a) {
    json terms = json::array();
    for (const CostTerm& t : inst.cost.terms(a)) {
      json term{{"m", t.power}, {"b", t.coeff}};
      const bool unit = t.weights.size() == 1 && t.weights[0].first == a && t.weights[0].second == 1.0;
      if (!unit) {
        json d = json::array();
        for (const auto& [e, w] : t.weights) d.push_back({{"arc", e}, {"w", w}});
        term["d"] = std::move(d);
      }
      terms.push_back(std::move(term));
    }
    cost_arcs.push_back({{"terms", std::move(terms)}});
  }
  j["costs"] = {{"degree", inst.cost.degree()}, {"arcs", std::move(cost_arcs)}};
  if (inst.circular) j["circular"] = {{"m", inst.circular->m}, {"l", inst.circular->l}};
  return j;
}

Instance instance_from_json(const json& j) {
  try {
    Instance inst;
    inst.name = j.value("name", std::string{});
    std::vector<int> nodes = j.at("nodes").get<std::vector<int>>();
    std::vector<Arc> arcs;
    for (const auto& a : j.at("arcs")) arcs.push_back({a.at("id").get<int>(), a.at("tail").get<int>(), a.at("head").get<int>()});
    std::sort(arcs.begin(), arcs.end(), [](const Arc& x, const Arc& y) { return x.id < y.id; });
    inst.network = Network(std::move(nodes), std::move(arcs));
    for (const auto& d : j.at("demands")) {
      inst.demands.entries.push_back({d.at("origin").get<int>(), d.at("dest").get<int>(), d.at("q").get<double>()});
    }
    const json& costs = j.at("costs");
    const int degree = costs.value("degree", 0);
    std::vector<std::vector<CostTerm>> terms;
    for (const auto& arc : costs.at("arcs")) {
      std::vector<CostTerm> arc_terms;
      for (const auto& t : arc.at("terms")) {
        CostTerm term{t.at("m").get<int>(), t.at("b").get<double>(), {}};
        if (t.contains("d")) {
          for (const auto& d : t.at("d")) term.weights.emplace_back(d.at("arc").get<int>(), d.at("w").get<double>());
        }
        arc_terms.push_back(std::move(term));
      }
      terms.push_back(std::move(arc_terms));
    }
    inst.cost = PolynomialCost(std::move(terms), degree);
    if (j.contains("circular")) {
      inst.circular = CircularLayout{j["circular"].at("m").get<int>(), j["circular"].at("l").get<int>()};
    }
    inst.validate();
    return inst;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("instance JSON: ") + e.what());
  }
}

Instance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return instance_from_json(j);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path);
  out << text;
}

void save_instance(const Instance& inst, const std::string& path) { write_text(path, instance_to_json(inst).dump(2) + "\n"); }

namespace {

// Rows of a long-format CSV with a header line; each row must have `width` numeric cells.
std::vector<std::vector<double>> read_long_csv(const std::string& path, std::size_t width) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line_no == 1 && line.find_first_of("abcdefghijklmnopqrstuvwxyz") != std::string::npos) continue;
    std::stringstream ss(line);
    std::vector<double> row;
    for (std::string cell; std::getline(ss, cell, ',');) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (cell.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != width) {
      throw Error(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": expected " +
                                             std::to_string(width) + " columns");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void check_index(const Instance& inst, double w, double a, const std::string& path) {
  if (w < 0 || w >= inst.num_ods() || a < 0 || a >= inst.num_arcs() || w != static_cast<int>(w) ||
      a != static_cast<int>(a)) {
    throw Error(ErrorCode::ParseError, path + ": od/arc index out of range");
  }
}

}  // namespace

void save_class_flow(const ClassFlow& x, const std::string& path) {
  std::string out = "od,arc,flow\n";
  for (Eigen::Index w = 0; w < x.rows(); ++w) {
    for (Eigen::Index a = 0; a < x.cols(); ++a) {
      if (x(w, a) != 0.0) out += std::to_string(w) + "," + std::to_string(a) + "," + fmt(x(w, a)) + "\n";
    }
  }
  write_text(path, out);
}

ClassFlow load_class_flow(const Instance& inst, const std::string& path) {
  ClassFlow x = ClassFlow::Zero(inst.num_ods(), inst.num_arcs());
  for (const auto& row : read_long_csv(path, 3)) {
    check_index(inst, row[0], row[1], path);
    if (row[2] < 0.0) throw Error(ErrorCode::InvalidArgument, path + ": negative flow");
    x(static_cast<int>(row[0]), static_cast<int>(row[1])) = row[2];
  }
  return x;
}

LambdaField load_lambda(const Instance& inst, const std::string& path, double kappa) {
  LambdaField lambda = LambdaField::ones(inst.num_ods(), inst.num_arcs());
  lambda.kappa = kappa;
  for (const auto& row : read_long_csv(path, 3)) {
    check_index(inst, row[0], row[1], path);
    lambda.values(static_cast<int>(row[0]), static_cast<int>(row[1])) = row[2];
  }
  lambda.validate(inst.num_ods(), inst.num_arcs(), 1e-9);
  return lambda;
}

void save_lambda(const LambdaField& lambda, const std::string& path) {
  std::string out = "od,arc,lambda\n";
  for (Eigen::Index w = 0; w < lambda.values.rows(); ++w) {
    for (Eigen::Index a = 0; a < lambda.values.cols(); ++a) {
      out += std::to_string(w) + "," + std::to_string(a) + "," + fmt(lambda.values(w, a)) + "\n";
    }
  }
  write_text(path, out);
}

json report_to_json(const Instance& inst, const EquilibriumReport& r) {
  json j;
  j["Z"] = r.Z;
  j["relative_gap"] = r.relative_gap;
  j["iterations"] = r.iterations;
  j["converged"] = r.converged;
  j["mu"] = std::vector<double>(r.mu.data(), r.mu.data() + r.mu.size());
  j["v"] = std::vector<double>(r.v.data(), r.v.data() + r.v.size());
  json x = json::array();
  for (int w = 0; w < inst.num_ods(); ++w) {
    for (int a = 0; a < inst.num_arcs(); ++a) {
      if (r.x(w, a) != 0.0) x.push_back({{"od", w}, {"arc", a}, {"flow", r.x(w, a)}});
    }
  }
  j["x"] = std::move(x);
  return j;
}

std::string arc_flow_csv(const Instance& inst, const ArcFlow& v) {
  const Eigen::VectorXd t = arc_times(inst.cost, v);
  std::string out = "arc,tail,head,flow,time\n";
  for (int a = 0; a < inst.num_arcs(); ++a) {
    const Arc& arc = inst.network.arc(a);
    out += std::to_string(a) + "," + std::to_string(arc.tail) + "," + std::to_string(arc.head) + "," + fmt(v(a)) + "," +
           fmt(t(a)) + "\n";
  }
  return out;
}

json posat_to_json(const PoSatResult& r) {
  json j;
  j["kappa"] = r.kappa;
  j["ok"] = r.ok;
  j["degree"] = r.degree;
  j["z_prue"] = r.z_prue;
  j["prue_relative_gap"] = r.prue_gap;
  j["z_worst"] = r.z_worst;
  j["posat"] = r.posat;
  j["zeta_bound"] = r.zeta;
  j["simple_bound"] = r.simple_bound;
  j["converged_starts"] = r.converged_starts;
  j["ascent_calls"] = r.ascent_calls;
  j["ascent_flips"] = r.ascent_flips;
  json trace = json::array();
  for (const auto& s : r.trace) {
    trace.push_back({{"start", s.index}, {"seed", s.seed}, {"Z", s.Z}, {"converged", s.converged}, {"certified", s.certified}});
  }
  j["starts"] = std::move(trace);
  return j;
}

std::string posat_table_csv(const std::vector<PoSatResult>& rows) {
  std::string out = "kappa,z_prue,z_worst,posat,zeta_bound,simple_bound,converged_starts\n";
  for (const auto& r : rows) {
    out += fmt(r.kappa) + ",";
    if (r.ok) {
      out += fmt(r.z_prue) + "," + fmt(r.z_worst) + "," + fmt(r.posat) + ",";
    } else {
      out += ",,,";
    }
    out += fmt(r.zeta) + "," + fmt(r.simple_bound) + "," + std::to_string(r.converged_starts) + "\n";
  }
  return out;
}

}  // namespace posat
