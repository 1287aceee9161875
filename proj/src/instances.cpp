#include "posat/instances.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>
#include <string>

namespace posat {

namespace {

void require_positive(double Q) {
  if (!(Q > 0.0) || !std::isfinite(Q)) throw Error(ErrorCode::NonpositiveDemand, "Q must be finite and > 0");
}

Instance two_arc(const std::string& name, double Q, std::vector<std::vector<double>> coeffs) {
  Instance inst;
  inst.name = name;
  inst.network = Network({1, 2}, {{0, 1, 2}, {1, 1, 2}});
  inst.demands.entries = {{1, 2, Q}};
  inst.cost = PolynomialCost::separable(coeffs);
  inst.validate();
  return inst;
}

}  // namespace

Instance gen_example1(double Q) {
  require_positive(Q);
  return two_arc("example1", Q, {{1.0}, {1.0, 1.0}});
}

Instance gen_example2(double Q) {
  require_positive(Q);
  return two_arc("example2", Q, {{0.0, 1.0}, {0.0, 1.0}});
}

CircularInstance gen_circular(double kappa_target, int n, RatioConvention convention) {
  if (kappa_target < 0.0) throw Error(ErrorCode::NegativeKappa, "kappa must be >= 0");
  if (n < 1) throw Error(ErrorCode::NegativeDegree, "circular network needs degree >= 1");
  const double ratio = convention == RatioConvention::Kappa ? 1.0 + kappa_target
                                                            : std::pow(1.0 + kappa_target, 5.0 / (n + 1));
  int m = 0, l = 0;
  for (int cand = 1; cand <= 1000; ++cand) {
    const double mm = std::round(ratio * cand);
    if (std::abs(mm / cand - ratio) <= 1e-9 * ratio) {
      m = static_cast<int>(mm);
      l = cand;
      break;
    }
  }
  if (l == 0) {
    throw Error(ErrorCode::NoIntegerRatio, "no integers m/l with l <= 1000 match ratio " + std::to_string(ratio));
  }

  const int size = m + l;
  std::vector<int> nodes(size);
  std::vector<Arc> arcs;
  std::vector<std::vector<CostTerm>> terms(2 * size);
  for (int i = 0; i < size; ++i) {
    nodes[i] = i;
    const int j = (i + 1) % size;
    arcs.push_back({2 * i, i, j});
    arcs.push_back({2 * i + 1, j, i});
    const CostTerm shared{n, 1.0, {{2 * i, 1.0}, {2 * i + 1, 1.0}}};
    terms[2 * i] = {shared};
    terms[2 * i + 1] = {shared};
  }
  CircularInstance out;
  out.instance.name = "circular";
  out.instance.network = Network(nodes, arcs);
  for (int i = 0; i < size; ++i) out.instance.demands.entries.push_back({i, (i + m) % size, 1.0});
  out.instance.cost = PolynomialCost(terms, n);
  out.instance.circular = CircularLayout{m, l};
  out.instance.validate();
  out.m = m;
  out.l = l;
  out.kappa_exact = static_cast<double>(m) / l - 1.0;
  out.target_posat = ipow(static_cast<double>(m) / l, n + 1);
  return out;
}

namespace {

const CircularLayout& layout_of(const Instance& inst) {
  if (!inst.circular) throw Error(ErrorCode::InvalidArgument, "instance is not a circular network");
  return *inst.circular;
}

std::vector<int> clockwise_arcs(const Instance& inst, int w) {
  const CircularLayout& c = layout_of(inst);
  const int size = c.m + c.l;
  const int origin = inst.origin_index(w);
  std::vector<int> path;
  for (int k = 0; k < c.m; ++k) path.push_back(2 * ((origin + k) % size));
  return path;
}

}  // namespace

PathFlow circular_clockwise_flow(const Instance& inst) {
  PathFlow f;
  for (int w = 0; w < inst.num_ods(); ++w) f.paths.push_back({w, clockwise_arcs(inst, w), inst.demands.entries[w].demand});
  return f;
}

PathFlow circular_counterclockwise_flow(const Instance& inst) {
  const CircularLayout& c = layout_of(inst);
  const int size = c.m + c.l;
  PathFlow f;
  for (int w = 0; w < inst.num_ods(); ++w) {
    const int origin = inst.origin_index(w);
    std::vector<int> path;
    for (int k = 1; k <= c.l; ++k) path.push_back(2 * ((origin - k + size) % size) + 1);
    f.paths.push_back({w, std::move(path), inst.demands.entries[w].demand});
  }
  return f;
}

LambdaField circular_pattern(const Instance& inst, double kappa) {
  LambdaField lambda = LambdaField::ones(inst.num_ods(), inst.num_arcs());
  lambda.kappa = kappa;
  for (int w = 0; w < inst.num_ods(); ++w) {
    for (int a : clockwise_arcs(inst, w)) lambda.values(w, a) = lambda.lo();
  }
  return lambda;
}

const std::vector<NineNodeRow>& nine_node_table() {
  static const std::vector<NineNodeRow> rows = {
      {1, 5, 12, 1.80, 5}, {1, 6, 18, 2.70, 6}, {2, 5, 35, 5.25, 3}, {2, 6, 35, 5.25, 9},
      {5, 6, 20, 3.00, 9}, {5, 7, 11, 1.65, 2}, {5, 9, 26, 3.90, 8}, {6, 8, 33, 4.95, 6},
      {6, 9, 30, 4.50, 8}, {7, 3, 25, 3.75, 3}, {7, 4, 24, 3.60, 6}, {7, 8, 19, 2.85, 2},
      {8, 3, 39, 5.85, 8}, {8, 4, 43, 6.45, 6}, {9, 7, 26, 3.90, 4}, {9, 8, 30, 4.50, 8},
      {5, 1, 12, 1.80, 5}, {6, 1, 18, 2.70, 6}, {5, 2, 35, 5.25, 3}, {6, 2, 35, 5.25, 9},
      {6, 5, 20, 3.00, 9}, {7, 5, 11, 1.65, 2}, {9, 5, 26, 3.90, 8}, {8, 6, 33, 4.95, 6},
      {9, 6, 30, 4.50, 8}, {3, 7, 25, 3.75, 3}, {4, 7, 24, 3.60, 6}, {8, 7, 19, 2.85, 2},
      {3, 8, 39, 5.85, 8}, {4, 8, 43, 6.45, 6}, {7, 9, 26, 3.90, 4}, {8, 9, 30, 4.50, 8},
  };
  return rows;
}

Instance gen_nine_node_separable(const DemandTable& demands) {
  const auto& rows = nine_node_table();
  std::vector<Arc> arcs;
  std::vector<std::vector<double>> coeffs;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto& r = rows[a];
    arcs.push_back({static_cast<int>(a), r.tail, r.head});
    coeffs.push_back({r.A, 0.0, 0.0, 0.0, r.B / ipow(r.C, 4)});
  }
  Instance inst;
  inst.name = "nine-node";
  inst.network = Network({1, 2, 3, 4, 5, 6, 7, 8, 9}, arcs);
  inst.demands = demands;
  inst.cost = PolynomialCost::separable(coeffs);
  inst.validate();
  return inst;
}

Instance gen_nine_node_asymmetric(const DemandTable& demands) {
  Instance inst = make_asymmetric_variant(gen_nine_node_separable(demands), 0.5).instance;
  inst.name = "nine-node-asym";
  return inst;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cell.erase(0, cell.find_first_not_of(" \t\r"));
    cell.erase(cell.find_last_not_of(" \t\r") + 1);
    out.push_back(cell);
  }
  return out;
}

double parse_number(const std::string& s, int line_no) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

int parse_int(const std::string& s, int line_no) {
  const double v = parse_number(s, line_no);
  if (v != std::floor(v)) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected integer");
  return static_cast<int>(v);
}

}  // namespace

DemandTable load_demands_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
  DemandTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw Error(ErrorCode::ParseError, path + " line " + std::to_string(line_no) + ": expected origin,dest,q");
    if (cells[0] == "origin") continue;
    table.entries.push_back({parse_int(cells[0], line_no), parse_int(cells[1], line_no), parse_number(cells[2], line_no)});
  }
  return table;
}

namespace {

const std::regex kTag(R"(^\s*<([^>]+)>\s*(.*)$)");

// Reads the metadata block; returns tag -> value and leaves the stream after <END OF METADATA>.
std::map<std::string, std::string> read_metadata(std::istream& in, int& line_no, const std::string& path) {
  std::map<std::string, std::string> tags;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    std::smatch m;
    if (std::regex_match(line, m, kTag)) {
      std::string value = m[2];
      value.erase(value.find_last_not_of(" \t\r") + 1);
      if (m[1] == "END OF METADATA") return tags;
      tags[m[1]] = value;
    }
  }
  throw Error(ErrorCode::ParseError, path + ": missing <END OF METADATA>");
}

int tag_int(const std::map<std::string, std::string>& tags, const std::string& key, const std::string& path) {
  auto it = tags.find(key);
  if (it == tags.end()) throw Error(ErrorCode::ParseError, path + ": missing <" + key + ">");
  return parse_int(it->second, 0);
}

}  // namespace

Instance load_tntp(const std::string& net_path, const std::string& trips_path, TntpMetadata* meta) {
  TntpMetadata md;
  std::ifstream net_in(net_path);
  if (!net_in) throw Error(ErrorCode::ParseError, "cannot open " + net_path);
  int line_no = 0;
  const auto tags = read_metadata(net_in, line_no, net_path);
  md.nodes = tag_int(tags, "NUMBER OF NODES", net_path);
  md.links = tag_int(tags, "NUMBER OF LINKS", net_path);
  if (tags.count("NUMBER OF ZONES")) md.zones = tag_int(tags, "NUMBER OF ZONES", net_path);
  if (tags.count("FIRST THRU NODE")) md.first_thru_node = tag_int(tags, "FIRST THRU NODE", net_path);

  std::vector<Arc> arcs;
  std::vector<std::vector<double>> coeffs;
  std::string line;
  while (std::getline(net_in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '~') continue;
    const auto semi = line.find(';');
    if (semi == std::string::npos) {
      throw Error(ErrorCode::ParseError, net_path + " line " + std::to_string(line_no) + ": row not terminated by ';'");
    }
    std::stringstream ss(line.substr(0, semi));
    std::vector<std::string> f;
    for (std::string tok; ss >> tok;) f.push_back(tok);
    if (f.size() < 7) {
      throw Error(ErrorCode::ParseError, net_path + " line " + std::to_string(line_no) + ": expected at least 7 fields");
    }
    const int tail = parse_int(f[0], line_no);
    const int head = parse_int(f[1], line_no);
    const double cap = parse_number(f[2], line_no);
    const double fft = parse_number(f[4], line_no);
    const double B = parse_number(f[5], line_no);
    const double power = parse_number(f[6], line_no);
    if (power < 0.0 || power != std::floor(power)) {
      throw Error(ErrorCode::UnsupportedPower, net_path + " line " + std::to_string(line_no) + ": power " + f[6]);
    }
    if (!(cap > 0.0) || fft < 0.0 || B < 0.0) {
      throw Error(ErrorCode::ParseError, net_path + " line " + std::to_string(line_no) + ": invalid capacity/time/B");
    }
    const int p = static_cast<int>(power);
    std::vector<double> c(p + 1, 0.0);
    c[0] += fft;
    c[p] += fft * B / std::pow(cap, p);
    arcs.push_back({static_cast<int>(arcs.size()), tail, head});
    coeffs.push_back(std::move(c));
  }
  if (static_cast<int>(arcs.size()) != md.links) {
    throw Error(ErrorCode::ParseError, net_path + ": header declares " + std::to_string(md.links) + " links, found " +
                                           std::to_string(arcs.size()));
  }
  std::vector<int> nodes(md.nodes);
  for (int i = 0; i < md.nodes; ++i) nodes[i] = i + 1;

  std::ifstream trips_in(trips_path);
  if (!trips_in) throw Error(ErrorCode::ParseError, "cannot open " + trips_path);
  line_no = 0;
  const auto trip_tags = read_metadata(trips_in, line_no, trips_path);
  if (trip_tags.count("TOTAL OD FLOW")) md.total_od_flow = parse_number(trip_tags.at("TOTAL OD FLOW"), line_no);

  DemandTable demands;
  const std::regex origin_re(R"(^\s*Origin\s+(\d+)\s*$)");
  const std::regex entry_re(R"((\d+)\s*:\s*([-+0-9.eE]+)\s*;)");
  int origin = -1;
  while (std::getline(trips_in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '~') continue;
    std::smatch m;
    if (std::regex_match(line, m, origin_re)) {
      origin = std::stoi(m[1]);
      continue;
    }
    if (origin < 0) throw Error(ErrorCode::ParseError, trips_path + " line " + std::to_string(line_no) + ": entry before Origin");
    std::size_t matched = 0;
    for (auto it = std::sregex_iterator(line.begin(), line.end(), entry_re); it != std::sregex_iterator(); ++it) {
      const int dest = std::stoi((*it)[1]);
      const double q = parse_number((*it)[2], line_no);
      ++md.listed_od_entries;
      matched += it->length();
      if (q > 0.0 && dest != origin) demands.entries.push_back({origin, dest, q});
    }
    if (matched == 0) {
      throw Error(ErrorCode::ParseError, trips_path + " line " + std::to_string(line_no) + ": expected 'dest : flow;'");
    }
  }
  md.od_pairs = demands.size();

  Instance inst;
  inst.name = "tntp";
  inst.network = Network(nodes, arcs);
  inst.demands = std::move(demands);
  inst.cost = PolynomialCost::separable(coeffs);
  inst.validate();
  if (meta) *meta = md;
  return inst;
}

AsymmetricVariant make_asymmetric_variant(const Instance& inst, double omega) {
  if (!(omega >= 0.0)) throw Error(ErrorCode::InvalidArgument, "omega must be >= 0");
  AsymmetricVariant out;
  std::vector<std::vector<CostTerm>> terms = inst.cost.all_terms();
  for (int a = 0; a < inst.num_arcs(); ++a) {
    const auto rev = inst.network.reverse_arc(a);
    if (!rev) {
      out.unpaired_arcs.push_back(a);
      continue;
    }
    if (omega == 0.0) continue;
    for (auto& term : terms[a]) {
      if (term.power == 0) continue;
      term.weights.push_back({*rev, omega});
    }
  }
  out.instance = inst;
  out.instance.cost = PolynomialCost(std::move(terms), inst.cost.degree());
  out.instance.validate();
  return out;
}

}  // namespace posat
