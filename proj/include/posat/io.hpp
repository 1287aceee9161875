#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "posat/analysis.hpp"
#include "posat/network.hpp"
#include "posat/search.hpp"
#include "posat/solvers.hpp"

namespace posat {

/// 12 significant digits.
std::string fmt(double x);

nlohmann::json instance_to_json(const Instance& inst);
/// Throws ParseError on schema violations and the data-model errors on invalid content.
Instance instance_from_json(const nlohmann::json& j);

Instance load_instance(const std::string& path);
void save_instance(const Instance& inst, const std::string& path);

/// Long-format CSV od,arc,flow (rows with zero flow omitted).
void save_class_flow(const ClassFlow& x, const std::string& path);
ClassFlow load_class_flow(const Instance& inst, const std::string& path);

/// Long-format CSV od,arc,lambda; missing entries are 1.
LambdaField load_lambda(const Instance& inst, const std::string& path, double kappa);
void save_lambda(const LambdaField& lambda, const std::string& path);

nlohmann::json report_to_json(const Instance& inst, const EquilibriumReport& r);
/// arc,tail,head,flow,time
std::string arc_flow_csv(const Instance& inst, const ArcFlow& v);

nlohmann::json posat_to_json(const PoSatResult& r);
/// kappa,z_prue,z_worst,posat,zeta_bound,simple_bound,converged_starts
std::string posat_table_csv(const std::vector<PoSatResult>& rows);

void write_text(const std::string& path, const std::string& text);

}  // namespace posat
