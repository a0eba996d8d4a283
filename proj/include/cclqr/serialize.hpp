#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cclqr/dmp.hpp"
#include "cclqr/lti.hpp"
#include "cclqr/model_reduction.hpp"
#include "cclqr/riccati.hpp"
#include "cclqr/sector_bounds.hpp"
#include "cclqr/simulation.hpp"

namespace cclqr {

// 17-significant-digit text form; the CSV contract prints numbers this way so
// reruns are comparable at the text level.
std::string fmt17(double value);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M); // array of rows
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

// Matrix CSV: the literal header "rows,cols", the dimensions, then the data
// row-major.
std::string matrix_to_csv(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

nlohmann::json to_json(const PoleSpec& spec);
PoleSpec pole_spec_from_json(const nlohmann::json& j);

// System files carry the matrices, the generation spec and the fingerprint.
nlohmann::json to_json(const LtiSystem& sys);
LtiSystem system_from_json(const nlohmann::json& j);

FitForm fit_form_from_name(const std::string& name);

nlohmann::json to_json(const riccati::RiccatiSolution& sol);
nlohmann::json to_json(const ReducedModel& rm);
nlohmann::json to_json(const SectorBoundFit& fit);
SectorBoundFit fit_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DmpSolution& sol);
nlohmann::json to_json(const SuboptStats& stats);
nlohmann::json to_json(const DissConstants& consts);

// Result CSV streams. Each begins with a comment line
//   # cclqr <stream> v1 fingerprint=<hex>
// followed by the pinned header row.
std::string samples_to_csv(const std::vector<SectorSample>& samples,
                           const std::string& fingerprint);
std::string curve_to_csv(const DmpSolution& sol, double rho, const std::string& fingerprint);
std::string rho_sweep_to_csv(const std::vector<RhoTauCell>& cells, int model_index,
                             const std::string& fingerprint);
std::string budget_sweep_to_csv(const std::vector<BudgetRegion>& regions, int model_index,
                                const std::string& fingerprint);
std::string trajectory_to_csv(const Trajectory& traj, const std::string& fingerprint);
std::string gaps_to_csv(const SuboptStats& stats, const std::string& fingerprint);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

} // namespace cclqr
