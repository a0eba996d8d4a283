#include "cclqr/serialize.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cclqr/system_gen.hpp"

namespace cclqr {

std::string fmt17(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return std::string(buf);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            row.push_back(M(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw std::invalid_argument("matrix_from_json: expected an array of rows");
    }
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(j[i].size()) != cols) {
            throw std::invalid_argument("matrix_from_json: ragged rows");
        }
        for (Eigen::Index k = 0; k < cols; ++k) {
            M(i, k) = j[i][k].get<double>();
        }
    }
    return M;
}

std::string matrix_to_csv(const Eigen::MatrixXd& M) {
    std::string out = "rows,cols\n";
    out += std::to_string(M.rows()) + "," + std::to_string(M.cols()) + "\n";
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) {
            out += fmt17(M(i, j));
            out += (j + 1 < M.cols()) ? "," : "\n";
        }
    }
    return out;
}

Eigen::MatrixXd matrix_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "rows,cols") {
        throw std::invalid_argument("matrix_from_csv: missing 'rows,cols' header");
    }
    if (!std::getline(in, line)) {
        throw std::invalid_argument("matrix_from_csv: missing dimension row");
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
        throw std::invalid_argument("matrix_from_csv: malformed dimension row");
    }
    const Eigen::Index rows = std::stol(line.substr(0, comma));
    const Eigen::Index cols = std::stol(line.substr(comma + 1));
    if (rows < 1 || cols < 1) {
        throw std::invalid_argument("matrix_from_csv: dimensions must be >= 1");
    }
    Eigen::MatrixXd M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (!std::getline(in, line)) {
            throw std::invalid_argument("matrix_from_csv: truncated data");
        }
        std::istringstream row(line);
        std::string cell;
        for (Eigen::Index j = 0; j < cols; ++j) {
            if (!std::getline(row, cell, ',')) {
                throw std::invalid_argument("matrix_from_csv: short row");
            }
            M(i, j) = std::stod(cell);
        }
    }
    return M;
}

nlohmann::json to_json(const PoleSpec& spec) {
    return nlohmann::json{{"unstable", spec.unstable},
                          {"slow_stable", spec.slow_stable},
                          {"fast_bound", spec.fast_bound},
                          {"coupling", spec.coupling}};
}

PoleSpec pole_spec_from_json(const nlohmann::json& j) {
    PoleSpec spec;
    spec.unstable = j.at("unstable").get<std::vector<double>>();
    spec.slow_stable = j.at("slow_stable").get<std::vector<double>>();
    spec.fast_bound = j.at("fast_bound").get<double>();
    spec.coupling = j.value("coupling", 1.0);
    return spec;
}

nlohmann::json to_json(const LtiSystem& sys) {
    return nlohmann::json{{"nx", sys.nx()},
                          {"nu", sys.nu()},
                          {"seed", sys.seed},
                          {"poles", to_json(sys.poles)},
                          {"A", matrix_to_json(sys.A)},
                          {"B", matrix_to_json(sys.B)},
                          {"fingerprint", fingerprint_hex(system_fingerprint(sys))}};
}

LtiSystem system_from_json(const nlohmann::json& j) {
    LtiSystem sys;
    sys.A = matrix_from_json(j.at("A"));
    sys.B = matrix_from_json(j.at("B"));
    sys.seed = j.at("seed").get<std::uint64_t>();
    sys.poles = pole_spec_from_json(j.at("poles"));
    if (sys.A.rows() != sys.A.cols() || sys.B.rows() != sys.A.rows()) {
        throw std::invalid_argument("system_from_json: inconsistent matrix dimensions");
    }
    if (j.contains("fingerprint")) {
        const std::string stored = j.at("fingerprint").get<std::string>();
        const std::string actual = fingerprint_hex(system_fingerprint(sys));
        if (stored != actual) {
            throw std::invalid_argument("system_from_json: fingerprint mismatch (stored " +
                                        stored + ", recomputed " + actual + ")");
        }
    }
    return sys;
}

nlohmann::json to_json(const riccati::RiccatiSolution& sol) {
    return nlohmann::json{{"P", matrix_to_json(sol.P)},
                          {"K", matrix_to_json(sol.K)},
                          {"residual", sol.residual},
                          {"iterations", sol.iterations}};
}

nlohmann::json to_json(const ReducedModel& rm) {
    nlohmann::json j{{"index", rm.index},
                     {"order", rm.order},
                     {"U", matrix_to_json(rm.U)},
                     {"V", matrix_to_json(rm.V)},
                     {"A_r", matrix_to_json(rm.A_r)},
                     {"B_r", matrix_to_json(rm.B_r)},
                     {"Q_r", matrix_to_json(rm.Q_r)},
                     {"alpha", rm.alpha},
                     {"sector_gain", rm.sector_gain}};
    if (rm.P_r.size() > 0) {
        j["P_r"] = matrix_to_json(rm.P_r);
        j["K_r"] = matrix_to_json(rm.K_r);
    }
    return j;
}

namespace {

const char* form_name(FitForm form) {
    switch (form) {
    case FitForm::linear:
        return "linear";
    case FitForm::quadratic:
        return "quadratic";
    case FitForm::fitted_alpha:
        return "fitted_alpha";
    }
    return "linear";
}

const char* kind_name(TrajectoryKind kind) {
    return kind == TrajectoryKind::baseline ? "baseline" : "deployed";
}

} // namespace

FitForm fit_form_from_name(const std::string& name) {
    if (name == "linear") {
        return FitForm::linear;
    }
    if (name == "quadratic") {
        return FitForm::quadratic;
    }
    if (name == "fitted_alpha") {
        return FitForm::fitted_alpha;
    }
    throw std::invalid_argument("unknown fit form '" + name + "'");
}

nlohmann::json to_json(const SectorBoundFit& fit) {
    return nlohmann::json{{"C1", fit.C1},
                          {"C1q", fit.C1q},
                          {"C2", fit.C2},
                          {"C3", fit.C3},
                          {"alpha_used", fit.alpha_used},
                          {"L_M", fit.L_M},
                          {"form", form_name(fit.form)},
                          {"trajectory_kind", kind_name(fit.kind)},
                          {"clamped", fit.clamped},
                          {"rms_residual", fit.rms_residual},
                          {"relative_rms_residual", fit.relative_rms_residual}};
}

SectorBoundFit fit_from_json(const nlohmann::json& j) {
    SectorBoundFit fit;
    fit.C1 = j.at("C1").get<double>();
    fit.C1q = j.value("C1q", 0.0);
    fit.C2 = j.at("C2").get<double>();
    fit.C3 = j.at("C3").get<double>();
    fit.alpha_used = j.at("alpha_used").get<double>();
    fit.L_M = j.at("L_M").get<double>();
    fit.form = fit_form_from_name(j.value("form", "linear"));
    fit.kind = j.value("trajectory_kind", "baseline") == std::string("deployed")
                   ? TrajectoryKind::deployed
                   : TrajectoryKind::baseline;
    fit.clamped = j.value("clamped", false);
    fit.rms_residual = j.value("rms_residual", 0.0);
    fit.relative_rms_residual = j.value("relative_rms_residual", 0.0);
    return fit;
}

nlohmann::json to_json(const DmpSolution& sol) {
    nlohmann::json j{{"model_index", sol.model_index},
                     {"order", sol.order},
                     {"infeasible", sol.infeasible},
                     {"feasible_taus", sol.feasible_taus}};
    if (!sol.infeasible) {
        j["tau_opt"] = sol.tau_opt;
        j["T_opt"] = sol.T_opt;
        j["objective"] = sol.objective;
    }
    return j;
}

nlohmann::json to_json(const SuboptStats& stats) {
    return nlohmann::json{{"runs", stats.runs},
                          {"seed", stats.seed},
                          {"q1", stats.q1},
                          {"median", stats.median},
                          {"q3", stats.q3},
                          {"outliers", stats.outliers},
                          {"diverged_runs", stats.diverged_runs}};
}

nlohmann::json to_json(const DissConstants& consts) {
    return nlohmann::json{{"c", consts.c},
                          {"sigma_coeff", consts.sigma_coeff},
                          {"alpha1", consts.alpha1},
                          {"alpha2", consts.alpha2},
                          {"kappa", consts.kappa}};
}

namespace {

std::string csv_preamble(const std::string& stream, const std::string& fingerprint) {
    return "# cclqr " + stream + " v1 fingerprint=" + fingerprint + "\n";
}

} // namespace

std::string samples_to_csv(const std::vector<SectorSample>& samples,
                           const std::string& fingerprint) {
    std::string out = csv_preamble("samples", fingerprint);
    out += "tau,T_star,L_star,L_hat\n";
    for (const SectorSample& s : samples) {
        out += fmt17(s.tau) + "," + fmt17(s.T_star) + "," + fmt17(s.L_star) + "," +
               fmt17(s.L_hat) + "\n";
    }
    return out;
}

std::string curve_to_csv(const DmpSolution& sol, double rho, const std::string& fingerprint) {
    std::string out = csv_preamble("curve", fingerprint);
    out += "model,tau,rho,objective,lhs,rhs,feasible\n";
    for (const DmpGridPoint& pt : sol.curve) {
        out += std::to_string(sol.model_index) + "," + fmt17(pt.tau) + "," + fmt17(rho) + "," +
               fmt17(pt.objective) + "," + fmt17(pt.lhs) + "," + fmt17(pt.rhs) + "," +
               (pt.feasible ? "1" : "0") + "\n";
    }
    return out;
}

std::string rho_sweep_to_csv(const std::vector<RhoTauCell>& cells, int model_index,
                             const std::string& fingerprint) {
    std::string out = csv_preamble("rho_sweep", fingerprint);
    out += "model,tau,rho,objective,lhs,rhs,feasible\n";
    for (const RhoTauCell& cell : cells) {
        out += std::to_string(model_index) + "," + fmt17(cell.tau) + "," + fmt17(cell.rho) + "," +
               fmt17(cell.objective) + "," + fmt17(cell.lhs) + "," + fmt17(cell.rhs) + "," +
               (cell.feasible ? "1" : "0") + "\n";
    }
    return out;
}

std::string budget_sweep_to_csv(const std::vector<BudgetRegion>& regions, int model_index,
                                const std::string& fingerprint) {
    std::string out = csv_preamble("budget_sweep", fingerprint);
    out += "model,tau_g,tau,objective,lhs,rhs,feasible\n";
    for (const BudgetRegion& region : regions) {
        for (const DmpGridPoint& pt : region.solution.curve) {
            out += std::to_string(model_index) + "," + fmt17(region.tau_g) + "," + fmt17(pt.tau) +
                   "," + fmt17(pt.objective) + "," + fmt17(pt.lhs) + "," + fmt17(pt.rhs) + "," +
                   (pt.feasible ? "1" : "0") + "\n";
        }
    }
    return out;
}

std::string trajectory_to_csv(const Trajectory& traj, const std::string& fingerprint) {
    std::string out = csv_preamble("trajectory", fingerprint);
    out += "t,x_norm,u,cumulative_cost\n";
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double u = traj.inputs[k].size() == 1 ? traj.inputs[k](0) : traj.inputs[k].norm();
        out += fmt17(traj.times[k]) + "," + fmt17(traj.states[k].norm()) + "," + fmt17(u) + "," +
               fmt17(traj.cumulative_cost[k]) + "\n";
    }
    return out;
}

std::string gaps_to_csv(const SuboptStats& stats, const std::string& fingerprint) {
    std::string out = csv_preamble("gaps", fingerprint);
    out += "run,gap\n";
    for (std::size_t k = 0; k < stats.gaps.size(); ++k) {
        out += std::to_string(k) + "," + fmt17(stats.gaps[k]) + "\n";
    }
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open '" + path + "' for writing");
    }
    out << content;
    if (!out) {
        throw std::runtime_error("write failed for '" + path + "'");
    }
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace cclqr
