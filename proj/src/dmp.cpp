#include "cclqr/dmp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cclqr/linalg.hpp"

namespace cclqr {

std::vector<double> log_grid(double lo, double hi, int count) {
    if (!(0.0 < lo && lo < hi)) {
        throw std::invalid_argument("log_grid: need 0 < lo < hi");
    }
    if (count < 2) {
        throw std::invalid_argument("log_grid: need at least two points");
    }
    std::vector<double> grid(count);
    const double step = std::log(hi / lo) / (count - 1);
    for (int i = 0; i < count; ++i) {
        grid[i] = lo * std::exp(step * i);
    }
    grid.back() = hi;
    return grid;
}

DissConstants diss_constants(const Eigen::MatrixXd& P_star, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R) {
    DissConstants consts;
    consts.alpha1 = linalg::min_eigenvalue_sym(P_star);
    consts.alpha2 = linalg::max_eigenvalue_sym(P_star);
    const double q_min = linalg::min_eigenvalue_sym(Q);
    const double r_max = linalg::max_eigenvalue_sym(R);
    if (consts.alpha1 <= 0.0 || q_min <= 0.0 || linalg::min_eigenvalue_sym(R) <= 0.0) {
        throw std::invalid_argument("diss_constants: P_star, Q and R must be positive definite");
    }
    consts.c = q_min / consts.alpha2;
    consts.sigma_coeff = r_max;
    consts.kappa = consts.alpha2 / consts.alpha1;
    return consts;
}

double mu_rho_slope(const DissConstants& consts, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("mu_rho_slope: rho must lie in (0, 1)");
    }
    return 2.0 * std::sqrt(consts.kappa) / (consts.c * (1.0 - rho));
}

double flop_count(int n_x, int n_u) {
    if (n_x < 1 || n_u < 1) {
        throw std::invalid_argument("flop_count: dimensions must be >= 1");
    }
    const double n = n_x;
    const double m = n_u;
    return 4.0 * n * n * n + 4.0 * n * n * m + 2.0 * n * m * m + (m * m * m * m) / 3.0;
}

double horizon_from_timing(double tau, double phi, double tau_g) {
    if (!(tau > 0.0) || !(phi > 0.0) || !(tau_g > 0.0)) {
        throw std::invalid_argument("horizon_from_timing: all inputs must be positive");
    }
    return tau * tau / (tau_g * phi);
}

double small_gain_rhs(const DissConstants& consts, const Eigen::MatrixXd& Q,
                      const Eigen::MatrixXd& R, double rho, double L_M) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("small_gain_rhs: rho must lie in (0, 1)");
    }
    const double q_min = linalg::min_eigenvalue_sym(Q);
    const double r_max = linalg::max_eigenvalue_sym(R);
    return 0.5 * std::sqrt(rho * q_min / (consts.kappa * r_max)) - L_M;
}

namespace {

DmpSolution solve_on_grid(const SectorBoundFit& fit_star, const SectorBoundFit& fit_hat,
                          const ReducedModel& rm, const std::vector<double>& tau_grid, double rho,
                          double tau_g, const DissConstants& consts, const CostSpec& cost) {
    if (tau_grid.empty()) {
        throw std::invalid_argument("solve_dmp_fixed_model: empty tau grid");
    }
    const double phi = flop_count(rm.order, static_cast<int>(cost.R.rows()));
    const double rhs = small_gain_rhs(consts, cost.Q, cost.R, rho, rm.sector_gain);
    const double scale = 1.0 / (1.0 - rho);

    DmpSolution sol;
    sol.model_index = rm.index;
    sol.order = rm.order;
    sol.curve.reserve(tau_grid.size());

    for (double tau : tau_grid) {
        DmpGridPoint pt;
        pt.tau = tau;
        pt.T = horizon_from_timing(tau, phi, tau_g);
        pt.steps = static_cast<int>(std::floor(pt.T / tau));
        pt.timing_ok = pt.steps >= 1;
        pt.objective = scale * fit_star.evaluate(tau, pt.T);
        pt.lhs = fit_hat.evaluate(tau, pt.T) - fit_hat.L_M;
        pt.rhs = rhs;
        pt.feasible = pt.timing_ok && pt.lhs <= rhs;
        if (pt.feasible) {
            sol.feasible_taus.push_back(tau);
            if (pt.objective < sol.objective) {
                sol.objective = pt.objective;
                sol.tau_opt = tau;
                sol.T_opt = pt.T;
                sol.infeasible = false;
            }
        }
        sol.curve.push_back(pt);
    }
    if (sol.infeasible) {
        sol.objective = std::numeric_limits<double>::infinity();
        sol.tau_opt = 0.0;
        sol.T_opt = 0.0;
    }
    return sol;
}

} // namespace

DmpSolution solve_dmp_fixed_model(const SectorBoundFit& fit_star, const SectorBoundFit& fit_hat,
                                  const ReducedModel& rm, const DmpConfig& cfg,
                                  const DissConstants& consts, const CostSpec& cost) {
    return solve_on_grid(fit_star, fit_hat, rm, cfg.tau_grid, cfg.rho, cfg.tau_g, consts, cost);
}

DmpSolution solve_dmp(const std::vector<DmpSolution>& solutions) {
    if (solutions.empty()) {
        throw std::invalid_argument("solve_dmp: need at least one candidate solution");
    }
    const DmpSolution* best = nullptr;
    for (const DmpSolution& sol : solutions) {
        if (sol.infeasible) {
            continue;
        }
        if (best == nullptr || sol.objective < best->objective ||
            (sol.objective == best->objective && sol.order < best->order)) {
            best = &sol;
        }
    }
    if (best == nullptr) {
        DmpSolution aggregate;
        aggregate.infeasible = true;
        return aggregate;
    }
    return *best;
}

std::vector<RhoTauCell> rho_tau_sweep(const SectorBoundFit& fit_star,
                                      const SectorBoundFit& fit_hat, const ReducedModel& rm,
                                      const DmpConfig& cfg, const std::vector<double>& rho_grid,
                                      const DissConstants& consts, const CostSpec& cost) {
    std::vector<RhoTauCell> cells;
    cells.reserve(rho_grid.size() * cfg.tau_grid.size());
    for (double rho : rho_grid) {
        const DmpSolution sol =
            solve_on_grid(fit_star, fit_hat, rm, cfg.tau_grid, rho, cfg.tau_g, consts, cost);
        for (const DmpGridPoint& pt : sol.curve) {
            RhoTauCell cell;
            cell.rho = rho;
            cell.tau = pt.tau;
            cell.objective = pt.objective;
            cell.lhs = pt.lhs;
            cell.rhs = pt.rhs;
            cell.feasible = pt.feasible;
            cells.push_back(cell);
        }
    }
    return cells;
}

std::vector<BudgetRegion> compute_budget_sweep(const SectorBoundFit& fit_star,
                                               const SectorBoundFit& fit_hat,
                                               const ReducedModel& rm, const DmpConfig& cfg,
                                               const std::vector<double>& budgets,
                                               const DissConstants& consts,
                                               const CostSpec& cost) {
    std::vector<BudgetRegion> regions;
    regions.reserve(budgets.size());
    for (double tau_g : budgets) {
        if (!(tau_g > 0.0)) {
            throw std::invalid_argument("compute_budget_sweep: budgets must be positive");
        }
        BudgetRegion region;
        region.tau_g = tau_g;
        region.solution =
            solve_on_grid(fit_star, fit_hat, rm, cfg.tau_grid, cfg.rho, tau_g, consts, cost);
        regions.push_back(std::move(region));
    }
    return regions;
}

CostLipschitz cost_lipschitz(const DissConstants& consts, const CostSpec& cost,
                             const Eigen::MatrixXd& K_star, double B_X, double B_K,
                             double L_bar) {
    if (!(B_X > 0.0) || !(B_K > 0.0) || !(L_bar >= 0.0)) {
        throw std::invalid_argument("cost_lipschitz: bounds must be positive");
    }
    const double sqrt_kappa = std::sqrt(consts.kappa);
    const double q_norm = linalg::operator_norm(cost.Q);
    const double r_norm = linalg::operator_norm(cost.R);
    const double k_norm = linalg::operator_norm(K_star);
    CostLipschitz lips;
    lips.L_x = 3.0 * sqrt_kappa * B_X * (q_norm + 2.0 * B_K * r_norm);
    lips.L_pi = sqrt_kappa * B_X * r_norm * (2.0 * k_norm + L_bar);
    return lips;
}

double performance_gap_bound(double L_star_value, double L_x, double L_pi, double mu_slope,
                             double x0_norm) {
    if (L_star_value < 0.0 || L_x < 0.0 || L_pi < 0.0 || mu_slope < 0.0 || x0_norm < 0.0) {
        throw std::invalid_argument("performance_gap_bound: inputs must be nonnegative");
    }
    return (L_x + L_pi * L_star_value) * mu_slope * x0_norm;
}

} // namespace cclqr
