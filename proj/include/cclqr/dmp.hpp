#pragma once

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "cclqr/lti.hpp"
#include "cclqr/model_reduction.hpp"
#include "cclqr/sector_bounds.hpp"

namespace cclqr {

// Dissipation data of the baseline closed loop: V(x, x') = (x-x')' P* (x-x')
// decays at rate c with supply sigma(z) = sigma_coeff z^2.
struct DissConstants {
    double c = 0.0;           // lambda_min(Q) / lambda_max(P*)
    double sigma_coeff = 0.0; // lambda_max(R)
    double alpha1 = 0.0;      // lambda_min(P*)
    double alpha2 = 0.0;      // lambda_max(P*)
    double kappa = 1.0;       // alpha2 / alpha1
};

struct DmpConfig {
    double rho = 0.97;
    double tau_g = 6.25e-8; // seconds per flop (16 MHz)
    std::vector<double> tau_grid;
    double x0_norm = 1.0;
};

struct DmpGridPoint {
    double tau = 0.0;
    double T = 0.0; // budget-saturating horizon tau^2 / (tau_g Phi)
    int steps = 0;  // floor(T / tau), before clamping
    double objective = 0.0;
    double lhs = 0.0; // small-gain constraint left-hand side
    double rhs = 0.0; // small-gain threshold
    bool timing_ok = false;
    bool feasible = false;
};

struct DmpSolution {
    int model_index = -1;
    int order = 0;
    bool infeasible = true;
    double tau_opt = 0.0;
    double T_opt = 0.0;
    double objective = std::numeric_limits<double>::infinity();
    std::vector<double> feasible_taus;
    std::vector<DmpGridPoint> curve;
};

std::vector<double> log_grid(double lo, double hi, int count);

DissConstants diss_constants(const Eigen::MatrixXd& P_star, const Eigen::MatrixXd& Q,
                             const Eigen::MatrixXd& R);

// Slope of mu_rho(z) = (2 sqrt(kappa) / (c (1 - rho))) z.
double mu_rho_slope(const DissConstants& consts, double rho);

// Per-recursion-step flop count Phi = 4n^3 + 4n^2 m + 2n m^2 + m^4/3.
double flop_count(int n_x, int n_u);

// Budget-saturating horizon T* = tau^2 / (tau_g Phi).
double horizon_from_timing(double tau, double phi, double tau_g);

// Small-gain threshold (may be negative, meaning the model is structurally
// infeasible at every sampling time):
//   (1/2) sqrt(rho lambda_min(Q) / (kappa(P*) lambda_max(R))) - L_M.
double small_gain_rhs(const DissConstants& consts, const Eigen::MatrixXd& Q,
                      const Eigen::MatrixXd& R, double rho, double L_M);

// Scalar design problem for a fixed model: grid search over tau with the
// horizon saturating the compute budget. A grid point is feasible when at
// least one recursion step fits the sampling interval and the fitted deployed
// gain satisfies the small-gain constraint. The objective is the fitted
// baseline gain scaled by 1/(1-rho).
DmpSolution solve_dmp_fixed_model(const SectorBoundFit& fit_star, const SectorBoundFit& fit_hat,
                                  const ReducedModel& rm, const DmpConfig& cfg,
                                  const DissConstants& consts, const CostSpec& cost);

// Compares per-model solutions: feasible solution with the smallest
// objective, ties broken toward the smaller order. All-infeasible input
// yields an infeasible aggregate.
DmpSolution solve_dmp(const std::vector<DmpSolution>& solutions);

struct RhoTauCell {
    double rho = 0.0;
    double tau = 0.0;
    double objective = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool feasible = false;
};

std::vector<RhoTauCell> rho_tau_sweep(const SectorBoundFit& fit_star,
                                      const SectorBoundFit& fit_hat, const ReducedModel& rm,
                                      const DmpConfig& cfg, const std::vector<double>& rho_grid,
                                      const DissConstants& consts, const CostSpec& cost);

struct BudgetRegion {
    double tau_g = 0.0;
    DmpSolution solution;
};

std::vector<BudgetRegion> compute_budget_sweep(const SectorBoundFit& fit_star,
                                               const SectorBoundFit& fit_hat,
                                               const ReducedModel& rm, const DmpConfig& cfg,
                                               const std::vector<double>& budgets,
                                               const DissConstants& consts, const CostSpec& cost);

struct CostLipschitz {
    double L_x = 0.0;
    double L_pi = 0.0;
};

// Lipschitz constants of the quadratic stage cost on the reachable tube:
//   L_x  = 3 sqrt(kappa) B_X (||Q|| + 2 B_K ||R||),
//   L_pi = sqrt(kappa) B_X ||R|| (2 ||K*|| + L_bar).
CostLipschitz cost_lipschitz(const DissConstants& consts, const CostSpec& cost,
                             const Eigen::MatrixXd& K_star, double B_X, double B_K, double L_bar);

// (L_x + L_pi L*) mu_rho(||x0||): the certified performance-gap bound.
double performance_gap_bound(double L_star_value, double L_x, double L_pi, double mu_slope,
                             double x0_norm);

} // namespace cclqr
