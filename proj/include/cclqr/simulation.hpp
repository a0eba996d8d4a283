#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cclqr/dmp.hpp"
#include "cclqr/lti.hpp"
#include "cclqr/rng.hpp"
#include "cclqr/sector_bounds.hpp"

namespace cclqr {

// Sampled closed-loop trajectory. Propagation is exact (matrix-exponential
// step matrices); the cumulative cost is a left-endpoint Riemann sum at the
// stored spacing. diverged is set when ||x|| exceeded the cutoff and the run
// was aborted.
struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<Eigen::VectorXd> inputs;
    std::vector<double> cumulative_cost;
    bool diverged = false;
};

inline constexpr double kDivergenceCutoff = 1e9;

// Sub-sampling step for a sampling time tau: tau/20, floored at 1e-4 s, and
// always an integer divisor of tau.
double default_substep(double tau);

// Baseline closed loop dx/dt = A_cl x with u = K x recorded at each step.
Trajectory simulate_baseline(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& K,
                             const CostSpec& cost, const Eigen::VectorXd& x0, double T_sim,
                             double h);

// Deployed sampled-data loop: within each interval [k tau, (k+1) tau) the
// input is held at K_dep x_{k tau} and the state advances through the exact
// transition map. h must divide tau.
Trajectory simulate_deployed(const LtiSystem& sys, const CostSpec& cost,
                             const Eigen::MatrixXd& K_dep, double tau, const Eigen::VectorXd& x0,
                             double T_sim, double h);

// Left-endpoint Riemann sum of the stage cost along a stored trajectory.
double riemann_cost(const Trajectory& traj, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                    double h);

struct SuboptStats {
    std::vector<double> gaps; // |J_deployed - J_baseline| per run
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    std::vector<double> outliers; // beyond 1.5 IQR from the quartiles
    int runs = 0;
    std::uint64_t seed = 0;
    int diverged_runs = 0;
};

// Monte-Carlo suboptimality study: per run, x0 is uniform on the unit sphere
// (fixed seed, deterministic sub-streams), both loops are simulated over
// [0, T_sim] and the absolute cost gap is recorded.
SuboptStats monte_carlo_subopt(const BaselineLqr& base, const Eigen::MatrixXd& K_dep, double tau,
                               int n_runs, double T_sim, std::uint64_t seed);

struct LocalTauResult {
    double tau = 0.0;
    double objective = 0.0;
    bool boundary = false; // no interior minimum found in the search range
};

// Locally optimal sampling time: minimizes the one-interval response mismatch
// ||e^{A_cl tau} - G_hat(tau)|| over the given range (coarse log grid plus
// golden-section refinement).
LocalTauResult local_optimal_tau(const Eigen::MatrixXd& A_cl, const LtiSystem& sys,
                                 const std::function<Eigen::MatrixXd(double)>& gain_builder,
                                 double tau_lo, double tau_hi);

struct SmallGainReport {
    double max_violation = 0.0; // max over time of ||xhat - xstar|| - envelope
    double time_of_max = 0.0;
    double max_gap = 0.0; // max trajectory distance observed
    bool within(double slack) const { return max_violation <= slack; }
};

// Checks the contraction envelope ||xhat_t - xstar_t|| <=
// sqrt(kappa) e^{-c(1-rho)t/2} ||x0|| pointwise on a shared time grid.
SmallGainReport verify_small_gain_trajectory(const Trajectory& baseline,
                                             const Trajectory& deployed,
                                             const DissConstants& consts, double rho);

Eigen::VectorXd random_unit_vector(int n, Rng& rng);

} // namespace cclqr
