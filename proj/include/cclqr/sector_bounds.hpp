#pragma once

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cclqr/lti.hpp"
#include "cclqr/model_reduction.hpp"
#include "cclqr/riccati.hpp"

namespace cclqr {

// Full-order LQR baseline: CARE solution plus the closed-loop matrix,
// computed once and shared by the sector-bound and simulation code.
struct BaselineLqr {
    LtiSystem sys;
    CostSpec cost;
    riccati::RiccatiSolution care; // P_star, K_star
    Eigen::MatrixXd A_cl;          // A + B K_star
};

BaselineLqr make_baseline(const LtiSystem& sys, const CostSpec& cost);

// One evaluated point of the design-dependent sector gains. T_star is the
// horizon that saturates the per-step compute budget for the generating
// (tau, tau_g) pair; timing_ok records whether at least one recursion step
// fits into the sampling interval (steps is clamped to 1 otherwise).
struct SectorSample {
    double tau = 0.0;
    double T_star = 0.0;
    double L_star = 0.0; // gain on baseline-system trajectories
    double L_hat = 0.0;  // gain on deployed-system trajectories
    int steps = 0;
    bool timing_ok = true;
};

enum class FitForm { linear, quadratic, fitted_alpha };
enum class TrajectoryKind { baseline, deployed };

// Least-squares fit of the sector-gain functional form
//   L(tau, T) = C1 tau + C1q tau^2 + (C2 + C3 tau) e^{-alpha T} + L_M.
// C1q is zero unless form == quadratic; alpha_used equals the model's decay
// rate except for form == fitted_alpha.
struct SectorBoundFit {
    double C1 = 0.0;
    double C1q = 0.0;
    double C2 = 0.0;
    double C3 = 0.0;
    double alpha_used = 0.0;
    double L_M = 0.0;
    FitForm form = FitForm::linear;
    TrajectoryKind kind = TrajectoryKind::baseline;
    bool clamped = false; // some negative coefficient was clamped to zero
    double rms_residual = 0.0;
    double relative_rms_residual = 0.0;

    double evaluate(double tau, double T) const {
        return C1 * tau + C1q * tau * tau + (C2 + C3 * tau) * std::exp(-alpha_used * T) + L_M;
    }
};

// Exact one-interval transition map under the held input u = K x_{[t]}:
// G(s) = e^{As} + (e^{As} - I) A^{-1} B K. Requires invertible A and s >= 0.
Eigen::MatrixXd zoh_transition(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& K, double s);

// Receding-horizon gain for the reduced model at sampling time tau with the
// budget-saturating horizon, lifted to the full state dimension: K_{tau,T*} U'.
Eigen::MatrixXd deployed_gain(const ReducedModel& rm, const CostSpec& cost, double tau,
                              double tau_g);

// Sector gains of an arbitrary full-dimension deployed gain at sampling time
// tau: first = ||K_dep G_star^{-1}(tau) - K_star||, second uses G_hat built
// with K_dep itself.
std::pair<double, double> sector_norms(const BaselineLqr& base, const Eigen::MatrixXd& K_dep,
                                       double tau);

SectorSample sector_gain_at(const BaselineLqr& base, const ReducedModel& rm, double tau,
                            double tau_g);

std::vector<SectorSample> sample_sector_gains(const BaselineLqr& base, const ReducedModel& rm,
                                              const std::vector<double>& taus, double tau_g);

// Log-uniform draw of sample sampling times over [lo, hi], sorted ascending.
std::vector<double> log_uniform_taus(double lo, double hi, int count, std::uint64_t seed);

SectorBoundFit fit_sector_bound(const std::vector<SectorSample>& samples, double alpha_i,
                                double L_M, FitForm form, TrajectoryKind kind);

} // namespace cclqr
