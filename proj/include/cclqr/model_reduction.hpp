#pragma once

#include <vector>

#include <Eigen/Dense>

#include "cclqr/lti.hpp"

namespace cclqr {

// Reduced model obtained by balanced truncation with a Petrov-Galerkin
// projection pair (U, V), U'V = I. Unstable modes of the plant are preserved
// exactly; only the stable part is truncated. P_r, K_r, alpha and sector_gain
// are filled in by rom_riccati / rom_sector_gain.
struct ReducedModel {
    int index = 0; // family label; 0 is the full-order model
    int order = 0;
    Eigen::MatrixXd U; // n_x x order, reduced state is U' x
    Eigen::MatrixXd V; // n_x x order, lift is x ~ V z
    Eigen::MatrixXd A_r;
    Eigen::MatrixXd B_r;
    Eigen::MatrixXd Q_r;
    Eigen::MatrixXd P_r;       // reduced CARE solution
    Eigen::MatrixXd K_r;       // reduced gain
    double alpha = 0.0;        // decay rate of the reduced closed loop (> 0)
    double sector_gain = 0.0;  // ||R^{-1} B' (U P_r U' - P_star)||
};

ReducedModel balanced_truncation(const LtiSystem& sys, const CostSpec& cost, int order);

// Solves the reduced CARE and fills P_r, K_r and alpha.
ReducedModel rom_riccati(ReducedModel rm, const CostSpec& cost);

// Policy-difference gain of the reduced controller deployed on the full
// plant, relative to the full-order optimal policy.
double rom_sector_gain(const ReducedModel& rm, const Eigen::MatrixXd& P_star,
                       const LtiSystem& sys, const CostSpec& cost);

// Adds 1e-10 I when the projected state cost is near-singular, keeping the
// reduced CARE well posed under aggressive truncation.
Eigen::MatrixXd regularized_state_cost(const Eigen::MatrixXd& Q_r);

// Builds the model family for the given orders (full order first by
// convention), runs the reduced Riccati solves and computes sector gains.
// Indices are assigned in the order given.
std::vector<ReducedModel> build_model_family(const LtiSystem& sys, const CostSpec& cost,
                                             const std::vector<int>& orders,
                                             const Eigen::MatrixXd& P_star);

} // namespace cclqr
