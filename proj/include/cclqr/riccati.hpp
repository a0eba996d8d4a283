#pragma once

#include <optional>

#include <Eigen/Dense>

namespace cclqr::riccati {

struct RiccatiSolution {
    Eigen::MatrixXd P; // symmetric positive definite value matrix
    Eigen::MatrixXd K; // feedback gain, input x state
    double residual = 0.0;
    int iterations = 0;
};

// First-order Euler discretization of a continuous problem:
// A_tau = I + tau A, B_tau = tau B, Q_tau = tau Q, R_tau = tau R.
struct DiscretizedProblem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
    double tau = 0.0;
};

struct DarrResult {
    Eigen::MatrixXd P;        // value after the backward recursion
    Eigen::MatrixXd K;        // gain computed from the final value
    int steps = 0;
    Eigen::MatrixXd terminal; // terminal value the recursion started from
};

struct CareOptions {
    double residual_tol = 1e-8; // relative to max(1, ||P||)
    int max_newton_iterations = 100;
    int max_sign_iterations = 100;
    double controllability_tol = 1e-8;
    // Optional symmetric stabilizing starting value; when set, the Newton
    // iteration starts here instead of the sign-function initializer.
    std::optional<Eigen::MatrixXd> initial_value{};
};

struct DareOptions {
    double residual_tol = 1e-8;
    long max_iterations = 1000000;
    double increment_tol = 1e-14; // relative step size that counts as converged
};

DiscretizedProblem euler_discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    double tau);

// Stabilizing solution of A'P + PA - P B R^{-1} B' P + Q = 0 with
// K = -R^{-1} B' P. Requires (A, B) controllable and Q, R positive definite.
RiccatiSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const CareOptions& options = {});

// Stabilizing fixed point of the discrete-time Riccati recursion, with
// K = -(R + B'PB)^{-1} B'PA.
RiccatiSolution solve_dare(const DiscretizedProblem& dp, const DareOptions& options = {});

// N backward Riccati recursion steps from the given terminal value.
DarrResult darr_finite_horizon(const DiscretizedProblem& dp, const Eigen::MatrixXd& terminal,
                               int steps);

// K(X, tau) = -(R + B'XB)^{-1} B'XA on the discretized data.
Eigen::MatrixXd gain_from_value(const Eigen::MatrixXd& X, const DiscretizedProblem& dp);

// floor(T / tau), clamped to at least one step.
int horizon_steps(double T, double tau);

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R, const Eigen::MatrixXd& P);
double dare_residual(const DiscretizedProblem& dp, const Eigen::MatrixXd& P);

// PBH controllability margin: min over eigenvalues lambda of A of the
// smallest singular value of [A - lambda I, B], normalized by ||[A B]||.
double controllability_margin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);
bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol = 1e-8);

} // namespace cclqr::riccati
