#include "cclqr/riccati.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"

namespace cclqr::riccati {

namespace {

void require_cost_pair(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    if (linalg::min_eigenvalue_sym(Q) <= 0.0) {
        throw std::invalid_argument("state cost Q must be positive definite");
    }
    if (linalg::min_eigenvalue_sym(R) <= 0.0) {
        throw std::invalid_argument("input cost R must be positive definite");
    }
}

void require_consistent(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                        const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R) {
    linalg::require_square(A, "A");
    linalg::require_square(Q, "Q");
    linalg::require_square(R, "R");
    linalg::require_finite(A, "A");
    linalg::require_finite(B, "B");
    linalg::require_finite(Q, "Q");
    linalg::require_finite(R, "R");
    if (B.rows() != A.rows() || Q.rows() != A.rows() || R.rows() != B.cols()) {
        throw std::invalid_argument("inconsistent LQR problem dimensions");
    }
}

// Sign-function initializer for the CARE (Byers' scaled Newton iteration on
// the Hamiltonian): the stable invariant subspace of
//   H = [A, B R^{-1} B'; Q, -A']
// is span [I; -P], which yields the linear system [W12; W22 + I] P = [W11 + I; W21]
// for the blocks W of sign(H) + I.
Eigen::MatrixXd care_sign_initializer(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                      const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                      int max_iterations) {
    const Eigen::Index n = A.rows();
    const Eigen::LLT<Eigen::MatrixXd> R_chol(R);

    Eigen::MatrixXd H(2 * n, 2 * n);
    H << A, B * R_chol.solve(B.transpose()), Q, -A.transpose();

    const Eigen::MatrixXd S = linalg::matrix_sign(H, max_iterations);

    const Eigen::MatrixXd W11 = S.topLeftCorner(n, n);
    const Eigen::MatrixXd W12 = S.topRightCorner(n, n);
    const Eigen::MatrixXd W21 = S.bottomLeftCorner(n, n);
    const Eigen::MatrixXd W22 = S.bottomRightCorner(n, n);
    const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);

    Eigen::MatrixXd lhs(2 * n, n);
    Eigen::MatrixXd rhs(2 * n, n);
    lhs << W12, W22 + eye;
    rhs << W11 + eye, W21;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(lhs);
    return linalg::symmetrize(qr.solve(rhs));
}

} // namespace

double care_residual(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, const Eigen::MatrixXd& Q,
                     const Eigen::MatrixXd& R, const Eigen::MatrixXd& P) {
    const Eigen::LLT<Eigen::MatrixXd> R_chol(R);
    const Eigen::MatrixXd res =
        A.transpose() * P + P * A - P * B * R_chol.solve(B.transpose() * P) + Q;
    return res.norm();
}

double dare_residual(const DiscretizedProblem& dp, const Eigen::MatrixXd& P) {
    const Eigen::MatrixXd BtPB = dp.R + dp.B.transpose() * P * dp.B;
    const Eigen::LDLT<Eigen::MatrixXd> inner(BtPB);
    const Eigen::MatrixXd BtPA = dp.B.transpose() * P * dp.A;
    const Eigen::MatrixXd res =
        dp.A.transpose() * P * dp.A + dp.Q - dp.A.transpose() * P * dp.B * inner.solve(BtPA) - P;
    return res.norm();
}

double controllability_margin(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    linalg::require_square(A, "A");
    if (B.rows() != A.rows()) {
        throw std::invalid_argument("controllability_margin: dimension mismatch");
    }
    const Eigen::Index n = A.rows();
    const Eigen::Index m = B.cols();

    const double scale = std::max(A.norm(), std::max(B.norm(), 1e-300));
    const Eigen::VectorXcd lambda = linalg::eigenvalues(A);

    double margin = std::numeric_limits<double>::infinity();
    Eigen::MatrixXcd pencil(n, n + m);
    pencil.rightCols(m) = B.cast<std::complex<double>>();
    for (Eigen::Index i = 0; i < n; ++i) {
        pencil.leftCols(n) = A.cast<std::complex<double>>();
        pencil.leftCols(n).diagonal().array() -= lambda(i);
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pencil);
        margin = std::min(margin, svd.singularValues().minCoeff() / scale);
    }
    return margin;
}

bool is_controllable(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, double tol) {
    return controllability_margin(A, B) > tol;
}

DiscretizedProblem euler_discretize(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                    const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                                    double tau) {
    require_consistent(A, B, Q, R);
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw std::invalid_argument("euler_discretize: tau must be positive, got " +
                                    std::to_string(tau));
    }
    DiscretizedProblem dp;
    dp.A = Eigen::MatrixXd::Identity(A.rows(), A.cols()) + tau * A;
    dp.B = tau * B;
    dp.Q = tau * Q;
    dp.R = tau * R;
    dp.tau = tau;
    return dp;
}

RiccatiSolution solve_care(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                           const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                           const CareOptions& options) {
    require_consistent(A, B, Q, R);
    require_cost_pair(Q, R);
    if (!is_controllable(A, B, options.controllability_tol)) {
        throw std::invalid_argument("solve_care: (A, B) is not controllable (PBH margin below " +
                                    std::to_string(options.controllability_tol) + ")");
    }

    Eigen::MatrixXd P = options.initial_value
                            ? linalg::symmetrize(*options.initial_value)
                            : care_sign_initializer(A, B, Q, R, options.max_sign_iterations);

    const Eigen::LLT<Eigen::MatrixXd> R_chol(R);
    const double tol = options.residual_tol;

    RiccatiSolution sol;
    double residual = care_residual(A, B, Q, R, P);
    int it = 0;
    // Newton-Kleinman refinement: each step is one Lyapunov solve with the
    // current closed loop. The starting value must be stabilizing.
    while (residual > tol * std::max(1.0, P.norm()) && it < options.max_newton_iterations) {
        const Eigen::MatrixXd K = -R_chol.solve(B.transpose() * P);
        const Eigen::MatrixXd F = A + B * K;
        if (linalg::spectral_abscissa(F) >= 0.0) {
            throw NumericalError("solve_care: Newton iterate lost stabilizing property");
        }
        P = linalg::solve_lyapunov(F, Q + K.transpose() * R * K);
        residual = care_residual(A, B, Q, R, P);
        ++it;
    }
    if (residual > tol * std::max(1.0, P.norm())) {
        throw NumericalError("solve_care: no convergence within " +
                             std::to_string(options.max_newton_iterations) +
                             " Newton iterations, residual " + std::to_string(residual));
    }

    P = linalg::symmetrize(P);
    if (linalg::min_eigenvalue_sym(P) <= 0.0) {
        throw NumericalError("solve_care: computed value matrix is not positive definite");
    }
    sol.P = P;
    sol.K = -R_chol.solve(B.transpose() * P);
    if (linalg::spectral_abscissa(A + B * sol.K) >= 0.0) {
        throw NumericalError("solve_care: closed loop is not Hurwitz");
    }
    sol.residual = residual;
    sol.iterations = it;
    return sol;
}

RiccatiSolution solve_dare(const DiscretizedProblem& dp, const DareOptions& options) {
    require_consistent(dp.A, dp.B, dp.Q, dp.R);
    require_cost_pair(dp.Q, dp.R);

    Eigen::MatrixXd P = dp.Q;
    long it = 0;
    for (; it < options.max_iterations; ++it) {
        const Eigen::MatrixXd BtPB = dp.R + dp.B.transpose() * P * dp.B;
        const Eigen::LLT<Eigen::MatrixXd> inner(BtPB);
        if (inner.info() != Eigen::Success) {
            throw NumericalError("solve_dare: R + B'PB lost positive definiteness");
        }
        const Eigen::MatrixXd BtPA = dp.B.transpose() * P * dp.A;
        Eigen::MatrixXd P_next =
            dp.A.transpose() * P * dp.A + dp.Q - BtPA.transpose() * inner.solve(BtPA);
        P_next = linalg::symmetrize(P_next);
        const double step = (P_next - P).norm();
        P = P_next;
        if (step <= options.increment_tol * std::max(1.0, P.norm())) {
            break;
        }
    }

    const double residual = dare_residual(dp, P);
    if (residual > options.residual_tol * std::max(1.0, P.norm())) {
        throw NumericalError("solve_dare: no convergence within " +
                             std::to_string(options.max_iterations) + " iterations, residual " +
                             std::to_string(residual));
    }

    RiccatiSolution sol;
    sol.P = P;
    sol.K = gain_from_value(P, dp);
    if (linalg::spectral_radius(dp.A + dp.B * sol.K) >= 1.0) {
        throw NumericalError("solve_dare: closed loop is not Schur stable");
    }
    sol.residual = residual;
    sol.iterations = static_cast<int>(std::min<long>(it, INT32_MAX));
    return sol;
}

DarrResult darr_finite_horizon(const DiscretizedProblem& dp, const Eigen::MatrixXd& terminal,
                               int steps) {
    require_consistent(dp.A, dp.B, dp.Q, dp.R);
    if (steps < 1) {
        throw std::invalid_argument("darr_finite_horizon: need at least one step, got " +
                                    std::to_string(steps));
    }
    if (terminal.rows() != dp.A.rows() || terminal.cols() != dp.A.cols()) {
        throw std::invalid_argument("darr_finite_horizon: terminal dimension mismatch");
    }
    if (linalg::min_eigenvalue_sym(terminal) < -1e-9 * std::max(1.0, terminal.norm())) {
        throw std::invalid_argument("darr_finite_horizon: terminal must be positive semidefinite");
    }

    Eigen::MatrixXd P = linalg::symmetrize(terminal);
    for (int k = 0; k < steps; ++k) {
        const Eigen::MatrixXd BtPB = dp.R + dp.B.transpose() * P * dp.B;
        const Eigen::LLT<Eigen::MatrixXd> inner(BtPB);
        if (inner.info() != Eigen::Success) {
            throw NumericalError("darr_finite_horizon: singular R + B'PB at step " +
                                 std::to_string(k));
        }
        const Eigen::MatrixXd BtPA = dp.B.transpose() * P * dp.A;
        P = linalg::symmetrize(dp.A.transpose() * P * dp.A + dp.Q -
                               BtPA.transpose() * inner.solve(BtPA));
    }

    DarrResult result;
    result.P = P;
    result.K = gain_from_value(P, dp);
    result.steps = steps;
    result.terminal = terminal;
    return result;
}

Eigen::MatrixXd gain_from_value(const Eigen::MatrixXd& X, const DiscretizedProblem& dp) {
    if (X.rows() != dp.A.rows() || X.cols() != dp.A.cols()) {
        throw std::invalid_argument("gain_from_value: value matrix dimension mismatch");
    }
    const Eigen::MatrixXd inner = dp.R + dp.B.transpose() * X * dp.B;
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(inner);
    if (!lu.isInvertible()) {
        throw NumericalError("gain_from_value: R + B'XB is singular");
    }
    return -lu.solve(dp.B.transpose() * X * dp.A);
}

int horizon_steps(double T, double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("horizon_steps: tau must be positive");
    }
    const double ratio = T / tau;
    if (!(ratio >= 1.0)) {
        return 1;
    }
    return static_cast<int>(std::floor(ratio));
}

} // namespace cclqr::riccati
