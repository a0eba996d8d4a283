#pragma once

#include <Eigen/Dense>

namespace cclqr::linalg {

// e^{A s}. Scaling-and-squaring with a Pade core; accurate to ~1e-10 relative
// for ||A s|| up to ~100.
Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double s = 1.0);

// Solves F'X + XF + S = 0 for symmetric X (Bartels-Stewart on the complex
// Schur form). F must be Hurwitz with spectral abscissa below -hurwitz_margin.
Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& S,
                               double hurwitz_margin = 1e-10, double residual_tol = 1e-9);

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A);

// max_j Re{lambda_j(A)}; the closed-loop decay rate alpha is its negation.
double spectral_abscissa(const Eigen::MatrixXd& A);

double spectral_radius(const Eigen::MatrixXd& A);

// Largest singular value.
double operator_norm(const Eigen::MatrixXd& M);

// lambda_max / lambda_min for symmetric positive definite input.
double condition_number(const Eigen::MatrixXd& X);

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X);

double min_eigenvalue_sym(const Eigen::MatrixXd& X);
double max_eigenvalue_sym(const Eigen::MatrixXd& X);

// Principal square root of a symmetric positive semidefinite matrix.
Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& X);

// Matrix sign function via the scaled Newton iteration. Requires no
// eigenvalue on the imaginary axis.
Eigen::MatrixXd matrix_sign(const Eigen::MatrixXd& A, int max_iterations = 100);

// Orthonormal bases for the stable (Re < 0) and unstable (Re > 0) invariant
// subspaces of A, obtained from the sign-function spectral projectors.
struct SpectralSplit {
    Eigen::MatrixXd stable_basis;   // n x n_s
    Eigen::MatrixXd unstable_basis; // n x n_u
};
SpectralSplit spectral_split(const Eigen::MatrixXd& A);

bool is_finite(const Eigen::MatrixXd& M);

void require_square(const Eigen::MatrixXd& A, const char* name);
void require_finite(const Eigen::MatrixXd& A, const char* name);

} // namespace cclqr::linalg
