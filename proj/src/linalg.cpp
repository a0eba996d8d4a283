#include "cclqr/linalg.hpp"

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

#include "cclqr/errors.hpp"

namespace cclqr::linalg {

namespace {

std::string dim_string(const Eigen::MatrixXd& M) {
    return std::to_string(M.rows()) + "x" + std::to_string(M.cols());
}

} // namespace

void require_square(const Eigen::MatrixXd& A, const char* name) {
    if (A.rows() == 0 || A.rows() != A.cols()) {
        throw std::invalid_argument(std::string(name) + " must be square, got " + dim_string(A));
    }
}

void require_finite(const Eigen::MatrixXd& A, const char* name) {
    if (!is_finite(A)) {
        throw std::invalid_argument(std::string(name) + " contains non-finite entries");
    }
}

bool is_finite(const Eigen::MatrixXd& M) { return M.allFinite(); }

Eigen::MatrixXd matrix_exponential(const Eigen::MatrixXd& A, double s) {
    require_square(A, "A");
    require_finite(A, "A");
    if (!std::isfinite(s)) {
        throw std::invalid_argument("matrix_exponential: scale s must be finite");
    }
    return (A * s).exp();
}

Eigen::MatrixXd solve_lyapunov(const Eigen::MatrixXd& F, const Eigen::MatrixXd& S,
                               double hurwitz_margin, double residual_tol) {
    require_square(F, "F");
    require_square(S, "S");
    require_finite(F, "F");
    require_finite(S, "S");
    if (F.rows() != S.rows()) {
        throw std::invalid_argument("solve_lyapunov: dimension mismatch, F is " + dim_string(F) +
                                    ", S is " + dim_string(S));
    }

    const Eigen::Index n = F.rows();

    Eigen::ComplexSchur<Eigen::MatrixXd> schur(F);
    if (schur.info() != Eigen::Success) {
        throw NumericalError("solve_lyapunov: Schur decomposition failed");
    }
    const Eigen::MatrixXcd& T = schur.matrixT();
    const Eigen::MatrixXcd& U = schur.matrixU();

    double abscissa = T(0, 0).real();
    for (Eigen::Index i = 1; i < n; ++i) {
        abscissa = std::max(abscissa, T(i, i).real());
    }
    if (abscissa >= -hurwitz_margin) {
        throw std::invalid_argument("solve_lyapunov: F is not Hurwitz, eigenvalue with Re = " +
                                    std::to_string(abscissa));
    }

    // F = U T U^H, so F' X + X F + S = 0 becomes T^H Y + Y T = -U^H S U with
    // Y = U^H X U. T is upper triangular; solve entrywise in forward order.
    const Eigen::MatrixXcd C = -(U.adjoint() * S.cast<std::complex<double>>() * U);
    Eigen::MatrixXcd Y = Eigen::MatrixXcd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            std::complex<double> rhs = C(i, j);
            for (Eigen::Index k = 0; k < i; ++k) {
                rhs -= std::conj(T(k, i)) * Y(k, j);
            }
            for (Eigen::Index k = 0; k < j; ++k) {
                rhs -= Y(i, k) * T(k, j);
            }
            Y(i, j) = rhs / (std::conj(T(i, i)) + T(j, j));
        }
    }

    Eigen::MatrixXd X = (U * Y * U.adjoint()).real();
    X = symmetrize(X);

    const double residual = (F.transpose() * X + X * F + S).norm();
    const double scale = std::max(1.0, S.norm());
    if (residual > residual_tol * scale) {
        throw NumericalError("solve_lyapunov: residual " + std::to_string(residual) +
                             " exceeds tolerance");
    }
    return X;
}

Eigen::VectorXcd eigenvalues(const Eigen::MatrixXd& A) {
    require_square(A, "A");
    require_finite(A, "A");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(A, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigenvalues: QR iteration failed to converge");
    }
    return solver.eigenvalues();
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
    const Eigen::VectorXcd lambda = eigenvalues(A);
    return lambda.real().maxCoeff();
}

double spectral_radius(const Eigen::MatrixXd& A) {
    const Eigen::VectorXcd lambda = eigenvalues(A);
    return lambda.cwiseAbs().maxCoeff();
}

double operator_norm(const Eigen::MatrixXd& M) {
    require_finite(M, "M");
    if (M.size() == 0) {
        throw std::invalid_argument("operator_norm: empty matrix");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    return svd.singularValues()(0);
}

Eigen::MatrixXd symmetrize(const Eigen::MatrixXd& X) { return 0.5 * (X + X.transpose()); }

namespace {

Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> sym_eigs(const Eigen::MatrixXd& X) {
    require_square(X, "X");
    require_finite(X, "X");
    const double asym = (X - X.transpose()).norm();
    if (asym > 1e-8 * std::max(1.0, X.norm())) {
        throw std::invalid_argument("expected a symmetric matrix, asymmetry norm " +
                                    std::to_string(asym));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetrize(X));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("symmetric eigendecomposition failed");
    }
    return solver;
}

} // namespace

double min_eigenvalue_sym(const Eigen::MatrixXd& X) { return sym_eigs(X).eigenvalues().minCoeff(); }

double max_eigenvalue_sym(const Eigen::MatrixXd& X) { return sym_eigs(X).eigenvalues().maxCoeff(); }

double condition_number(const Eigen::MatrixXd& X) {
    const auto solver = sym_eigs(X);
    const double lo = solver.eigenvalues().minCoeff();
    const double hi = solver.eigenvalues().maxCoeff();
    if (lo <= 0.0) {
        throw std::invalid_argument("condition_number: matrix is not positive definite, "
                                    "lambda_min = " +
                                    std::to_string(lo));
    }
    return hi / lo;
}

Eigen::MatrixXd sqrt_spd(const Eigen::MatrixXd& X) {
    const auto solver = sym_eigs(X);
    const double lo = solver.eigenvalues().minCoeff();
    if (lo < -1e-10 * std::max(1.0, solver.eigenvalues().maxCoeff())) {
        throw std::invalid_argument("sqrt_spd: matrix is not positive semidefinite");
    }
    const Eigen::VectorXd d = solver.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return solver.eigenvectors() * d.asDiagonal() * solver.eigenvectors().transpose();
}

Eigen::MatrixXd matrix_sign(const Eigen::MatrixXd& A, int max_iterations) {
    require_square(A, "A");
    require_finite(A, "A");
    const Eigen::Index n = A.rows();

    Eigen::MatrixXd S = A;
    for (int it = 0; it < max_iterations; ++it) {
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(S);
        // Determinant scaling via log|det| to avoid overflow.
        double logdet = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double d = std::abs(lu.matrixLU()(i, i));
            if (d == 0.0 || !std::isfinite(d)) {
                throw NumericalError("matrix_sign: singular iterate (eigenvalue on the "
                                     "imaginary axis?)");
            }
            logdet += std::log(d);
        }
        const double mu = std::exp(-logdet / static_cast<double>(n));
        const Eigen::MatrixXd S_next =
            0.5 * (mu * S + (1.0 / mu) * lu.inverse());
        const double step = (S_next - S).norm();
        S = S_next;
        if (step <= 1e-14 * std::max(1.0, S.norm())) {
            break;
        }
    }
    const double check = (S * S - Eigen::MatrixXd::Identity(n, n)).norm();
    if (check > 1e-6 * static_cast<double>(n)) {
        throw NumericalError("matrix_sign: iteration did not converge, ||S^2 - I|| = " +
                             std::to_string(check));
    }
    return S;
}

SpectralSplit spectral_split(const Eigen::MatrixXd& A) {
    require_square(A, "A");
    const Eigen::Index n = A.rows();

    const Eigen::MatrixXd S = matrix_sign(A);
    const Eigen::MatrixXd P_unstable = 0.5 * (Eigen::MatrixXd::Identity(n, n) + S);
    const Eigen::MatrixXd P_stable = 0.5 * (Eigen::MatrixXd::Identity(n, n) - S);

    const auto basis_of = [n](const Eigen::MatrixXd& projector) {
        const int rank = static_cast<int>(std::llround(projector.trace()));
        if (rank <= 0) {
            return Eigen::MatrixXd(n, 0);
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(projector);
        Eigen::MatrixXd Q = qr.householderQ();
        return Eigen::MatrixXd(Q.leftCols(rank));
    };

    SpectralSplit split;
    split.unstable_basis = basis_of(P_unstable);
    split.stable_basis = basis_of(P_stable);
    if (split.unstable_basis.cols() + split.stable_basis.cols() != n) {
        throw NumericalError("spectral_split: projector ranks do not add up");
    }
    return split;
}

} // namespace cclqr::linalg
