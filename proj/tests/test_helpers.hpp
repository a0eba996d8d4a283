#pragma once

#include <Eigen/Dense>

#include "cclqr/linalg.hpp"
#include "cclqr/rng.hpp"

namespace cclqr::testing {

inline Eigen::MatrixXd random_matrix(int rows, int cols, Rng& rng) {
    Eigen::MatrixXd M(rows, cols);
    for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
            M(i, j) = rng.normal();
        }
    }
    return M;
}

inline Eigen::MatrixXd random_symmetric(int n, Rng& rng) {
    const Eigen::MatrixXd M = random_matrix(n, n, rng);
    return 0.5 * (M + M.transpose());
}

inline Eigen::MatrixXd random_spd(int n, Rng& rng) {
    const Eigen::MatrixXd M = random_matrix(n, n, rng);
    return M * M.transpose() + Eigen::MatrixXd::Identity(n, n);
}

// Random matrix shifted to have spectral abscissa <= -margin.
inline Eigen::MatrixXd random_hurwitz(int n, Rng& rng, double margin = 1.0) {
    Eigen::MatrixXd A = random_matrix(n, n, rng);
    const double abscissa = linalg::spectral_abscissa(A);
    A -= (abscissa + margin) * Eigen::MatrixXd::Identity(n, n);
    return A;
}

} // namespace cclqr::testing
