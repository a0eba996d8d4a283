#include "cclqr/model_reduction.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"
#include "cclqr/riccati.hpp"

namespace cclqr {

namespace {

// Factor of a symmetric positive semidefinite Gramian, W = L L'. Small
// negative eigenvalues from the Lyapunov solve are clamped to zero.
Eigen::MatrixXd gramian_factor(const Eigen::MatrixXd& W) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(linalg::symmetrize(W));
    if (eig.info() != Eigen::Success) {
        throw NumericalError("balanced_truncation: Gramian eigendecomposition failed");
    }
    const double floor = -1e-10 * std::max(1.0, eig.eigenvalues().maxCoeff());
    if (eig.eigenvalues().minCoeff() < floor) {
        throw NumericalError("balanced_truncation: Gramian is indefinite");
    }
    const Eigen::VectorXd d = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * d.asDiagonal();
}

} // namespace

Eigen::MatrixXd regularized_state_cost(const Eigen::MatrixXd& Q_r) {
    if (linalg::min_eigenvalue_sym(Q_r) < 1e-10) {
        return linalg::symmetrize(Q_r) +
               1e-10 * Eigen::MatrixXd::Identity(Q_r.rows(), Q_r.cols());
    }
    return linalg::symmetrize(Q_r);
}

ReducedModel balanced_truncation(const LtiSystem& sys, const CostSpec& cost, int order) {
    const int n = sys.nx();
    if (order < 1 || order > n) {
        throw std::invalid_argument("balanced_truncation: order must be in [1, " +
                                    std::to_string(n) + "], got " + std::to_string(order));
    }

    ReducedModel rm;
    rm.order = order;

    if (order == n) {
        rm.U = Eigen::MatrixXd::Identity(n, n);
        rm.V = Eigen::MatrixXd::Identity(n, n);
        rm.A_r = sys.A;
        rm.B_r = sys.B;
        rm.Q_r = linalg::symmetrize(cost.Q);
        return rm;
    }

    // Split the state space into stable and unstable invariant subspaces; the
    // unstable part is carried over exactly and only the stable part is
    // balance-truncated.
    const linalg::SpectralSplit split = linalg::spectral_split(sys.A);
    const int n_unstable = static_cast<int>(split.unstable_basis.cols());
    const int n_stable = n - n_unstable;
    if (order < n_unstable) {
        throw std::invalid_argument("balanced_truncation: order " + std::to_string(order) +
                                    " is smaller than the unstable subspace dimension " +
                                    std::to_string(n_unstable));
    }

    Eigen::MatrixXd W(n, n);
    W << split.stable_basis, split.unstable_basis;
    const Eigen::MatrixXd W_inv = W.partialPivLu().inverse();

    const Eigen::MatrixXd A_blocks = W_inv * sys.A * W;
    const Eigen::MatrixXd A_ss = A_blocks.topLeftCorner(n_stable, n_stable);
    const Eigen::MatrixXd A_uu = A_blocks.bottomRightCorner(n_unstable, n_unstable);
    const double offdiag = A_blocks.topRightCorner(n_stable, n_unstable).norm() +
                           A_blocks.bottomLeftCorner(n_unstable, n_stable).norm();
    if (offdiag > 1e-6 * std::max(1.0, sys.A.norm())) {
        throw NumericalError("balanced_truncation: stable/unstable decoupling failed");
    }

    const Eigen::MatrixXd B_split = W_inv * sys.B;
    const Eigen::MatrixXd B_s = B_split.topRows(n_stable);
    const Eigen::MatrixXd B_u = B_split.bottomRows(n_unstable);

    // Gramians of the stable subsystem, with the cost weight as output map.
    const Eigen::MatrixXd C_s = linalg::sqrt_spd(cost.Q) * split.stable_basis;
    const Eigen::MatrixXd Wc = linalg::solve_lyapunov(A_ss.transpose(), B_s * B_s.transpose());
    const Eigen::MatrixXd Wo = linalg::solve_lyapunov(A_ss, C_s.transpose() * C_s);

    const Eigen::MatrixXd Lc = gramian_factor(Wc);
    const Eigen::MatrixXd Lo = gramian_factor(Wo);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Lo.transpose() * Lc,
                                          Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd hankel = svd.singularValues();

    const int r_s = order - n_unstable;
    if (r_s > 0 && hankel(r_s - 1) <= 1e-12 * std::max(hankel(0), 1e-300)) {
        throw NumericalError("balanced_truncation: requested order exceeds the numerical rank "
                             "of the Hankel spectrum");
    }

    const Eigen::MatrixXd Y_s = W_inv.topRows(n_stable).transpose();
    const Eigen::MatrixXd Y_u = W_inv.bottomRows(n_unstable).transpose();

    Eigen::MatrixXd V_full(n, order);
    Eigen::MatrixXd U_full(n, order);
    if (r_s > 0) {
        const Eigen::VectorXd scale = hankel.head(r_s).cwiseSqrt().cwiseInverse();
        const Eigen::MatrixXd T1 = Lc * svd.matrixV().leftCols(r_s) * scale.asDiagonal();
        const Eigen::MatrixXd S1 = Lo * svd.matrixU().leftCols(r_s) * scale.asDiagonal();
        V_full << split.stable_basis * T1, split.unstable_basis;
        U_full << Y_s * S1, Y_u;
    } else {
        V_full << split.unstable_basis;
        U_full << Y_u;
    }

    rm.U = U_full;
    rm.V = V_full;
    rm.A_r = U_full.transpose() * sys.A * V_full;
    rm.B_r = U_full.transpose() * sys.B;
    rm.Q_r = linalg::symmetrize(V_full.transpose() * cost.Q * V_full);

    const double pg = (U_full.transpose() * V_full - Eigen::MatrixXd::Identity(order, order))
                          .norm();
    if (pg > 1e-8) {
        throw NumericalError("balanced_truncation: Petrov-Galerkin condition violated, "
                             "||U'V - I|| = " +
                             std::to_string(pg));
    }
    if (!riccati::is_controllable(rm.A_r, rm.B_r)) {
        throw NumericalError("balanced_truncation: reduced pair lost controllability");
    }
    return rm;
}

ReducedModel rom_riccati(ReducedModel rm, const CostSpec& cost) {
    const Eigen::MatrixXd Q_reg = regularized_state_cost(rm.Q_r);
    const riccati::RiccatiSolution sol = riccati::solve_care(rm.A_r, rm.B_r, Q_reg, cost.R);
    rm.P_r = sol.P;
    rm.K_r = sol.K;
    rm.alpha = -linalg::spectral_abscissa(rm.A_r + rm.B_r * rm.K_r);
    if (!(rm.alpha > 0.0)) {
        throw NumericalError("rom_riccati: reduced closed loop is not stable");
    }
    return rm;
}

double rom_sector_gain(const ReducedModel& rm, const Eigen::MatrixXd& P_star,
                       const LtiSystem& sys, const CostSpec& cost) {
    if (rm.P_r.size() == 0) {
        throw std::invalid_argument("rom_sector_gain: run rom_riccati first");
    }
    if (P_star.rows() != sys.nx() || P_star.cols() != sys.nx()) {
        throw std::invalid_argument("rom_sector_gain: P_star dimension mismatch");
    }
    const Eigen::MatrixXd lifted = rm.U * rm.P_r * rm.U.transpose() - P_star;
    const Eigen::LLT<Eigen::MatrixXd> R_chol(cost.R);
    return linalg::operator_norm(R_chol.solve(sys.B.transpose() * lifted));
}

std::vector<ReducedModel> build_model_family(const LtiSystem& sys, const CostSpec& cost,
                                             const std::vector<int>& orders,
                                             const Eigen::MatrixXd& P_star) {
    std::vector<ReducedModel> family;
    family.reserve(orders.size());
    int index = 0;
    for (int order : orders) {
        ReducedModel rm = rom_riccati(balanced_truncation(sys, cost, order), cost);
        rm.index = index++;
        rm.sector_gain = rom_sector_gain(rm, P_star, sys, cost);
        family.push_back(std::move(rm));
    }
    return family;
}

} // namespace cclqr
