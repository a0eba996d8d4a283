#include "cclqr/sector_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cclqr/dmp.hpp"
#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"
#include "cclqr/rng.hpp"

namespace cclqr {

namespace {

// K M^{-1} without forming the inverse; throws when M is numerically singular.
Eigen::MatrixXd right_solve(const Eigen::MatrixXd& K, const Eigen::MatrixXd& M,
                            const char* what) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 1e-12 * std::max(smax, 1e-300)) {
        throw NumericalError(std::string(what) + ": transition matrix is numerically singular "
                                                 "(tau too large?)");
    }
    return M.transpose().partialPivLu().solve(K.transpose()).transpose();
}

} // namespace

BaselineLqr make_baseline(const LtiSystem& sys, const CostSpec& cost) {
    BaselineLqr base;
    base.sys = sys;
    base.cost = cost;
    base.care = riccati::solve_care(sys.A, sys.B, cost.Q, cost.R);
    base.A_cl = sys.A + sys.B * base.care.K;
    return base;
}

Eigen::MatrixXd zoh_transition(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                               const Eigen::MatrixXd& K, double s) {
    linalg::require_square(A, "A");
    if (B.rows() != A.rows() || K.cols() != A.rows() || K.rows() != B.cols()) {
        throw std::invalid_argument("zoh_transition: dimension mismatch");
    }
    if (!(s >= 0.0) || !std::isfinite(s)) {
        throw std::invalid_argument("zoh_transition: s must be finite and >= 0");
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    if (svd.singularValues().minCoeff() <= 1e-12 * svd.singularValues().maxCoeff()) {
        throw std::invalid_argument("zoh_transition: A is numerically singular");
    }
    const Eigen::MatrixXd E = linalg::matrix_exponential(A, s);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    return E + (E - I) * A.partialPivLu().solve(B * K);
}

Eigen::MatrixXd deployed_gain(const ReducedModel& rm, const CostSpec& cost, double tau,
                              double tau_g) {
    if (!(tau > 0.0) || !(tau_g > 0.0)) {
        throw std::invalid_argument("deployed_gain: tau and tau_g must be positive");
    }
    const double phi = flop_count(rm.order, static_cast<int>(cost.R.rows()));
    const double T = horizon_from_timing(tau, phi, tau_g);
    const int steps = riccati::horizon_steps(T, tau);

    const Eigen::MatrixXd Q_reg = regularized_state_cost(rm.Q_r);
    const riccati::DiscretizedProblem dp =
        riccati::euler_discretize(rm.A_r, rm.B_r, Q_reg, cost.R, tau);
    const riccati::DarrResult darr = riccati::darr_finite_horizon(dp, dp.Q, steps);
    return darr.K * rm.U.transpose();
}

std::pair<double, double> sector_norms(const BaselineLqr& base, const Eigen::MatrixXd& K_dep,
                                       double tau) {
    const Eigen::MatrixXd G_star = zoh_transition(base.sys.A, base.sys.B, base.care.K, tau);
    const Eigen::MatrixXd G_hat = zoh_transition(base.sys.A, base.sys.B, K_dep, tau);
    const double L_star =
        linalg::operator_norm(right_solve(K_dep, G_star, "sector_norms") - base.care.K);
    const double L_hat =
        linalg::operator_norm(right_solve(K_dep, G_hat, "sector_norms") - base.care.K);
    return {L_star, L_hat};
}

SectorSample sector_gain_at(const BaselineLqr& base, const ReducedModel& rm, double tau,
                            double tau_g) {
    if (!(tau > 0.0) || !(tau_g > 0.0)) {
        throw std::invalid_argument("sector_gain_at: tau and tau_g must be positive");
    }
    const double phi = flop_count(rm.order, base.sys.nu());
    const double T = horizon_from_timing(tau, phi, tau_g);

    SectorSample sample;
    sample.tau = tau;
    sample.T_star = T;
    sample.timing_ok = T >= tau;
    sample.steps = riccati::horizon_steps(T, tau);

    const Eigen::MatrixXd K_dep = deployed_gain(rm, base.cost, tau, tau_g);
    const auto [L_star, L_hat] = sector_norms(base, K_dep, tau);
    sample.L_star = L_star;
    sample.L_hat = L_hat;
    return sample;
}

std::vector<SectorSample> sample_sector_gains(const BaselineLqr& base, const ReducedModel& rm,
                                              const std::vector<double>& taus, double tau_g) {
    std::vector<SectorSample> samples;
    samples.reserve(taus.size());
    for (double tau : taus) {
        samples.push_back(sector_gain_at(base, rm, tau, tau_g));
    }
    return samples;
}

std::vector<double> log_uniform_taus(double lo, double hi, int count, std::uint64_t seed) {
    if (!(0.0 < lo && lo < hi)) {
        throw std::invalid_argument("log_uniform_taus: need 0 < lo < hi");
    }
    if (count < 1) {
        throw std::invalid_argument("log_uniform_taus: count must be >= 1");
    }
    Rng rng(seed);
    std::vector<double> taus(count);
    for (double& t : taus) {
        t = rng.log_uniform(lo, hi);
    }
    std::sort(taus.begin(), taus.end());
    return taus;
}

namespace {

struct FitBasis {
    Eigen::MatrixXd X; // regressors
    Eigen::VectorXd y; // target, L - L_M
    Eigen::VectorXd L; // raw gains (for the relative residual)
};

FitBasis fit_basis(const std::vector<SectorSample>& samples, double alpha, double L_M,
                   FitForm form, TrajectoryKind kind) {
    const int n = static_cast<int>(samples.size());
    const int cols = (form == FitForm::quadratic) ? 4 : 3;
    FitBasis basis;
    basis.X.resize(n, cols);
    basis.y.resize(n);
    basis.L.resize(n);
    for (int i = 0; i < n; ++i) {
        const SectorSample& s = samples[i];
        const double decay = std::exp(-alpha * s.T_star);
        int c = 0;
        basis.X(i, c++) = s.tau;
        if (form == FitForm::quadratic) {
            basis.X(i, c++) = s.tau * s.tau;
        }
        basis.X(i, c++) = decay;
        basis.X(i, c++) = s.tau * decay;
        basis.L(i) = (kind == TrajectoryKind::baseline) ? s.L_star : s.L_hat;
        basis.y(i) = basis.L(i) - L_M;
    }
    return basis;
}

Eigen::VectorXd ols(const FitBasis& basis, double* rss) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(basis.X);
    if (qr.rank() < basis.X.cols()) {
        throw NumericalError("fit_sector_bound: rank-deficient regression (collinear samples)");
    }
    const Eigen::VectorXd coef = qr.solve(basis.y);
    if (rss != nullptr) {
        *rss = (basis.X * coef - basis.y).squaredNorm();
    }
    return coef;
}

} // namespace

SectorBoundFit fit_sector_bound(const std::vector<SectorSample>& samples, double alpha_i,
                                double L_M, FitForm form, TrajectoryKind kind) {
    const int min_samples = (form == FitForm::linear) ? 4 : 5;
    if (static_cast<int>(samples.size()) < min_samples) {
        throw std::invalid_argument("fit_sector_bound: need at least " +
                                    std::to_string(min_samples) + " samples, got " +
                                    std::to_string(samples.size()));
    }
    if (!(alpha_i > 0.0)) {
        throw std::invalid_argument("fit_sector_bound: alpha_i must be positive");
    }

    SectorBoundFit fit;
    fit.form = form;
    fit.kind = kind;
    fit.L_M = L_M;
    fit.alpha_used = alpha_i;

    Eigen::VectorXd coef;
    if (form == FitForm::fitted_alpha) {
        // One-dimensional search over the decay rate with an inner linear
        // least-squares solve; coarse log grid then golden-section refinement.
        const double lo = 0.1 * alpha_i;
        const double hi = 10.0 * alpha_i;
        const auto rss_at = [&](double alpha) {
            double rss = 0.0;
            ols(fit_basis(samples, alpha, L_M, FitForm::linear, kind), &rss);
            return rss;
        };

        const int coarse = 64;
        double best_alpha = alpha_i;
        double best_rss = std::numeric_limits<double>::infinity();
        int best_idx = 0;
        std::vector<double> grid(coarse);
        for (int i = 0; i < coarse; ++i) {
            grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (coarse - 1));
            const double rss = rss_at(grid[i]);
            if (rss < best_rss) {
                best_rss = rss;
                best_alpha = grid[i];
                best_idx = i;
            }
        }
        double a = grid[std::max(0, best_idx - 1)];
        double b = grid[std::min(coarse - 1, best_idx + 1)];
        const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - gr * (b - a);
        double x2 = a + gr * (b - a);
        double f1 = rss_at(x1);
        double f2 = rss_at(x2);
        for (int i = 0; i < 60; ++i) {
            if (f1 < f2) {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = rss_at(x1);
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = rss_at(x2);
            }
        }
        best_alpha = 0.5 * (a + b);
        fit.alpha_used = best_alpha;
        coef = ols(fit_basis(samples, best_alpha, L_M, FitForm::linear, kind), nullptr);
    } else {
        coef = ols(fit_basis(samples, alpha_i, L_M, form, kind), nullptr);
    }

    int c = 0;
    fit.C1 = coef(c++);
    if (form == FitForm::quadratic) {
        fit.C1q = coef(c++);
    }
    fit.C2 = coef(c++);
    fit.C3 = coef(c++);

    // The form represents a nonnegative bound; clamp stray negative
    // coefficients and flag the fit.
    for (double* v : {&fit.C1, &fit.C1q, &fit.C2, &fit.C3}) {
        if (*v < 0.0) {
            *v = 0.0;
            fit.clamped = true;
        }
    }

    double sq_err = 0.0;
    double sq_val = 0.0;
    for (const SectorSample& s : samples) {
        const double value = (kind == TrajectoryKind::baseline) ? s.L_star : s.L_hat;
        const double pred = fit.evaluate(s.tau, s.T_star);
        sq_err += (pred - value) * (pred - value);
        sq_val += value * value;
    }
    fit.rms_residual = std::sqrt(sq_err / static_cast<double>(samples.size()));
    fit.relative_rms_residual = sq_val > 0.0 ? std::sqrt(sq_err / sq_val) : 0.0;
    return fit;
}

} // namespace cclqr
