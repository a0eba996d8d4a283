#include "cclqr/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"

namespace cclqr {

namespace {

long substeps_per_interval(double tau, double h) {
    const double ratio = tau / h;
    const long m = std::lround(ratio);
    if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 * std::max(1.0, ratio)) {
        throw std::invalid_argument("sub-step h = " + std::to_string(h) +
                                    " does not divide the sampling time tau = " +
                                    std::to_string(tau));
    }
    return m;
}

double stage_cost(const Eigen::VectorXd& x, const Eigen::VectorXd& u, const Eigen::MatrixXd& Q,
                  const Eigen::MatrixXd& R) {
    return x.dot(Q * x) + u.dot(R * u);
}

// Within-interval maps G_j = e^{A j h} + (e^{A j h} - I) A^{-1} B K for
// j = 0..m; the held input is evaluated at the interval start, so advancing
// sub-step by sub-step with G(h) would be wrong.
std::vector<Eigen::MatrixXd> interval_maps(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                           const Eigen::MatrixXd& K, double h, long m) {
    const Eigen::Index n = A.rows();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    if (svd.singularValues().minCoeff() <= 1e-12 * svd.singularValues().maxCoeff()) {
        throw std::invalid_argument("simulate_deployed: A is numerically singular");
    }
    const Eigen::MatrixXd M = A.partialPivLu().solve(B * K);
    const Eigen::MatrixXd E_h = linalg::matrix_exponential(A, h);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);

    std::vector<Eigen::MatrixXd> G(m + 1);
    Eigen::MatrixXd E_j = I;
    for (long j = 0; j <= m; ++j) {
        G[j] = E_j + (E_j - I) * M;
        if (j < m) {
            E_j = E_h * E_j;
        }
    }
    return G;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = p * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

} // namespace

double default_substep(double tau) {
    if (!(tau > 0.0)) {
        throw std::invalid_argument("default_substep: tau must be positive");
    }
    const long m = std::max<long>(1, std::min<long>(20, static_cast<long>(std::floor(tau / 1e-4))));
    return tau / static_cast<double>(m);
}

Trajectory simulate_baseline(const Eigen::MatrixXd& A_cl, const Eigen::MatrixXd& K,
                             const CostSpec& cost, const Eigen::VectorXd& x0, double T_sim,
                             double h) {
    linalg::require_square(A_cl, "A_cl");
    if (x0.size() != A_cl.rows() || K.cols() != A_cl.rows()) {
        throw std::invalid_argument("simulate_baseline: dimension mismatch");
    }
    if (!(h > 0.0) || !(T_sim > 0.0)) {
        throw std::invalid_argument("simulate_baseline: T_sim and h must be positive");
    }
    if (linalg::spectral_abscissa(A_cl) >= 0.0) {
        throw std::invalid_argument("simulate_baseline: A_cl must be Hurwitz");
    }

    const long n_steps = std::lround(T_sim / h);
    const Eigen::MatrixXd E = linalg::matrix_exponential(A_cl, h);

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.inputs.reserve(n_steps + 1);
    traj.cumulative_cost.reserve(n_steps + 1);

    Eigen::VectorXd x = x0;
    double cum = 0.0;
    for (long k = 0; k <= n_steps; ++k) {
        const Eigen::VectorXd u = K * x;
        traj.times.push_back(static_cast<double>(k) * h);
        traj.states.push_back(x);
        traj.inputs.push_back(u);
        traj.cumulative_cost.push_back(cum);
        if (k < n_steps) {
            cum += h * stage_cost(x, u, cost.Q, cost.R);
            x = E * x;
            if (x.norm() > kDivergenceCutoff) {
                traj.diverged = true;
                break;
            }
        }
    }
    return traj;
}

Trajectory simulate_deployed(const LtiSystem& sys, const CostSpec& cost,
                             const Eigen::MatrixXd& K_dep, double tau, const Eigen::VectorXd& x0,
                             double T_sim, double h) {
    if (x0.size() != sys.nx() || K_dep.cols() != sys.nx() || K_dep.rows() != sys.nu()) {
        throw std::invalid_argument("simulate_deployed: dimension mismatch");
    }
    if (!(tau > 0.0) || !(h > 0.0) || !(T_sim > 0.0)) {
        throw std::invalid_argument("simulate_deployed: tau, h and T_sim must be positive");
    }
    const long m = substeps_per_interval(tau, h);
    const std::vector<Eigen::MatrixXd> G = interval_maps(sys.A, sys.B, K_dep, h, m);

    const long n_steps = std::lround(T_sim / h);

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.inputs.reserve(n_steps + 1);
    traj.cumulative_cost.reserve(n_steps + 1);

    Eigen::VectorXd x_anchor = x0; // state at the current sampling instant
    Eigen::VectorXd u = K_dep * x_anchor;
    double cum = 0.0;
    long emitted = 0;
    bool diverged = false;
    for (long k = 0; emitted <= n_steps && !diverged; ++k) {
        for (long j = 0; j < m && emitted <= n_steps; ++j) {
            const Eigen::VectorXd x = (j == 0) ? x_anchor : Eigen::VectorXd(G[j] * x_anchor);
            traj.times.push_back(static_cast<double>(emitted) * h);
            traj.states.push_back(x);
            traj.inputs.push_back(u);
            traj.cumulative_cost.push_back(cum);
            if (emitted < n_steps) {
                cum += h * stage_cost(x, u, cost.Q, cost.R);
            }
            ++emitted;
            if (x.norm() > kDivergenceCutoff) {
                diverged = true;
                break;
            }
        }
        if (emitted > n_steps || diverged) {
            break;
        }
        x_anchor = G[m] * x_anchor;
        u = K_dep * x_anchor;
    }
    traj.diverged = diverged;
    return traj;
}

double riemann_cost(const Trajectory& traj, const Eigen::MatrixXd& Q, const Eigen::MatrixXd& R,
                    double h) {
    if (traj.times.size() < 2) {
        throw std::invalid_argument("riemann_cost: trajectory too short");
    }
    const double spacing = traj.times[1] - traj.times[0];
    if (std::abs(spacing - h) > 1e-9 * std::max(1.0, h)) {
        throw std::invalid_argument("riemann_cost: trajectory is not sampled at spacing h");
    }
    double cost = 0.0;
    for (std::size_t k = 0; k + 1 < traj.times.size(); ++k) {
        cost += h * stage_cost(traj.states[k], traj.inputs[k], Q, R);
    }
    return cost;
}

Eigen::VectorXd random_unit_vector(int n, Rng& rng) {
    Eigen::VectorXd v(n);
    double norm = 0.0;
    do {
        for (int i = 0; i < n; ++i) {
            v(i) = rng.normal();
        }
        norm = v.norm();
    } while (norm < 1e-12);
    return v / norm;
}

SuboptStats monte_carlo_subopt(const BaselineLqr& base, const Eigen::MatrixXd& K_dep, double tau,
                               int n_runs, double T_sim, std::uint64_t seed) {
    if (n_runs < 1) {
        throw std::invalid_argument("monte_carlo_subopt: n_runs must be >= 1");
    }
    const int n = base.sys.nx();
    const double h = default_substep(tau);
    const long m = substeps_per_interval(tau, h);
    const long n_steps = std::lround(T_sim / h);
    const long full_intervals = n_steps / m;
    const long leftover = n_steps % m;

    // Per-interval quadratic cost forms: the Riemann sum over one interval is
    // x' Omega x for the interval-start state x, so each run only needs one
    // matrix-vector product and one quadratic form per interval and system.
    const std::vector<Eigen::MatrixXd> G = interval_maps(base.sys.A, base.sys.B, K_dep, h, m);
    const Eigen::MatrixXd E_b = linalg::matrix_exponential(base.A_cl, h);
    const Eigen::MatrixXd C_b =
        base.cost.Q + base.care.K.transpose() * base.cost.R * base.care.K;
    const Eigen::MatrixXd R_dep = K_dep.transpose() * base.cost.R * K_dep;

    Eigen::MatrixXd omega_dep = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd omega_dep_tail = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd omega_base = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd omega_base_tail = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd E_j = Eigen::MatrixXd::Identity(n, n);
    for (long j = 0; j < m; ++j) {
        const Eigen::MatrixXd dep_term = h * (G[j].transpose() * base.cost.Q * G[j] + R_dep);
        const Eigen::MatrixXd base_term = h * (E_j.transpose() * C_b * E_j);
        omega_dep += dep_term;
        omega_base += base_term;
        if (j < leftover) {
            omega_dep_tail += dep_term;
            omega_base_tail += base_term;
        }
        E_j = E_b * E_j;
    }
    const Eigen::MatrixXd step_dep = G[m];
    const Eigen::MatrixXd step_base = E_j; // e^{A_cl m h}

    SuboptStats stats;
    stats.runs = n_runs;
    stats.seed = seed;
    stats.gaps.reserve(n_runs);

    const Rng master(seed);
    for (int run = 0; run < n_runs; ++run) {
        Rng rng = master.fork(static_cast<std::uint64_t>(run));
        const Eigen::VectorXd x0 = random_unit_vector(n, rng);

        Eigen::VectorXd x = x0;
        Eigen::VectorXd xb = x0;
        double J_dep = 0.0;
        double J_base = 0.0;
        bool diverged = false;
        for (long k = 0; k < full_intervals; ++k) {
            J_dep += x.dot(omega_dep * x);
            J_base += xb.dot(omega_base * xb);
            x = step_dep * x;
            xb = step_base * xb;
            if (x.norm() > kDivergenceCutoff) {
                diverged = true;
                break;
            }
        }
        if (!diverged && leftover > 0) {
            J_dep += x.dot(omega_dep_tail * x);
            J_base += xb.dot(omega_base_tail * xb);
        }
        if (diverged) {
            ++stats.diverged_runs;
        }
        stats.gaps.push_back(std::abs(J_dep - J_base));
    }

    std::vector<double> sorted = stats.gaps;
    std::sort(sorted.begin(), sorted.end());
    stats.q1 = quantile_sorted(sorted, 0.25);
    stats.median = quantile_sorted(sorted, 0.50);
    stats.q3 = quantile_sorted(sorted, 0.75);
    const double iqr = stats.q3 - stats.q1;
    for (double gap : sorted) {
        if (gap < stats.q1 - 1.5 * iqr || gap > stats.q3 + 1.5 * iqr) {
            stats.outliers.push_back(gap);
        }
    }
    return stats;
}

LocalTauResult local_optimal_tau(const Eigen::MatrixXd& A_cl, const LtiSystem& sys,
                                 const std::function<Eigen::MatrixXd(double)>& gain_builder,
                                 double tau_lo, double tau_hi) {
    if (!(0.0 < tau_lo && tau_lo < tau_hi)) {
        throw std::invalid_argument("local_optimal_tau: need 0 < tau_lo < tau_hi");
    }
    const auto objective = [&](double tau) {
        try {
            const Eigen::MatrixXd G = zoh_transition(sys.A, sys.B, gain_builder(tau), tau);
            return linalg::operator_norm(linalg::matrix_exponential(A_cl, tau) - G);
        } catch (const std::exception&) {
            return std::numeric_limits<double>::infinity();
        }
    };

    const int coarse = 48;
    std::vector<double> grid(coarse);
    std::vector<double> values(coarse);
    int best = 0;
    for (int i = 0; i < coarse; ++i) {
        grid[i] = tau_lo * std::pow(tau_hi / tau_lo, static_cast<double>(i) / (coarse - 1));
        values[i] = objective(grid[i]);
        if (values[i] < values[best]) {
            best = i;
        }
    }

    LocalTauResult result;
    if (best == 0 || best == coarse - 1) {
        result.tau = grid[best];
        result.objective = values[best];
        result.boundary = true;
        return result;
    }

    double a = grid[best - 1];
    double b = grid[best + 1];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = b - gr * (b - a);
    double x2 = a + gr * (b - a);
    double f1 = objective(x1);
    double f2 = objective(x2);
    for (int i = 0; i < 80; ++i) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = objective(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = objective(x2);
        }
    }
    result.tau = 0.5 * (a + b);
    result.objective = objective(result.tau);
    result.boundary = false;
    return result;
}

SmallGainReport verify_small_gain_trajectory(const Trajectory& baseline,
                                             const Trajectory& deployed,
                                             const DissConstants& consts, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw std::invalid_argument("verify_small_gain_trajectory: rho must lie in (0, 1)");
    }
    const std::size_t len = std::min(baseline.times.size(), deployed.times.size());
    if (len == 0) {
        throw std::invalid_argument("verify_small_gain_trajectory: empty trajectory");
    }
    for (std::size_t k = 0; k < len; ++k) {
        if (std::abs(baseline.times[k] - deployed.times[k]) > 1e-9) {
            throw std::invalid_argument("verify_small_gain_trajectory: mismatched time grids");
        }
    }
    if ((baseline.states[0] - deployed.states[0]).norm() > 1e-9) {
        throw std::invalid_argument("verify_small_gain_trajectory: trajectories must share x0");
    }

    const double x0_norm = baseline.states[0].norm();
    const double rate = 0.5 * consts.c * (1.0 - rho);
    const double amp = std::sqrt(consts.kappa) * x0_norm;

    SmallGainReport report;
    report.max_violation = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) {
        const double gap = (deployed.states[k] - baseline.states[k]).norm();
        const double envelope = amp * std::exp(-rate * baseline.times[k]);
        const double violation = gap - envelope;
        report.max_gap = std::max(report.max_gap, gap);
        if (violation > report.max_violation) {
            report.max_violation = violation;
            report.time_of_max = baseline.times[k];
        }
    }
    return report;
}

} // namespace cclqr
