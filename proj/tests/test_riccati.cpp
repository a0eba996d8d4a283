#include <doctest.h>

#include <cmath>
#include <vector>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"
#include "cclqr/riccati.hpp"
#include "test_helpers.hpp"

using namespace cclqr;
using namespace cclqr::riccati;
using cclqr::testing::random_matrix;

namespace {

Eigen::MatrixXd scalar(double v) {
    Eigen::MatrixXd M(1, 1);
    M << v;
    return M;
}

// Seeded controllable test system with a mix of slow and moderate modes.
struct TestSystem {
    Eigen::MatrixXd A, B, Q, R;
};

TestSystem make_test_system(int n, int m, std::uint64_t seed) {
    Rng rng(seed);
    TestSystem sys;
    sys.A = random_matrix(n, n, rng);
    sys.B = random_matrix(n, m, rng);
    sys.Q = Eigen::MatrixXd::Identity(n, n);
    sys.R = Eigen::MatrixXd::Identity(m, m);
    return sys;
}

} // namespace

TEST_CASE("euler discretization") {
    const DiscretizedProblem dp =
        euler_discretize(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(1.0), 0.1);
    CHECK(dp.A(0, 0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(dp.B(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(dp.Q(0, 0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(dp.R(0, 0) == doctest::Approx(0.1).epsilon(1e-15));

    CHECK_THROWS_AS(euler_discretize(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(1.0), 0.0),
                    std::invalid_argument);

    Rng rng(3);
    const Eigen::MatrixXd A = random_matrix(3, 3, rng);
    const Eigen::MatrixXd B = random_matrix(3, 1, rng);
    const DiscretizedProblem dp3 = euler_discretize(A, B, Eigen::MatrixXd::Identity(3, 3),
                                                    Eigen::MatrixXd::Identity(1, 1), 0.01);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double expected = (i == j ? 1.0 : 0.0) + 0.01 * A(i, j);
            CHECK(dp3.A(i, j) == doctest::Approx(expected).epsilon(1e-15));
        }
    }
}

TEST_CASE("CARE scalar closed forms") {
    const RiccatiSolution sol = solve_care(scalar(-1.0), scalar(1.0), scalar(1.0), scalar(1.0));
    CHECK(std::abs(sol.P(0, 0) - (std::sqrt(2.0) - 1.0)) < 1e-10);
    CHECK(std::abs(sol.K(0, 0) - (1.0 - std::sqrt(2.0))) < 1e-10);

    const RiccatiSolution integrator =
        solve_care(scalar(0.0), scalar(1.0), scalar(1.0), scalar(1.0));
    CHECK(std::abs(integrator.P(0, 0) - 1.0) < 1e-10);
    CHECK(std::abs(integrator.K(0, 0) + 1.0) < 1e-10);
}

TEST_CASE("CARE on random systems: residual, stability, DARE limit") {
    const TestSystem sys = make_test_system(6, 2, 101);
    REQUIRE(is_controllable(sys.A, sys.B));

    const RiccatiSolution sol = solve_care(sys.A, sys.B, sys.Q, sys.R);
    CHECK(care_residual(sys.A, sys.B, sys.Q, sys.R, sol.P) <= 1e-8 * std::max(1.0, sol.P.norm()));
    CHECK(linalg::spectral_abscissa(sys.A + sys.B * sol.K) < 0.0);
    CHECK(linalg::min_eigenvalue_sym(sol.P) > 0.0);

    // Long-horizon discrete fixed point approaches the continuous solution
    // linearly in tau (this pins the normalization: P_tau itself converges to
    // the CARE solution, no 1/tau rescaling).
    const auto dare_err = [&](double tau) {
        const DiscretizedProblem dp = euler_discretize(sys.A, sys.B, sys.Q, sys.R, tau);
        return (solve_dare(dp).P - sol.P).norm();
    };
    const double e1 = dare_err(1e-3);
    const double e2 = dare_err(5e-4);
    CHECK(e1 < 5e-2 * sol.P.norm());
    CHECK(e1 / e2 > 1.5);
    CHECK(e1 / e2 < 2.5);
}

TEST_CASE("CARE error paths") {
    // Uncontrollable pair: decoupled unstable state that B cannot reach.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
    A(0, 0) = 1.0;
    A(1, 1) = 2.0;
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(2, 1);
    B(0, 0) = 1.0;
    CHECK_THROWS_AS(solve_care(A, B, Eigen::MatrixXd::Identity(2, 2), scalar(1.0)),
                    std::invalid_argument);

    Eigen::MatrixXd Q_indef = Eigen::MatrixXd::Identity(2, 2);
    Q_indef(1, 1) = -1.0;
    Eigen::MatrixXd B2 = Eigen::MatrixXd::Ones(2, 1);
    CHECK_THROWS_AS(solve_care(A, B2, Q_indef, scalar(1.0)), std::invalid_argument);
    CHECK_THROWS_AS(solve_care(A, B2, Eigen::MatrixXd::Identity(2, 2), scalar(-1.0)),
                    std::invalid_argument);
}

TEST_CASE("CARE solution is insensitive to the starting point") {
    const TestSystem sys = make_test_system(4, 1, 107);
    const RiccatiSolution base = solve_care(sys.A, sys.B, sys.Q, sys.R);

    // A valid alternative stabilizing start: the value of a more expensive
    // problem dominates the original solution and keeps the loop stable.
    const RiccatiSolution heavier = solve_care(sys.A, sys.B, 4.0 * sys.Q, sys.R);
    const Eigen::MatrixXd K0 = -sys.R.llt().solve(sys.B.transpose() * heavier.P);
    REQUIRE(linalg::spectral_abscissa(sys.A + sys.B * K0) < 0.0);

    CareOptions opts;
    opts.initial_value = heavier.P;
    const RiccatiSolution alt = solve_care(sys.A, sys.B, sys.Q, sys.R, opts);
    CHECK((base.P - alt.P).norm() <= 1e-7 * std::max(1.0, base.P.norm()));
}

TEST_CASE("DARE closed forms") {
    DiscretizedProblem golden;
    golden.A = scalar(1.0);
    golden.B = scalar(1.0);
    golden.Q = scalar(1.0);
    golden.R = scalar(1.0);
    golden.tau = 1.0;
    const RiccatiSolution sol = solve_dare(golden);
    CHECK(std::abs(sol.P(0, 0) - 0.5 * (1.0 + std::sqrt(5.0))) < 1e-10);

    DiscretizedProblem zero_dyn = golden;
    zero_dyn.A = scalar(0.0);
    CHECK(std::abs(solve_dare(zero_dyn).P(0, 0) - 1.0) < 1e-10);
}

TEST_CASE("first-order gain scaling in tau") {
    const TestSystem sys = make_test_system(5, 1, 113);
    const RiccatiSolution care = solve_care(sys.A, sys.B, sys.Q, sys.R);

    const auto gain_err = [&](double tau) {
        const DiscretizedProblem dp = euler_discretize(sys.A, sys.B, sys.Q, sys.R, tau);
        return (solve_dare(dp).K - care.K).norm();
    };
    // e(tau)/e(tau/2) should sit near 2 across the whole validity range.
    for (double tau : {1e-2, 5e-3, 2.5e-3, 2e-4}) {
        const double ratio = gain_err(tau) / gain_err(0.5 * tau);
        CHECK(ratio > 1.6);
        CHECK(ratio < 2.4);
    }
}

TEST_CASE("DARR fixed point and single step") {
    const TestSystem sys = make_test_system(3, 1, 127);
    const DiscretizedProblem dp = euler_discretize(sys.A, sys.B, sys.Q, sys.R, 0.05);
    const RiccatiSolution fixed = solve_dare(dp);

    const DarrResult at_fixed_point = darr_finite_horizon(dp, fixed.P, 7);
    CHECK((at_fixed_point.P - fixed.P).norm() < 1e-11 * std::max(1.0, fixed.P.norm()));

    // One step from the default terminal equals the recursion formula spelled
    // out directly.
    const Eigen::MatrixXd QN = dp.Q;
    const DarrResult one = darr_finite_horizon(dp, QN, 1);
    const Eigen::MatrixXd inner = dp.R + dp.B.transpose() * QN * dp.B;
    const Eigen::MatrixXd direct =
        dp.A.transpose() * QN * dp.A + dp.Q -
        dp.A.transpose() * QN * dp.B * inner.inverse() * dp.B.transpose() * QN * dp.A;
    CHECK((one.P - direct).norm() < 1e-12 * std::max(1.0, direct.norm()));
    CHECK(one.steps == 1);
}

TEST_CASE("DARR converges geometrically on the golden-ratio system") {
    DiscretizedProblem dp;
    dp.A = scalar(1.0);
    dp.B = scalar(1.0);
    dp.Q = scalar(1.0);
    dp.R = scalar(1.0);
    dp.tau = 1.0;
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));

    const DarrResult darr = darr_finite_horizon(dp, scalar(1.0), 30);
    CHECK(std::abs(darr.P(0, 0) - phi) < 1e-6);

    // Error contraction ratio approaches rho(A_cl)^2.
    const RiccatiSolution fixed = solve_dare(dp);
    const double rho = linalg::spectral_radius(dp.A + dp.B * fixed.K);
    std::vector<double> errors;
    for (int steps = 1; steps <= 12; ++steps) {
        errors.push_back(std::abs(darr_finite_horizon(dp, scalar(1.0), steps).P(0, 0) - phi));
    }
    for (std::size_t k = 5; k + 1 < errors.size(); ++k) {
        const double ratio = errors[k + 1] / errors[k];
        CHECK(ratio == doctest::Approx(rho * rho).epsilon(0.05));
    }
}

TEST_CASE("DARR geometric slope matches the closed-loop spectral radius") {
    const TestSystem sys = make_test_system(5, 1, 131);
    const DiscretizedProblem dp = euler_discretize(sys.A, sys.B, sys.Q, sys.R, 0.05);
    const RiccatiSolution fixed = solve_dare(dp);
    const double log_rate = 2.0 * std::log(linalg::spectral_radius(dp.A + dp.B * fixed.K));

    std::vector<double> ns;
    std::vector<double> logs;
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(5, 5);
    for (int steps = 1; steps <= 4000; ++steps) {
        P = darr_finite_horizon(dp, P, 1).P;
        const double err = (P - fixed.P).norm();
        if (err <= 1e-2 && err >= 1e-10) {
            ns.push_back(static_cast<double>(steps));
            logs.push_back(std::log(err));
        }
        if (err < 1e-10) {
            break;
        }
    }
    REQUIRE(ns.size() >= 10);
    // Least-squares slope of log error vs N.
    double mean_n = 0.0, mean_l = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        mean_n += ns[i];
        mean_l += logs[i];
    }
    mean_n /= ns.size();
    mean_l /= logs.size();
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        num += (ns[i] - mean_n) * (logs[i] - mean_l);
        den += (ns[i] - mean_n) * (ns[i] - mean_n);
    }
    const double slope = num / den;
    CHECK(slope <= log_rate + 0.1);
    CHECK(std::abs(slope - log_rate) < 0.1 * std::abs(log_rate));
}

TEST_CASE("DARR monotone sandwich around the fixed point") {
    const TestSystem sys = make_test_system(3, 1, 137);
    const DiscretizedProblem dp = euler_discretize(sys.A, sys.B, sys.Q, sys.R, 0.1);
    const RiccatiSolution fixed = solve_dare(dp);

    Eigen::MatrixXd from_zero = Eigen::MatrixXd::Zero(3, 3);
    Eigen::MatrixXd from_large = 100.0 * std::max(1.0, fixed.P.norm()) *
                                 Eigen::MatrixXd::Identity(3, 3);
    for (int step = 0; step < 60; ++step) {
        from_zero = darr_finite_horizon(dp, from_zero, 1).P;
        from_large = darr_finite_horizon(dp, from_large, 1).P;
        CHECK(linalg::min_eigenvalue_sym(fixed.P - from_zero) >= -1e-9);
        CHECK(linalg::min_eigenvalue_sym(from_large - fixed.P) >= -1e-9);
    }
}

TEST_CASE("gain map") {
    DiscretizedProblem dp;
    dp.A = scalar(1.0);
    dp.B = scalar(1.0);
    dp.Q = scalar(1.0);
    dp.R = scalar(1.0);
    dp.tau = 1.0;

    CHECK(gain_from_value(scalar(0.0), dp)(0, 0) == doctest::Approx(0.0));
    const double p = 0.5 * (1.0 + std::sqrt(5.0));
    CHECK(gain_from_value(scalar(p), dp)(0, 0) ==
          doctest::Approx(-(std::sqrt(5.0) - 1.0) / 2.0).epsilon(1e-12));

    // Duplicate-evaluation oracle on a random problem.
    Rng rng(139);
    const Eigen::MatrixXd A = random_matrix(3, 3, rng);
    const Eigen::MatrixXd B = random_matrix(3, 2, rng);
    const DiscretizedProblem dp3 = euler_discretize(A, B, Eigen::MatrixXd::Identity(3, 3),
                                                    Eigen::MatrixXd::Identity(2, 2), 0.02);
    const Eigen::MatrixXd X = cclqr::testing::random_spd(3, rng);
    const Eigen::MatrixXd K = gain_from_value(X, dp3);
    const Eigen::MatrixXd oracle =
        -(dp3.R + dp3.B.transpose() * X * dp3.B).inverse() * dp3.B.transpose() * X * dp3.A;
    CHECK((K - oracle).norm() < 1e-12 * std::max(1.0, oracle.norm()));
}

TEST_CASE("horizon step count") {
    CHECK(horizon_steps(1.0, 0.1) == 10);
    CHECK(horizon_steps(0.05, 0.1) == 1); // clamped
    CHECK(horizon_steps(0.35, 0.1) == 3);
}
