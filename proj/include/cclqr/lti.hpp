#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace cclqr {

// Prescribed spectrum for the generated benchmark plant: a handful of named
// poles plus a fast stable bulk with real parts in [2*fast_bound, fast_bound].
struct PoleSpec {
    std::vector<double> unstable{0.4};
    std::vector<double> slow_stable{-0.5, -1.2};
    double fast_bound = -30.0;
    double coupling = 1.0; // magnitude of the random upper coupling
};

// Continuous-time plant dx/dt = A x + B u.
struct LtiSystem {
    Eigen::MatrixXd A;
    Eigen::MatrixXd B;
    std::uint64_t seed = 0;
    PoleSpec poles{};

    int nx() const { return static_cast<int>(A.rows()); }
    int nu() const { return static_cast<int>(B.cols()); }
};

// Quadratic stage cost x'Qx + u'Ru with Q, R positive definite.
struct CostSpec {
    Eigen::MatrixXd Q;
    Eigen::MatrixXd R;
};

inline CostSpec identity_cost(int nx, int nu) {
    return CostSpec{Eigen::MatrixXd::Identity(nx, nx), Eigen::MatrixXd::Identity(nu, nu)};
}

} // namespace cclqr
