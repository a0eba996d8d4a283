#include <doctest.h>

#include <cmath>
#include <complex>

#include <unsupported/Eigen/KroneckerProduct>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"
#include "test_helpers.hpp"

using namespace cclqr;
using cclqr::testing::random_hurwitz;
using cclqr::testing::random_matrix;
using cclqr::testing::random_symmetric;

namespace {

// Brute-force Taylor oracle for the matrix exponential; independent of the
// scaling-and-squaring path under test.
Eigen::MatrixXd expm_taylor(const Eigen::MatrixXd& A, double s) {
    const Eigen::MatrixXd M = A * s;
    Eigen::MatrixXd term = Eigen::MatrixXd::Identity(A.rows(), A.cols());
    Eigen::MatrixXd sum = term;
    for (int k = 1; k < 200; ++k) {
        term = (term * M) / static_cast<double>(k);
        sum += term;
        if (term.norm() < 1e-18 * sum.norm()) {
            break;
        }
    }
    return sum;
}

// Characteristic polynomial coefficients via the Leverrier-Faddeev recursion;
// p(z) = z^n + c[0] z^{n-1} + ... + c[n-1].
Eigen::VectorXd char_poly(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    Eigen::VectorXd c(n);
    Eigen::MatrixXd Mk = A;
    for (int k = 1; k <= n; ++k) {
        c(k - 1) = -Mk.trace() / static_cast<double>(k);
        if (k < n) {
            Mk = A * (Mk + c(k - 1) * Eigen::MatrixXd::Identity(n, n));
        }
    }
    return c;
}

double abscissa_via_companion(const Eigen::MatrixXd& A) {
    const int n = static_cast<int>(A.rows());
    const double scale = A.norm();
    const Eigen::VectorXd c = char_poly(A / scale);
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(n, n);
    companion.block(1, 0, n - 1, n - 1).diagonal().setOnes();
    for (int i = 0; i < n; ++i) {
        companion(i, n - 1) = -c(n - 1 - i);
    }
    Eigen::EigenSolver<Eigen::MatrixXd> eig(companion, false);
    return eig.eigenvalues().real().maxCoeff() * scale;
}

} // namespace

TEST_CASE("matrix exponential basics") {
    Rng rng(11);
    const Eigen::MatrixXd A = random_matrix(4, 4, rng);
    CHECK((linalg::matrix_exponential(A, 0.0) - Eigen::MatrixXd::Identity(4, 4)).norm() ==
          doctest::Approx(0.0).epsilon(1e-14));

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = -1.0;
    D(1, 1) = -2.0;
    const Eigen::MatrixXd E = linalg::matrix_exponential(D, 1.0);
    CHECK(E(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    CHECK(E(1, 1) == doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
    CHECK(std::abs(E(0, 1)) < 1e-15);
}

TEST_CASE("matrix exponential matches the Taylor oracle") {
    Rng rng(17);
    const Eigen::MatrixXd A = random_matrix(5, 5, rng);
    const Eigen::MatrixXd E = linalg::matrix_exponential(A, 0.3);
    const Eigen::MatrixXd oracle = expm_taylor(A, 0.3);
    CHECK((E - oracle).norm() / oracle.norm() < 1e-12);
}

TEST_CASE("matrix exponential inverse and semigroup properties") {
    Rng rng(23);
    for (int trial = 0; trial < 5; ++trial) {
        Eigen::MatrixXd A = random_matrix(4, 4, rng);
        A *= 2.0 / A.norm(); // keep ||A s|| modest
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(4, 4);
        const double s = 1.3;
        const double t = -0.4;
        CHECK((linalg::matrix_exponential(A, s) * linalg::matrix_exponential(A, -s) - I).norm() <
              1e-8);
        CHECK((linalg::matrix_exponential(A, s + t) -
               linalg::matrix_exponential(A, s) * linalg::matrix_exponential(A, t))
                  .norm() < 1e-8);
    }
}

TEST_CASE("matrix exponential rejects bad input") {
    CHECK_THROWS_AS(linalg::matrix_exponential(Eigen::MatrixXd::Zero(2, 3), 1.0),
                    std::invalid_argument);
    Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(2, 2);
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(linalg::matrix_exponential(bad, 1.0), std::invalid_argument);
}

TEST_CASE("Lyapunov solve on closed forms") {
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    const Eigen::MatrixXd X = linalg::solve_lyapunov(-I2, I2);
    CHECK((X - 0.5 * I2).norm() < 1e-12);

    Eigen::MatrixXd F(1, 1), S(1, 1);
    F << -2.0;
    S << 4.0;
    CHECK(linalg::solve_lyapunov(F, S)(0, 0) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Lyapunov solve matches the Kronecker oracle") {
    Rng rng(31);
    for (int n = 2; n <= 8; ++n) {
        const Eigen::MatrixXd F = random_hurwitz(n, rng);
        const Eigen::MatrixXd S = random_symmetric(n, rng);
        const Eigen::MatrixXd X = linalg::solve_lyapunov(F, S);

        CHECK((X - X.transpose()).norm() < 1e-10 * std::max(1.0, X.norm()));

        // (I (x) F' + F' (x) I) vec(X) = -vec(S)
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
        const Eigen::MatrixXd op = Eigen::kroneckerProduct(I, F.transpose()).eval() +
                                   Eigen::kroneckerProduct(F.transpose(), I).eval();
        const Eigen::VectorXd vecS = Eigen::Map<const Eigen::VectorXd>(S.data(), n * n);
        const Eigen::VectorXd vecX = op.partialPivLu().solve(-vecS);
        const Eigen::MatrixXd X_oracle = Eigen::Map<const Eigen::MatrixXd>(vecX.data(), n, n);
        CHECK((X - X_oracle).norm() < 1e-7 * std::max(1.0, X_oracle.norm()));
    }
}

TEST_CASE("Lyapunov solve rejects non-Hurwitz input") {
    const Eigen::MatrixXd I2 = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(linalg::solve_lyapunov(I2, I2), std::invalid_argument);
    CHECK_THROWS_AS(linalg::solve_lyapunov(-I2, Eigen::MatrixXd::Identity(3, 3)),
                    std::invalid_argument);
}

TEST_CASE("spectral abscissa") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = -1.0;
    D(1, 1) = -3.0;
    CHECK(linalg::spectral_abscissa(D) == doctest::Approx(-1.0).epsilon(1e-12));

    Eigen::MatrixXd rot(2, 2);
    rot << 0.0, 1.0, -1.0, 0.0;
    CHECK(std::abs(linalg::spectral_abscissa(rot)) < 1e-12);

    Rng rng(41);
    const Eigen::MatrixXd A = random_matrix(10, 10, rng);
    const double expected = abscissa_via_companion(A);
    CHECK(std::abs(linalg::spectral_abscissa(A) - expected) < 1e-8 * A.norm());
}

TEST_CASE("operator norm and condition number") {
    CHECK(linalg::operator_norm(Eigen::MatrixXd::Identity(3, 3)) ==
          doctest::Approx(1.0).epsilon(1e-14));
    CHECK(linalg::condition_number(Eigen::MatrixXd::Identity(3, 3)) ==
          doctest::Approx(1.0).epsilon(1e-14));

    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
    D(0, 0) = 4.0;
    D(1, 1) = 1.0;
    CHECK(linalg::condition_number(D) == doctest::Approx(4.0).epsilon(1e-14));

    // Power iteration on M'M as an independent oracle for the top singular value.
    Rng rng(43);
    const Eigen::MatrixXd M = random_matrix(6, 4, rng);
    const Eigen::MatrixXd MtM = M.transpose() * M;
    Eigen::VectorXd v = Eigen::VectorXd::Ones(4).normalized();
    for (int it = 0; it < 2000; ++it) {
        v = (MtM * v).normalized();
    }
    const double oracle = std::sqrt(v.dot(MtM * v));
    CHECK(linalg::operator_norm(M) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("condition number is scale invariant and rejects indefinite input") {
    Rng rng(47);
    const Eigen::MatrixXd X = cclqr::testing::random_spd(4, rng);
    const double base = linalg::condition_number(X);
    for (double c : {0.25, 3.0, 1e6}) {
        CHECK(linalg::condition_number(c * X) == doctest::Approx(base).epsilon(1e-9));
    }

    Eigen::MatrixXd indef = Eigen::MatrixXd::Zero(2, 2);
    indef(0, 0) = 1.0;
    indef(1, 1) = -1.0;
    CHECK_THROWS_AS(linalg::condition_number(indef), std::invalid_argument);
    Eigen::MatrixXd asym(2, 2);
    asym << 1.0, 2.0, 0.0, 1.0;
    CHECK_THROWS_AS(linalg::condition_number(asym), std::invalid_argument);
}

TEST_CASE("spectral split isolates the unstable subspace") {
    Rng rng(53);
    // Similarity-transformed block diagonal with a known 1-dimensional
    // unstable part.
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(5, 5);
    D.diagonal() << 0.4, -0.5, -1.2, -31.0, -47.0;
    D(3, 4) = 2.0;
    const Eigen::MatrixXd Tm = random_matrix(5, 5, rng) + 5.0 * Eigen::MatrixXd::Identity(5, 5);
    const Eigen::MatrixXd A = Tm * D * Tm.partialPivLu().inverse();

    const linalg::SpectralSplit split = linalg::spectral_split(A);
    REQUIRE(split.unstable_basis.cols() == 1);
    REQUIRE(split.stable_basis.cols() == 4);

    // Invariance: A maps each basis into its own span.
    const Eigen::MatrixXd Zu = split.unstable_basis;
    const Eigen::MatrixXd Zs = split.stable_basis;
    CHECK((A * Zu - Zu * (Zu.transpose() * A * Zu)).norm() < 1e-8 * A.norm());
    const Eigen::MatrixXd As = Zs.transpose() * A * Zs;
    CHECK((A * Zs - Zs * As).norm() < 1e-7 * A.norm());
    CHECK(linalg::spectral_abscissa(As) < 0.0);
    CHECK(linalg::spectral_abscissa(Zu.transpose() * A * Zu) ==
          doctest::Approx(0.4).epsilon(1e-8));
}
