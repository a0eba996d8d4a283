#include "cclqr/system_gen.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "cclqr/errors.hpp"
#include "cclqr/linalg.hpp"
#include "cclqr/riccati.hpp"
#include "cclqr/rng.hpp"

namespace cclqr {

namespace {

// Quasi-triangular seed matrix: 1x1 blocks for the prescribed real poles,
// then random fast blocks (1x1 real or 2x2 complex pair), plus random upper
// coupling above the block diagonal.
Eigen::MatrixXd build_seed_matrix(int n, const PoleSpec& spec, Rng& rng) {
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);

    int pos = 0;
    for (double p : spec.unstable) {
        T(pos, pos) = p;
        ++pos;
    }
    for (double p : spec.slow_stable) {
        T(pos, pos) = p;
        ++pos;
    }

    const double lo = 2.0 * spec.fast_bound;
    const double hi = spec.fast_bound;
    const double omega_max = 0.5 * std::abs(spec.fast_bound);
    while (pos < n) {
        const int remaining = n - pos;
        if (remaining >= 2 && rng.uniform01() < 0.5) {
            const double sigma = rng.uniform(lo, hi);
            const double omega = rng.uniform(0.0, omega_max);
            T(pos, pos) = sigma;
            T(pos, pos + 1) = omega;
            T(pos + 1, pos) = -omega;
            T(pos + 1, pos + 1) = sigma;
            pos += 2;
        } else {
            T(pos, pos) = rng.uniform(lo, hi);
            pos += 1;
        }
    }

    // Random coupling strictly above the block structure. Skipping the
    // subdiagonal entry of each 2x2 block keeps the prescribed spectrum exact.
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            if (j == i + 1 && T(j, i) != 0.0) {
                continue; // inside a complex-pair block
            }
            T(i, j) += spec.coupling * rng.normal();
        }
    }
    return T;
}

Eigen::MatrixXd random_orthogonal(int n, Rng& rng) {
    Eigen::MatrixXd G(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            G(i, j) = rng.normal();
        }
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
    Eigen::MatrixXd Q = qr.householderQ();
    const Eigen::MatrixXd R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < n; ++j) {
        if (R(j, j) < 0.0) {
            Q.col(j) = -Q.col(j);
        }
    }
    return Q;
}

bool spectrum_contains(const Eigen::VectorXcd& lambda, double pole, double tol) {
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
        if (std::abs(lambda(i) - std::complex<double>(pole, 0.0)) <= tol) {
            return true;
        }
    }
    return false;
}

} // namespace

LtiSystem generate_benchmark_system(std::uint64_t seed, int n_x, int n_u, const PoleSpec& spec) {
    const int prescribed = static_cast<int>(spec.unstable.size() + spec.slow_stable.size());
    if (n_x < prescribed + 1) {
        throw std::invalid_argument(
            "generate_benchmark_system: n_x must exceed the number of prescribed poles, need >= " +
            std::to_string(prescribed + 1) + ", got " + std::to_string(n_x));
    }
    if (n_u < 1) {
        throw std::invalid_argument("generate_benchmark_system: n_u must be >= 1");
    }
    for (double p : spec.unstable) {
        if (!(p > 0.0)) {
            throw std::invalid_argument("generate_benchmark_system: unstable poles must be > 0");
        }
    }
    for (double p : spec.slow_stable) {
        if (!(spec.fast_bound < p)) {
            throw std::invalid_argument(
                "generate_benchmark_system: fast_bound must lie below every slow stable pole");
        }
    }

    const Rng master(seed);
    std::string failure = "no attempt made";
    for (std::uint64_t attempt = 0; attempt < 10; ++attempt) {
        Rng rng = master.fork(attempt);

        const Eigen::MatrixXd T = build_seed_matrix(n_x, spec, rng);
        const Eigen::MatrixXd Qo = random_orthogonal(n_x, rng);
        const Eigen::MatrixXd A = Qo * T * Qo.transpose();

        Eigen::MatrixXd B(n_x, n_u);
        for (int i = 0; i < n_x; ++i) {
            for (int j = 0; j < n_u; ++j) {
                B(i, j) = rng.normal();
            }
        }
        for (int j = 0; j < n_u; ++j) {
            B.col(j) /= B.col(j).norm();
        }

        const Eigen::VectorXcd lambda = linalg::eigenvalues(A);
        bool poles_ok = true;
        for (double p : spec.unstable) {
            poles_ok = poles_ok && spectrum_contains(lambda, p, 1e-6);
        }
        for (double p : spec.slow_stable) {
            poles_ok = poles_ok && spectrum_contains(lambda, p, 1e-6);
        }
        if (!poles_ok) {
            failure = "prescribed poles drifted beyond 1e-6";
            continue;
        }
        if (lambda.cwiseAbs().minCoeff() <= 1e-8) {
            failure = "A has an eigenvalue within 1e-8 of zero";
            continue;
        }
        if (riccati::controllability_margin(A, B) <= 1e-8) {
            failure = "controllability margin at or below 1e-8";
            continue;
        }

        LtiSystem sys;
        sys.A = A;
        sys.B = B;
        sys.seed = seed;
        sys.poles = spec;
        return sys;
    }
    throw NumericalError("generate_benchmark_system: all 10 attempts rejected (" + failure + ")");
}

std::uint64_t system_fingerprint(const LtiSystem& sys) {
    std::string canonical = "cclqr-system-v1;" + std::to_string(sys.nx()) + ";" +
                            std::to_string(sys.nu()) + ";" + std::to_string(sys.seed) + ";";
    char buf[64];
    const auto append = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g,", v);
        canonical += buf;
    };
    for (Eigen::Index i = 0; i < sys.A.rows(); ++i) {
        for (Eigen::Index j = 0; j < sys.A.cols(); ++j) {
            append(sys.A(i, j));
        }
    }
    canonical += ";";
    for (Eigen::Index i = 0; i < sys.B.rows(); ++i) {
        for (Eigen::Index j = 0; j < sys.B.cols(); ++j) {
            append(sys.B(i, j));
        }
    }
    canonical += ";";
    for (double p : sys.poles.unstable) {
        append(p);
    }
    for (double p : sys.poles.slow_stable) {
        append(p);
    }
    append(sys.poles.fast_bound);
    append(sys.poles.coupling);

    std::uint64_t hash = 0xcbf29ce484222325ULL; // FNV-1a 64-bit
    for (unsigned char c : canonical) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    return hash;
}

std::string fingerprint_hex(std::uint64_t fingerprint) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint));
    return std::string(buf);
}

} // namespace cclqr
