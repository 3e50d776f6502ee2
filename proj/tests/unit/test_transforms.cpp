#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include "efgp/transforms.hpp"

using namespace efgp;

namespace {

Points random_points(int n, int d, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Points p(n, d);
    for (int i = 0; i < n; ++i) {
        for (int c = 0; c < d; ++c) {
            p(i, c) = u(gen);
        }
    }
    return p;
}

Eigen::VectorXcd random_complex(Eigen::Index n, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = {g(gen), g(gen)};
    }
    return v;
}

double rel_err(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace

TEST_CASE("type 1 at the origin and for zero values") {
    Points x = Points::Zero(1, 2);
    Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1);
    const Eigen::VectorXcd f = nudft_type1(x, one, 0.5, 3, +1);
    CHECK(f.size() == 49);
    CHECK((f - Eigen::VectorXcd::Ones(49)).norm() == 0.0);
    const Points p = random_points(7, 1, 1);
    CHECK(nudft_type1(p, Eigen::VectorXcd::Zero(7), 0.5, 4, -1).norm() == 0.0);
}

TEST_CASE("type 1 against extended-precision summation") {
    const Points p = random_points(3, 1, 2);
    const Eigen::VectorXcd v = random_complex(3, 3);
    const double h = 0.43;
    for (int sign : {+1, -1}) {
        const Eigen::VectorXcd f = nudft_type1(p, v, h, 2, sign);
        for (int k = -2; k <= 2; ++k) {
            std::complex<long double> acc = 0.0L;
            for (int n = 0; n < 3; ++n) {
                const long double ph = sign * 2.0L * std::numbers::pi_v<long double> * h * k * p(n, 0);
                acc += std::complex<long double>(v(n).real(), v(n).imag()) *
                       std::complex<long double>(std::cos(ph), std::sin(ph));
            }
            const std::complex<double> ref(static_cast<double>(acc.real()),
                                           static_cast<double>(acc.imag()));
            CHECK(std::abs(f(k + 2) - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
        }
    }
}

TEST_CASE("type 2 of a constant coefficient") {
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(25);
    c(12) = {2.0, -1.0};
    const Points p = random_points(9, 2, 4);
    const Eigen::VectorXcd u = nudft_type2(c, 2, p, 0.6, +1);
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        CHECK(std::abs(u(i) - std::complex<double>(2.0, -1.0)) < 1e-15);
    }
}

TEST_CASE("type 1 and type 2 are adjoint") {
    for (int d = 1; d <= 3; ++d) {
        const int K = 4;
        const Points p = random_points(40, d, 10 + d);
        const Eigen::VectorXcd v = random_complex(40, 20 + d);
        const Eigen::Index M = static_cast<Eigen::Index>(std::pow(2 * K + 1, d));
        const Eigen::VectorXcd c = random_complex(M, 30 + d);
        for (int sign : {+1, -1}) {
            const std::complex<double> lhs = c.dot(nudft_type1(p, v, 0.7, K, sign));
            const std::complex<double> rhs = nudft_type2(c, K, p, 0.7, -sign).dot(v);
            CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
        }
    }
}

TEST_CASE("Toeplitz symbol") {
    SUBCASE("single point at the origin") {
        const FourierGrid g(KernelSpec::squared_exponential(0.1), 0.5, 3, 2);
        const ToeplitzSymbol t = toeplitz_symbol(Points::Zero(1, 2), g);
        CHECK(t.side() == 13);
        CHECK((t.values - Eigen::VectorXcd::Ones(169)).norm() < 1e-15);
    }
    SUBCASE("dense oracle") {
        const FourierGrid g(KernelSpec::squared_exponential(0.1), 0.55, 4, 1);
        const Points p = random_points(50, 1, 5);
        const ToeplitzSymbol t = toeplitz_symbol(p, g, +1);
        for (int k = -8; k <= 8; ++k) {
            std::complex<double> ref = 0.0;
            for (int n = 0; n < 50; ++n) {
                ref += std::polar(1.0, 2.0 * std::numbers::pi * 0.55 * k * p(n, 0));
            }
            CHECK(std::abs(t.values(k + 8) - ref) <= 1e-12 * 50);
        }
    }
}

TEST_CASE("Toeplitz apply against the dense matrix") {
    for (int d = 1; d <= 2; ++d) {
        for (int m : {1, 3, 8}) {
            const FourierGrid g(KernelSpec::matern(1.5, 0.2), 0.45, m, d);
            const Points p = random_points(60, d, static_cast<unsigned>(100 * d + m));
            const ToeplitzSymbol t = toeplitz_symbol(p, g, -1);
            const Eigen::VectorXcd v = random_complex(static_cast<Eigen::Index>(g.size()), 7);
            const Eigen::VectorXcd ref = toeplitz_dense(t) * v;
            CHECK(rel_err(toeplitz_apply(t, v), ref) <= 1e-12);
            const ToeplitzOperator op(t);
            CHECK(rel_err(op.apply(v), ref) <= 1e-12);
            CHECK(op.fft_length() >= 4 * m + 1);
        }
    }
}

TEST_CASE("Toeplitz delta symbol and zero input") {
    ToeplitzSymbol t;
    t.h = 0.5;
    t.m = 2;
    t.d = 2;
    t.n_points = 6;
    t.values = Eigen::VectorXcd::Zero(81);
    t.values(40) = 6.0;
    const Eigen::VectorXcd v = random_complex(25, 9);
    CHECK(rel_err(toeplitz_apply(t, v), 6.0 * v) <= 1e-14);
    CHECK(toeplitz_apply(t, Eigen::VectorXcd::Zero(25)).norm() == 0.0);
    CHECK_THROWS_AS((void)toeplitz_apply(t, Eigen::VectorXcd::Zero(24)), std::invalid_argument);
}

TEST_CASE("fast 2,3,5-smooth lengths") {
    CHECK(fast_fft_length(1) == 1);
    CHECK(fast_fft_length(7) == 8);
    CHECK(fast_fft_length(17) == 18);
    CHECK(fast_fft_length(121) == 125);
}

TEST_CASE("Gaussian-gridding transforms match direct summation") {
    for (int d = 1; d <= 3; ++d) {
        for (double tol : {1e-6, 1e-12}) {
            const int K = d == 3 ? 6 : 15;
            const Points p = random_points(200, d, static_cast<unsigned>(d * 7));
            const Eigen::VectorXcd v = random_complex(200, 11);
            const Eigen::Index M = static_cast<Eigen::Index>(std::pow(2 * K + 1, d));
            const Eigen::VectorXcd c = random_complex(M, 12);
            for (int sign : {+1, -1}) {
                const Eigen::VectorXcd f1 = nufft_fast_type1(p, v, 0.8, K, tol, sign);
                CHECK(rel_err(f1, nudft_type1(p, v, 0.8, K, sign)) <= 10.0 * tol);
                const Eigen::VectorXcd f2 = nufft_fast_type2(c, K, p, 0.8, tol, sign);
                CHECK(rel_err(f2, nudft_type2(c, K, p, 0.8, sign)) <= 10.0 * tol);
            }
        }
    }
}

TEST_CASE("fast path argument checks") {
    const Points p = random_points(5, 1, 1);
    const Eigen::VectorXcd v = random_complex(5, 2);
    CHECK_THROWS_AS((void)nufft_fast_type1(p, v, 1.5, 4, 1e-8), std::invalid_argument);
    CHECK_THROWS_AS((void)nufft_fast_type1(p, v, 0.5, 4, 1e-14), std::invalid_argument);
    CHECK_THROWS_AS((void)nudft_type1(p, v, 0.5, 4, 0), std::invalid_argument);
}
