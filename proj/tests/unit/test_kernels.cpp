#include <doctest.h>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "efgp/kernels.hpp"

using namespace efgp;

namespace {

double k_at(const KernelSpec& k, double r) {
    const std::array<double, 1> x{r};
    return kernel_eval(k, x);
}

// int_0^inf k^(rho) S_{d-1} rho^{d-1} d rho by composite Simpson on a substituted variable.
double spectral_mass(const KernelSpec& k, int d) {
    const double surface = d == 1 ? 2.0 : (d == 2 ? 2.0 * std::numbers::pi : 4.0 * std::numbers::pi);
    const int n = 400000;
    // rho = t / (1 - t), t in [0, 1).
    double sum = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n * (1.0 - 1e-9);
        const double rho = t / (1.0 - t);
        const double jac = 1.0 / ((1.0 - t) * (1.0 - t));
        const double f = spectral_radial(k, rho, d) * std::pow(rho, d - 1) * jac;
        const double c = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        sum += c * f;
    }
    return surface * sum * (1.0 - 1e-9) / (3.0 * n);
}

}  // namespace

TEST_CASE("kernel values") {
    const auto se = KernelSpec::squared_exponential(0.1);
    CHECK(k_at(se, 0.0) == 1.0);
    CHECK(k_at(se, 0.1) == doctest::Approx(0.606530659712633423).epsilon(1e-15));

    const auto m12 = KernelSpec::matern(0.5, 0.2);
    CHECK(k_at(m12, 0.1) == doctest::Approx(0.606530659712633423).epsilon(1e-14));
    CHECK(k_at(m12, 0.0) == 1.0);
}

TEST_CASE("half-integer Matern closed forms") {
    for (double r : {0.0, 1e-6, 0.03, 0.2, 0.9, 2.5}) {
        const double l = 0.3;
        const double a = std::sqrt(3.0) * r / l;
        const double b = std::sqrt(5.0) * r / l;
        CHECK(k_at(KernelSpec::matern(1.5, l), r) ==
              doctest::Approx((1.0 + a) * std::exp(-a)).epsilon(1e-13));
        CHECK(k_at(KernelSpec::matern(2.5, l), r) ==
              doctest::Approx((1.0 + b + b * b / 3.0) * std::exp(-b)).epsilon(1e-13));
    }
}

TEST_CASE("kernel is isotropic and radial") {
    const auto k = KernelSpec::matern(1.0, 0.25);
    const std::array<double, 2> x{0.3, 0.4};
    CHECK(kernel_eval(k, x) == doctest::Approx(kernel_radial(k, 0.5)).epsilon(1e-15));
}

TEST_CASE("non-finite input is a domain error") {
    const std::array<double, 1> x{std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS((void)kernel_eval(KernelSpec::squared_exponential(0.1), x), std::domain_error);
}

TEST_CASE("invalid kernels are rejected") {
    CHECK_THROWS_AS(KernelSpec::matern(0.3, 0.1).validate(), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::squared_exponential(-1.0).validate(), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::squared_exponential(0.0).validate(), std::invalid_argument);
}

TEST_CASE("spectral densities at the origin") {
    const std::array<double, 1> zero{0.0};
    CHECK(kernel_spectral(KernelSpec::squared_exponential(0.1), zero) ==
          doctest::Approx(0.250662827463100050).epsilon(1e-15));
    CHECK(kernel_spectral(KernelSpec::matern(0.5, 0.2), zero) ==
          doctest::Approx(0.4).epsilon(1e-14));
}

TEST_CASE("Cauchy form of the 1-d exponential kernel spectrum") {
    const auto k = KernelSpec::matern(0.5, 0.2);
    for (double xi : {0.1, 1.0, 7.5}) {
        const double t = 2.0 * std::numbers::pi * 0.2 * xi;
        CHECK(spectral_radial(k, xi, 1) == doctest::Approx(0.4 / (1.0 + t * t)).epsilon(1e-13));
    }
}

TEST_CASE("spectral densities integrate to k(0) = 1") {
    for (int d = 1; d <= 3; ++d) {
        CHECK(spectral_mass(KernelSpec::squared_exponential(0.3), d) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(spectral_mass(KernelSpec::matern(2.5, 0.3), d) ==
              doctest::Approx(1.0).epsilon(1e-6));
        CHECK(spectral_mass(KernelSpec::matern(1.5, 0.3), d) ==
              doctest::Approx(1.0).epsilon(1e-5));
    }
}

TEST_CASE("modified Bessel function K_nu") {
    CHECK(bessel_k(0.5, 2.0) == doctest::Approx(0.119937771968061447).epsilon(1e-14));
    CHECK(bessel_k(1.5, 1.0) == doctest::Approx(0.922137008895789117).epsilon(1e-14));
    CHECK(bessel_k(1.0, 0.5) == doctest::Approx(1.65644112000330089).epsilon(1e-13));
    CHECK(bessel_k(2.5, 3.0) == doctest::Approx(0.0840606319741173827).epsilon(1e-13));
    CHECK(bessel_k(0.3, 0.01) == doctest::Approx(6.89010263829276977).epsilon(1e-13));
    CHECK(bessel_k(1.7, 20.0) == doctest::Approx(6.16058379018834876e-10).epsilon(1e-12));
    CHECK(f_nu(0.5, 1.0) == doctest::Approx(0.461068504447894558).epsilon(1e-14));
    CHECK_THROWS_AS((void)bessel_k(0.5, 0.0), std::domain_error);
    CHECK_THROWS_AS((void)bessel_k(0.5, -1.0), std::domain_error);
}

TEST_CASE("Bessel scaling and large arguments") {
    CHECK(bessel_k(0.5, 800.0) == 0.0);
    const double scaled = bessel_k_scaled(0.5, 800.0);
    CHECK(scaled == doctest::Approx(std::sqrt(std::numbers::pi / 1600.0)).epsilon(1e-13));
    CHECK(log_bessel_k(0.5, 800.0) ==
          doctest::Approx(std::log(std::sqrt(std::numbers::pi / 1600.0)) - 800.0).epsilon(1e-14));
}

TEST_CASE("f_nu decreases from its limit at zero") {
    for (double nu : {0.5, 1.0, 1.5, 2.5, 3.7}) {
        CHECK(f_nu(nu, 1e-8) == doctest::Approx(f_nu_at_zero(nu)).epsilon(1e-6));
        double prev = f_nu_at_zero(nu);
        for (double z = 0.01; z < 30.0; z *= 1.5) {
            const double v = f_nu(nu, z);
            CHECK(v < prev);
            prev = v;
        }
    }
}
