#include <doctest.h>

#include <cmath>
#include <numbers>

#include "efgp/error_bounds.hpp"
#include "efgp/errors.hpp"

using namespace efgp;

TEST_CASE("squared-exponential bounds") {
    CHECK(se_alias_bound(0.1, 0.5, 1) == doctest::Approx(1.15724990877835067e-21).epsilon(1e-12));
    CHECK(se_trunc_bound(0.1, 0.5, 20, 1) == doctest::Approx(2.14023039285939174e-8).epsilon(1e-12));
    CHECK(se_alias_bound(0.1, 1.0 - 1e-12, 2) == doctest::Approx(4.0 * 9.0).epsilon(1e-9));
    CHECK(se_trunc_bound(0.1, 0.5, 400, 1) == 0.0);
}

TEST_CASE("squared-exponential hypotheses") {
    CHECK_THROWS_AS((void)se_alias_bound(0.1, 1.0, 1), HypothesisError);
    CHECK_THROWS_AS((void)se_alias_bound(1.2, 0.5, 1), HypothesisError);
    CHECK(se_hypothesis_failure(0.1, 0.5) == std::nullopt);
    REQUIRE(se_hypothesis_failure(0.1, 1.5).has_value());
    CHECK(se_hypothesis_failure(0.1, 1.5)->find("h") != std::string::npos);
}

TEST_CASE("squared-exponential corollary") {
    const GridParams p = se_params(0.1, 1, 1e-6);
    CHECK(p.h == doctest::Approx(0.636548824167588112).epsilon(1e-13));
    CHECK(p.m == 15);
    CHECK(se_alias_bound(0.1, p.h, 1) + se_trunc_bound(0.1, p.h, p.m, 1) <= 1e-6);
    CHECK_THROWS_AS((void)se_params(0.1, 1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS((void)se_params(0.1, 1, 0.0), std::invalid_argument);
}

TEST_CASE("Matern bounds") {
    CHECK(matern_middle_factor(0.5) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(matern_middle_factor(1.5) == doctest::Approx(0.348509478575047612).epsilon(1e-12));
    CHECK(matern_alias_bound(0.5, 0.1, 0.4, 1) ==
          doctest::Approx(8.13873476042576697e-4).epsilon(1e-12));
    CHECK(matern_trunc_bound(0.5, 0.1, 0.4, 100, 1) ==
          doctest::Approx(0.0253302959105844429).epsilon(1e-12));
    CHECK_THROWS_AS((void)matern_alias_bound(0.5, 0.1, 0.9, 1), HypothesisError);
    REQUIRE(matern_hypothesis_failure(0.5, 0.1, 0.9, 1).has_value());
}

TEST_CASE("Matern corollary") {
    const GridParams p = matern_params(0.5, 0.1, 1, 1e-3);
    CHECK(p.h == doctest::Approx(0.384427087270401416).epsilon(1e-13));
    CHECK(p.m == 5286);
    const ErrorBudget b = error_budget(KernelSpec::matern(0.5, 0.1), p.h, p.m, 1);
    CHECK(b.total <= 1e-3);
    CHECK(b.total == doctest::Approx(b.aliasing_bound + b.truncation_bound));
    // m grows like eps^{-1/2nu}.
    const double ratio = static_cast<double>(matern_params(1.0, 0.1, 1, 1e-9).m) /
                         matern_params(1.0, 0.1, 1, 1e-8).m;
    CHECK(ratio == doctest::Approx(std::sqrt(10.0)).epsilon(0.15));
}

TEST_CASE("heuristic regime tags failed hypotheses instead of throwing") {
    const ErrorBudget b = error_budget(KernelSpec::matern(0.5, 0.1), 0.9, 50, 1, Regime::heuristic);
    CHECK_FALSE(b.warnings.empty());
    CHECK(b.total > 0.0);
    CHECK_THROWS_AS((void)error_budget(KernelSpec::matern(0.5, 0.1), 0.9, 50, 1), HypothesisError);
}

TEST_CASE("select_params falls back to the corollary for SE") {
    const GridParams p = select_params(KernelSpec::squared_exponential(0.1), 1, 1e-6,
                                       SelectionRule::heuristic);
    CHECK(p.m == 15);
    CHECK_FALSE(p.warnings.empty());
}

TEST_CASE("half-space lattice sum prefactors") {
    CHECK(beta_prefactor(1, 0.5) == doctest::Approx(1.0));
    CHECK(beta_prefactor(2, 0.5) == doctest::Approx(5.0));
    CHECK(beta_prefactor(3, 0.5) == doctest::Approx(70.0 / 3.0));
    for (int d = 1; d <= 3; ++d) {
        for (double nu : {0.5, 1.0, 2.0}) {
            CHECK(beta_prefactor(d, nu) <= std::pow(5.0, d - 1) / (2.0 * nu) * (1.0 + 1e-15));
        }
    }
}

TEST_CASE("power lattice tails") {
    const PowerLatticeSum basel = power_lattice_tail(1, 0.5, 1, 100000);
    CHECK(basel.partial <= 0.644934066848226436);
    CHECK(basel.upper() >= 0.644934066848226436);
    CHECK(basel.upper() - basel.partial < 1e-4);
    CHECK(basel.upper() <= beta_prefactor(1, 0.5));
    const PowerLatticeSum two = power_lattice_tail(2, 0.5, 2, 2000);
    CHECK(two.upper() <= beta_prefactor(2, 0.5) / 2.0);
    CHECK(power_lattice_tail(1, 1.0, 100000, 200000).upper() < 5.1e-11);
}

TEST_CASE("RMS heuristics") {
    CHECK(heuristic_h(0.5, 0.1, 1e-8) == doctest::Approx(0.311108179240569311).epsilon(1e-13));
    CHECK(heuristic_h(0.5, 0.1, 1e-4) == doctest::Approx(0.474572860068300250).epsilon(1e-13));
    CHECK(heuristic_h(0.5, 0.1, 1.0 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(heuristic_m(0.5, 0.1, heuristic_h(0.5, 0.1, 1e-4), 1e-4, 1) == 598);
    CHECK(rms_heuristic(0.5, 0.1, 1.0, 10, 1) ==
          doctest::Approx(0.0150987636313461105).epsilon(1e-13));
    CHECK(rms_heuristic(0.5, 0.1, 0.5, 20, 1) == rms_heuristic(0.5, 0.1, 1.0, 10, 1));
    // Heuristic spacing is wider than the rigorous one.
    for (double nu : {0.5, 1.5, 2.5}) {
        CHECK(heuristic_h(nu, 0.1, 1e-6) > matern_params(nu, 0.1, 1, 1e-6).h);
    }
    CHECK(heuristic_in_range(2.5));
    CHECK_FALSE(heuristic_in_range(3.5));
    CHECK_FALSE(heuristic_params(3.5, 0.1, 1, 1e-6).warnings.empty());
}

TEST_CASE("sup error scan respects the rigorous bound") {
    const auto k = KernelSpec::matern(1.5, 0.2);
    const double h = 0.5;
    const FourierGrid g(k, h, 30, 1);
    const ErrorBudget b = error_budget(k, h, 30, 1);
    const double sup = sup_error_scan(g, 2001);
    CHECK(sup > 0.0);
    CHECK(sup <= b.total);
}

TEST_CASE("measured RMS error tracks the heuristic") {
    const double nu = 1.5;
    const double l = 0.25;
    const double h = heuristic_h(nu, l, 1e-8);
    double prev = 0.0;
    for (int m : {20, 40}) {
        const FourierGrid g(KernelSpec::matern(nu, l), h, m, 1);
        const RmsMeasurement r = rms_error_measure(g);
        CHECK(r.converged);
        CHECK(std::abs(std::log10(r.value / rms_heuristic(nu, l, h, m, 1))) <= 0.5);
        if (prev > 0.0) {
            // Doubling m scales the error by about 2^{-(2 nu + 1/2)}.
            CHECK(std::log2(prev / r.value) == doctest::Approx(2.0 * nu + 0.5).epsilon(0.2));
        }
        prev = r.value;
    }
    CHECK_THROWS_AS((void)rms_error_measure(FourierGrid(KernelSpec::matern(nu, l), h, 20, 1), 8),
                    std::invalid_argument);
}
