#include "efgp/error_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "compensated.hpp"
#include "efgp/errors.hpp"

namespace efgp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_dim(int d) {
    if (d < 1 || d > 3) {
        throw std::invalid_argument("dimension d must be 1, 2 or 3");
    }
}

void check_eps(double eps) {
    if (!(eps > 0.0 && eps < 1.0)) {
        throw std::invalid_argument("target accuracy eps must lie in (0, 1)");
    }
}

void check_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw std::invalid_argument(std::string(name) + " must be finite and > 0");
    }
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

double se_l_max() { return 2.0 / std::sqrt(kPi); }

double matern_l_max(double nu, int d) { return std::sqrt(nu / (2.0 * d)) / std::numbers::ln2; }

double matern_h_max(double nu, double l) { return 1.0 / (1.0 + std::sqrt(8.0 * nu) * l); }

double se_alias_value(double l, double h, int d) {
    const double t = (1.0 / h - 1.0) / l;
    return 2.0 * d * std::pow(3.0, d) * std::exp(-0.5 * t * t);
}

double se_trunc_value(double l, double h, int m, int d) {
    const double t = kPi * l * h * m;
    return 2.0 * d * std::pow(4.0, d) * std::exp(-2.0 * t * t);
}

double matern_alias_value(double nu, double l, double h, int d) {
    return 4.0 * d * std::pow(3.0, d - 1) * matern_middle_factor(nu) *
           std::exp(-std::sqrt(nu / (2.0 * d)) * (1.0 / h - 1.0) / l);
}

double matern_trunc_value(double nu, double l, double h, int m, int d) {
    const double log_c = (nu - 1.0) * std::log(nu) + std::log(static_cast<double>(d)) +
                         (d - 1) * std::log(5.0) - nu * std::numbers::ln2 -
                         (0.5 * d + 2.0 * nu) * std::log(kPi) + std::lgamma(nu + 0.5 * d) -
                         std::lgamma(nu);
    return std::exp(log_c - 2.0 * nu * std::log(h * l * m));
}

void require(const std::optional<std::string>& failure) {
    if (failure) {
        throw HypothesisError(*failure);
    }
}

}  // namespace

std::optional<std::string> se_hypothesis_failure(double l, double h) {
    if (!(h < 1.0)) {
        return "h < 1 fails (h = " + fmt(h) + ")";
    }
    if (!(l <= se_l_max())) {
        return "l <= 2/sqrt(pi) = " + fmt(se_l_max()) + " fails (l = " + fmt(l) + ")";
    }
    return std::nullopt;
}

double se_alias_bound(double l, double h, int d) {
    check_dim(d);
    check_positive(l, "l");
    check_positive(h, "h");
    require(se_hypothesis_failure(l, h));
    return se_alias_value(l, h, d);
}

double se_trunc_bound(double l, double h, int m, int d) {
    check_dim(d);
    check_positive(l, "l");
    check_positive(h, "h");
    if (m < 1) {
        throw std::invalid_argument("m must be >= 1");
    }
    require(se_hypothesis_failure(l, h));
    return se_trunc_value(l, h, m, d);
}

GridParams se_params(double l, int d, double eps) {
    check_dim(d);
    check_positive(l, "l");
    check_eps(eps);
    if (!(l <= se_l_max())) {
        throw HypothesisError("l <= 2/sqrt(pi) = " + fmt(se_l_max()) + " fails (l = " + fmt(l) + ")");
    }
    GridParams p;
    p.eps = eps;
    p.rule = SelectionRule::corollary;
    p.h = 1.0 / (1.0 + l * std::sqrt(2.0 * std::log(4.0 * d * std::pow(3.0, d) / eps)));
    const double mreal =
        std::sqrt(0.5 * std::log(std::pow(4.0, d + 1) * d / eps)) / (kPi * l * p.h);
    p.m = std::max(1, static_cast<int>(std::ceil(mreal)));
    return p;
}

std::optional<std::string> matern_hypothesis_failure(double nu, double l, double h, int d) {
    if (!(nu >= 0.5)) {
        return "nu >= 1/2 fails (nu = " + fmt(nu) + ")";
    }
    if (!(l <= matern_l_max(nu, d))) {
        return "l <= sqrt(nu/2d)/ln 2 = " + fmt(matern_l_max(nu, d)) + " fails (l = " + fmt(l) + ")";
    }
    if (!(h <= matern_h_max(nu, l))) {
        return "h <= 1/(1 + sqrt(8 nu) l) = " + fmt(matern_h_max(nu, l)) + " fails (h = " + fmt(h) +
               ")";
    }
    return std::nullopt;
}

double matern_middle_factor(double nu) {
    check_positive(nu, "nu");
    const double z = 4.0 * nu;
    return std::exp((1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) + nu * std::log(z) +
                    2.0 * nu + log_bessel_k(nu, z));
}

double matern_alias_bound(double nu, double l, double h, int d) {
    check_dim(d);
    check_positive(l, "l");
    check_positive(h, "h");
    require(matern_hypothesis_failure(nu, l, h, d));
    return matern_alias_value(nu, l, h, d);
}

double matern_trunc_bound(double nu, double l, double h, int m, int d) {
    check_dim(d);
    check_positive(l, "l");
    check_positive(h, "h");
    if (m < 1) {
        throw std::invalid_argument("m must be >= 1");
    }
    require(matern_hypothesis_failure(nu, l, h, d));
    return matern_trunc_value(nu, l, h, m, d);
}

GridParams matern_params(double nu, double l, int d, double eps) {
    check_dim(d);
    check_positive(l, "l");
    check_eps(eps);
    if (!(nu >= 0.5)) {
        throw HypothesisError("nu >= 1/2 fails (nu = " + fmt(nu) + ")");
    }
    if (!(l <= matern_l_max(nu, d))) {
        throw HypothesisError("l <= sqrt(nu/2d)/ln 2 = " + fmt(matern_l_max(nu, d)) +
                              " fails (l = " + fmt(l) + ")");
    }
    GridParams p;
    p.eps = eps;
    p.rule = SelectionRule::corollary;
    p.h = 1.0 / (1.0 + l * std::sqrt(2.0 * d / nu) * std::log(d * std::pow(3.0, d) / eps));
    const double base = d * std::pow(5.0, d - 1) / (std::pow(kPi, 0.5 * d) * eps);
    const double mreal = std::pow(base, 1.0 / (2.0 * nu)) * 1.6 * std::sqrt(nu) / (kPi * p.h * l);
    if (!(mreal < 2.0e9)) {
        throw ResourceError("Matern corollary needs m = " + fmt(mreal) + ", beyond integer range");
    }
    p.m = std::max(1, static_cast<int>(std::ceil(mreal)));
    return p;
}

ErrorBudget error_budget(const KernelSpec& kernel, double h, int m, int d, Regime regime) {
    kernel.validate();
    check_dim(d);
    check_positive(h, "h");
    if (m < 1) {
        throw std::invalid_argument("m must be >= 1");
    }
    const double l = kernel.lengthscale;
    const auto failure = kernel.is_matern() ? matern_hypothesis_failure(kernel.nu, l, h, d)
                                            : se_hypothesis_failure(l, h);
    ErrorBudget b;
    b.regime = regime;
    if (failure) {
        if (regime == Regime::rigorous) {
            throw HypothesisError(*failure);
        }
        b.warnings.push_back(*failure);
    }
    if (kernel.is_matern()) {
        b.aliasing_bound = matern_alias_value(kernel.nu, l, h, d);
        b.truncation_bound = matern_trunc_value(kernel.nu, l, h, m, d);
    } else {
        b.aliasing_bound = se_alias_value(l, h, d);
        b.truncation_bound = se_trunc_value(l, h, m, d);
    }
    b.total = b.aliasing_bound + b.truncation_bound;
    return b;
}

GridParams select_params(const KernelSpec& kernel, int d, double eps, SelectionRule rule) {
    kernel.validate();
    if (!kernel.is_matern()) {
        GridParams p = se_params(kernel.lengthscale, d, eps);
        if (rule == SelectionRule::heuristic) {
            p.warnings.push_back(
                "heuristic rule is defined for Matern kernels only; used the SE corollary");
        }
        return p;
    }
    if (rule == SelectionRule::heuristic) {
        return heuristic_params(kernel.nu, kernel.lengthscale, d, eps);
    }
    return matern_params(kernel.nu, kernel.lengthscale, d, eps);
}

double beta_prefactor(int d, double nu) {
    if (d < 1) {
        throw std::invalid_argument("beta_prefactor: d must be >= 1");
    }
    check_positive(nu, "nu");
    double b = 1.0 / (2.0 * nu);
    for (int k = 2; k <= d; ++k) {
        b *= 4.0 + 2.0 / (2.0 * nu + k - 1);
    }
    return b;
}

namespace {

// Summing (A + q^2)^{-e} over q in Z is at most A^{-e} + sqrt(pi) Gamma(e - 1/2)/Gamma(e) A^{1/2-e}.
// Applying this k times to (A + |q|^2)^{-p}, q in Z^k, gives sum_i c_i A^{-e_i}.
std::vector<std::pair<double, double>> expand_free_coordinates(double p, int k) {
    std::vector<std::pair<double, double>> terms{{1.0, p}};
    for (int step = 0; step < k; ++step) {
        std::vector<std::pair<double, double>> next;
        for (const auto& [c, e] : terms) {
            next.emplace_back(c, e);
            next.emplace_back(
                c * std::exp(0.5 * std::log(kPi) + std::lgamma(e - 0.5) - std::lgamma(e)), e - 0.5);
        }
        terms = std::move(next);
    }
    return terms;
}

}  // namespace

PowerLatticeSum power_lattice_tail(int d, double nu, int m, int radius) {
    if (d < 1 || d > 3) {
        throw std::invalid_argument("power_lattice_tail: d must be 1, 2 or 3");
    }
    check_positive(nu, "nu");
    if (m < 1 || radius <= m) {
        throw std::invalid_argument("power_lattice_tail: need 1 <= m < radius");
    }
    const double p = nu + 0.5 * d;
    const int qr = d >= 2 ? radius : 0;
    const int qr2 = d >= 3 ? radius : 0;
    detail::CompensatedSum sum;
    for (int n = radius; n > m; --n) {
        const double n2 = static_cast<double>(n) * n;
        for (int a = -qr; a <= qr; ++a) {
            for (int b = -qr2; b <= qr2; ++b) {
                const double r2 = n2 + static_cast<double>(a) * a + static_cast<double>(b) * b;
                sum.add(std::pow(r2, -p));
            }
        }
    }
    const double R = radius;
    double tail = 0.0;
    // n > R, every q.
    for (const auto& [c, e] : expand_free_coordinates(p, d - 1)) {
        tail += c * std::pow(R, 1.0 - 2.0 * e) / (2.0 * e - 1.0);
    }
    // m < n <= R with some |q_i| > R: sum over n by its integral, then over q_i > R.
    if (d >= 2) {
        for (const auto& [c, e] : expand_free_coordinates(p, d - 2)) {
            const double half_line =
                0.5 * std::exp(0.5 * std::log(kPi) + std::lgamma(e - 0.5) - std::lgamma(e));
            tail += 2.0 * (d - 1) * c * half_line * std::pow(R, 2.0 - 2.0 * e) / (2.0 * e - 2.0);
        }
    }
    PowerLatticeSum out;
    out.partial = sum.value();
    out.tail_bound = tail;
    out.radius = radius;
    return out;
}

bool heuristic_in_range(double nu) { return nu >= 0.5 && nu <= 2.5; }

double heuristic_h(double nu, double l, double eps) {
    check_positive(nu, "nu");
    check_positive(l, "l");
    check_eps(eps);
    return 1.0 / (1.0 + 0.85 * (l / std::sqrt(nu)) * std::log(1.0 / eps));
}

int heuristic_m(double nu, double l, double h, double eps, int d) {
    check_dim(d);
    check_positive(nu, "nu");
    check_positive(l, "l");
    check_positive(h, "h");
    check_eps(eps);
    const double q = 2.0 * nu + 0.5 * d;
    const double inner = std::pow(kPi, nu + 0.5 * d) * std::pow(l, 2.0 * nu) * eps / 0.15;
    const double mreal = std::pow(inner, -1.0 / q) / h;
    if (!(mreal < 2.0e9)) {
        throw ResourceError("heuristic needs m = " + fmt(mreal) + ", beyond integer range");
    }
    return std::max(1, static_cast<int>(std::ceil(mreal)));
}

GridParams heuristic_params(double nu, double l, int d, double eps) {
    GridParams p;
    p.eps = eps;
    p.rule = SelectionRule::heuristic;
    p.h = heuristic_h(nu, l, eps);
    p.m = heuristic_m(nu, l, p.h, eps, d);
    if (!heuristic_in_range(nu)) {
        p.warnings.push_back("nu = " + fmt(nu) + " is outside the fitted range [1/2, 5/2]");
    }
    return p;
}

double rms_heuristic(double nu, double l, double h, int m, int d) {
    check_dim(d);
    check_positive(nu, "nu");
    check_positive(l, "l");
    check_positive(h, "h");
    if (m < 1) {
        throw std::invalid_argument("m must be >= 1");
    }
    const double q = 2.0 * nu + 0.5 * d;
    return (0.15 / std::pow(kPi, nu + 0.5 * d)) / (std::pow(l, 2.0 * nu) * std::pow(h * m, q));
}

double sup_error_scan(const FourierGrid& grid, int points_per_axis) {
    if (points_per_axis < 2) {
        throw std::invalid_argument("sup_error_scan: need at least 2 points per axis");
    }
    const Eigen::VectorXd axis = Eigen::VectorXd::LinSpaced(points_per_axis, -1.0, 1.0);
    if (grid.d() == 1) {
        // Blocks keep the cosine table at about 4e6 entries.
        const Eigen::Index block =
            std::max<Eigen::Index>(1, Eigen::Index{4000000} / grid.side());
        double sup = 0.0;
        for (Eigen::Index lo = 0; lo < axis.size(); lo += block) {
            const Eigen::VectorXd part = axis.segment(lo, std::min(block, axis.size() - lo));
            const Eigen::VectorXd err =
                kernel_approx_tensor(grid, part) - kernel_exact_tensor(grid.kernel(), 1, part);
            sup = std::max(sup, err.cwiseAbs().maxCoeff());
        }
        return sup;
    }
    const Eigen::VectorXd approx = kernel_approx_tensor(grid, axis);
    const Eigen::VectorXd exact = kernel_exact_tensor(grid.kernel(), grid.d(), axis);
    return (approx - exact).cwiseAbs().maxCoeff();
}

}  // namespace efgp
