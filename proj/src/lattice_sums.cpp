#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "compensated.hpp"
#include "efgp/spectral_grid.hpp"

namespace efgp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

int default_cap(int d) {
    switch (d) {
        case 1: return 10'000'000;
        case 2: return 4000;
        default: return 200;
    }
}

double inf_norm(std::span<const double> z) {
    double r = 0.0;
    for (double v : z) {
        r = std::max(r, std::abs(v));
    }
    return r;
}

void check_z(std::span<const double> z, const char* what) {
    if (z.empty() || z.size() > 3) {
        throw std::invalid_argument(std::string(what) + ": dimension must be 1, 2 or 3");
    }
    for (double v : z) {
        if (!std::isfinite(v)) {
            throw std::domain_error(std::string(what) + ": non-finite coordinate");
        }
    }
}

// log of the number of lattice points on the shell |n|_inf = r, bounded by 2d(2r+1)^{d-1}.
double log_shell_count(int d, double r) {
    return std::log(2.0 * d) + (d - 1) * std::log(2.0 * r + 1.0);
}

// Sum of a positive sequence T(r), r > radius, whose successive ratios do not
// increase: bounded by T(radius+1) / (1 - q) with q = T(radius+2) / T(radius+1).
template <class LogTerm>
double geometric_tail(LogTerm log_term, int radius) {
    const double l1 = log_term(radius + 1.0);
    const double l2 = log_term(radius + 2.0);
    if (l1 == -kInf) {
        return 0.0;
    }
    const double q = std::exp(l2 - l1);
    if (!(q < 1.0)) {
        return kInf;
    }
    return std::exp(l1) / (1.0 - q);
}

// h^d k^(h j) as a function of |j|^2.
class ScaledSpectrum {
public:
    ScaledSpectrum(const KernelSpec& kernel, double h, int d) : se_(!kernel.is_matern()) {
        const double l = kernel.lengthscale;
        const double hd = std::pow(h, d);
        if (se_) {
            pref_ = hd * std::pow(std::sqrt(2.0 * kPi) * l, d);
            rate_ = 2.0 * kPi * kPi * l * l * h * h;
        } else {
            // h^d k^(0) (2 nu)^{nu + d/2} rescales (2 nu + a^2)^{-nu-d/2}.
            expo_ = -(kernel.nu + 0.5 * d);
            nu2_ = 2.0 * kernel.nu;
            pref_ = hd * spectral_radial(kernel, 0.0, d) * std::pow(nu2_, -expo_);
            rate_ = std::pow(2.0 * kPi * l * h, 2);
        }
    }

    double operator()(double j2) const {
        if (se_) {
            return pref_ * std::exp(-rate_ * j2);
        }
        return pref_ * std::pow(nu2_ + rate_ * j2, expo_);
    }

private:
    bool se_;
    double pref_ = 0.0;
    double rate_ = 0.0;
    double expo_ = 0.0;
    double nu2_ = 0.0;
};

template <class TailFn>
int smallest_radius(TailFn tail, int start, int cap, double tol) {
    int hi = std::max(start, 1);
    while (hi < cap && !(tail(hi) <= tol)) {
        hi = (hi > cap / 2) ? cap : 2 * hi;
    }
    if (!(tail(hi) <= tol)) {
        return hi;
    }
    int lo = std::max(start, hi / 2);
    if (tail(lo) <= tol) {
        return lo;
    }
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        if (tail(mid) <= tol) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

}  // namespace

double aliasing_tail_bound(const KernelSpec& kernel, double h, int d, double z_inf, int radius) {
    if (radius < 0) {
        throw std::invalid_argument("aliasing_tail_bound: radius must be >= 0");
    }
    const double l = kernel.lengthscale;
    const double s1 = (radius + 1.0) / h - z_inf;
    if (kernel.is_matern()) {
        const double nu = kernel.nu;
        // k(s) <= A e^{-c s} once sqrt(2 nu) s / l >= 4 nu.
        if (s1 < 2.0 * std::sqrt(2.0 * nu) * l) {
            return kInf;
        }
        const double log_a = (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) +
                             std::log(f_nu(nu, 4.0 * nu)) + 2.0 * nu;
        const double c = std::sqrt(2.0 * nu) / (2.0 * l);
        return geometric_tail(
            [&](double r) { return log_shell_count(d, r) + log_a - c * (r / h - z_inf); },
            radius);
    }
    if (s1 <= 0.0) {
        return kInf;
    }
    return geometric_tail(
        [&](double r) {
            const double s = r / h - z_inf;
            return log_shell_count(d, r) - 0.5 * (s / l) * (s / l);
        },
        radius);
}

double truncation_tail_bound(const KernelSpec& kernel, double h, std::span<const double> z,
                             int radius) {
    check_z(z, "truncation_tail_bound");
    if (radius < 1) {
        throw std::invalid_argument("truncation_tail_bound: radius must be >= 1");
    }
    const int d = static_cast<int>(z.size());
    const ScaledSpectrum spec(kernel, h, d);
    double bound = kInf;
    if (!kernel.is_matern()) {
        bound = geometric_tail(
            [&](double r) { return log_shell_count(d, r) + std::log(spec(r * r)); }, radius);
    } else {
        const double nu = kernel.nu;
        const double l = kernel.lengthscale;
        // Shell terms are <= C r^{-2 nu - 1}; sum_{r > R} r^{-2nu-1} <= R^{-2nu} / (2 nu).
        const double log_b = std::log(spectral_radial(kernel, 0.0, d)) + (nu + 0.5 * d) *
                                 std::log(2.0 * nu) - (2.0 * nu + d) * std::log(2.0 * kPi * l);
        const double log_c = std::log(2.0 * d) + (d - 1) * std::numbers::ln2 +
                             (d - 1) * std::log1p(1.0 / (2.0 * radius + 2.0)) -
                             2.0 * nu * std::log(h) + log_b;
        bound = std::exp(log_c - 2.0 * nu * std::log(static_cast<double>(radius))) / (2.0 * nu);
    }
    if (d == 1) {
        const double s = std::abs(std::sin(kPi * h * z[0]));
        if (s > 0.0) {
            const double r1 = radius + 1.0;
            bound = std::min(bound, 2.0 * spec(r1 * r1) / s);
        }
    }
    return bound;
}

LatticeSum aliasing_sum(const KernelSpec& kernel, double h, std::span<const double> z, int radius) {
    check_z(z, "aliasing_sum");
    if (radius < 0) {
        throw std::invalid_argument("aliasing_sum: radius must be >= 0");
    }
    if (!(h > 0.0)) {
        throw std::invalid_argument("aliasing_sum: h must be > 0");
    }
    const int d = static_cast<int>(z.size());
    detail::CompensatedSum sum;
    const double step = 1.0 / h;
    std::array<double, 3> x{0.0, 0.0, 0.0};
    const int lo1 = d >= 2 ? -radius : 0;
    const int lo2 = d >= 3 ? -radius : 0;
    const int hi1 = d >= 2 ? radius : 0;
    const int hi2 = d >= 3 ? radius : 0;
    for (int a = -radius; a <= radius; ++a) {
        for (int b = lo1; b <= hi1; ++b) {
            for (int c = lo2; c <= hi2; ++c) {
                if (a == 0 && b == 0 && c == 0) {
                    continue;
                }
                const int n[3] = {a, b, c};
                double r2 = 0.0;
                for (int i = 0; i < d; ++i) {
                    x[i] = z[i] + n[i] * step;
                    r2 += x[i] * x[i];
                }
                sum.add(kernel_radial(kernel, std::sqrt(r2)));
            }
        }
    }
    LatticeSum out;
    out.value = sum.value();
    out.radius = radius;
    out.tail_bound = aliasing_tail_bound(kernel, h, d, inf_norm(z), radius);
    return out;
}

ComplexLatticeSum truncation_sum(const FourierGrid& grid, std::span<const double> z, int radius) {
    check_z(z, "truncation_sum");
    const int d = grid.d();
    if (static_cast<int>(z.size()) != d) {
        throw std::invalid_argument("truncation_sum: point dimension does not match the grid");
    }
    const int m = grid.m();
    if (radius <= m) {
        throw std::invalid_argument("truncation_sum: radius " + std::to_string(radius) +
                                    " must exceed m = " + std::to_string(m));
    }
    const double h = grid.h();
    const ScaledSpectrum spec(grid.kernel(), h, d);
    detail::CompensatedComplexSum sum;
    if (d == 1) {
        // Pair j with -j: 2 a_j cos(2 pi h j z).
        for (int j = radius; j > m; --j) {
            const double dj = j;
            sum.add(2.0 * spec(dj * dj) * std::cos(2.0 * kPi * h * dj * z[0]));
        }
    } else {
        std::vector<std::vector<std::complex<double>>> ph(d);
        for (int i = 0; i < d; ++i) {
            ph[i].resize(2 * radius + 1);
            for (int j = -radius; j <= radius; ++j) {
                const double a = 2.0 * kPi * h * j * z[i];
                ph[i][j + radius] = {std::cos(a), std::sin(a)};
            }
        }
        const int lo2 = d == 3 ? -radius : 0;
        const int hi2 = d == 3 ? radius : 0;
        for (int a = -radius; a <= radius; ++a) {
            for (int b = -radius; b <= radius; ++b) {
                for (int c = lo2; c <= hi2; ++c) {
                    if (std::max({std::abs(a), std::abs(b), std::abs(c)}) <= m) {
                        continue;
                    }
                    const double j2 = static_cast<double>(a) * a + static_cast<double>(b) * b +
                                      static_cast<double>(c) * c;
                    std::complex<double> p = ph[0][a + radius] * ph[1][b + radius];
                    if (d == 3) {
                        p *= ph[2][c + radius];
                    }
                    sum.add(spec(j2) * p);
                }
            }
        }
    }
    ComplexLatticeSum out;
    out.value = sum.value();
    out.radius = radius;
    out.tail_bound = truncation_tail_bound(grid.kernel(), h, z, radius);
    return out;
}

LatticeSum aliasing_sum_converged(const KernelSpec& kernel, double h, std::span<const double> z,
                                  double tol, int max_radius) {
    check_z(z, "aliasing_sum_converged");
    const int d = static_cast<int>(z.size());
    const int cap = max_radius > 0 ? max_radius : default_cap(d);
    const double zi = inf_norm(z);
    const int r = smallest_radius(
        [&](int rad) { return aliasing_tail_bound(kernel, h, d, zi, rad); }, 1, cap, tol);
    return aliasing_sum(kernel, h, z, r);
}

ComplexLatticeSum truncation_sum_converged(const FourierGrid& grid, std::span<const double> z,
                                           double tol, int max_radius) {
    check_z(z, "truncation_sum_converged");
    const int cap = std::max(max_radius > 0 ? max_radius : default_cap(grid.d()), grid.m() + 1);
    const int r = smallest_radius(
        [&](int rad) { return truncation_tail_bound(grid.kernel(), grid.h(), z, rad); },
        grid.m() + 1, cap, tol);
    return truncation_sum(grid, z, r);
}

namespace {

PoissonCheck assemble(const FourierGrid& grid, std::span<const double> z, const LatticeSum& alias,
                      const ComplexLatticeSum& trunc) {
    PoissonCheck out;
    out.split.aliasing = alias.value;
    out.split.truncation = trunc.value;
    out.split.total = alias.value - trunc.value.real();
    out.approx_error = kernel_approx(grid, z) - kernel_eval(grid.kernel(), z);
    out.discrepancy = std::abs(out.approx_error - out.split.total);
    out.tail_bound = alias.tail_bound + trunc.tail_bound;
    out.alias_radius = alias.radius;
    out.trunc_radius = trunc.radius;
    return out;
}

}  // namespace

PoissonCheck poisson_identity_check(const FourierGrid& grid, std::span<const double> z,
                                    int radius) {
    return assemble(grid, z, aliasing_sum(grid.kernel(), grid.h(), z, radius),
                    truncation_sum(grid, z, radius));
}

PoissonCheck poisson_identity_check_converged(const FourierGrid& grid, std::span<const double> z,
                                              double tol, int max_radius) {
    return assemble(grid, z, aliasing_sum_converged(grid.kernel(), grid.h(), z, tol, max_radius),
                    truncation_sum_converged(grid, z, tol, max_radius));
}

}  // namespace efgp
