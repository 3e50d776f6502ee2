#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "compensated.hpp"
#include "efgp/error_bounds.hpp"

namespace efgp {

namespace {

constexpr int kDyadicLevels = 12;
constexpr Eigen::Index kBlock1d = 1024;

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Gauss-Legendre rule on [-1, 1] by Newton iteration on P_n.
Rule gauss_legendre(int n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double p = std::legendre(n, x);
            const double pm1 = std::legendre(n - 1, x);
            dp = n * (x * p - pm1) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        const double p = std::legendre(n, x);
        const double pm1 = std::legendre(n - 1, x);
        dp = n * (x * p - pm1) / (x * x - 1.0);
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

// Composite rule on [0, 1]: `panels` equal panels, the first one split dyadically toward 0.
// Weights include the autocorrelation factor (1 - z).
Rule composite(const Rule& base, int panels) {
    std::vector<std::pair<double, double>> intervals;
    const double w = 1.0 / panels;
    double lo = w * std::ldexp(1.0, -kDyadicLevels);
    intervals.emplace_back(0.0, lo);
    for (int k = kDyadicLevels - 1; k >= 0; --k) {
        const double hi = w * std::ldexp(1.0, -k);
        intervals.emplace_back(lo, hi);
        lo = hi;
    }
    for (int p = 1; p < panels; ++p) {
        intervals.emplace_back(p * w, (p + 1) * w);
    }
    Rule r;
    for (const auto& [a, b] : intervals) {
        const double half = 0.5 * (b - a);
        const double mid = 0.5 * (a + b);
        for (std::size_t i = 0; i < base.nodes.size(); ++i) {
            const double z = mid + half * base.nodes[i];
            r.nodes.push_back(z);
            r.weights.push_back(half * base.weights[i] * (1.0 - z));
        }
    }
    return r;
}

double weighted_l2(const FourierGrid& grid, const Rule& rule) {
    const Eigen::Index n = static_cast<Eigen::Index>(rule.nodes.size());
    const Eigen::VectorXd axis = Eigen::Map<const Eigen::VectorXd>(rule.nodes.data(), n);
    detail::CompensatedSum sum;
    const int d = grid.d();
    if (d == 1) {
        // Node blocks keep the cosine table small for large m.
        for (Eigen::Index lo = 0; lo < n; lo += kBlock1d) {
            const Eigen::Index len = std::min(kBlock1d, n - lo);
            const Eigen::VectorXd part = axis.segment(lo, len);
            const Eigen::VectorXd err = kernel_approx_tensor(grid, part) -
                                        kernel_exact_tensor(grid.kernel(), 1, part);
            for (Eigen::Index a = 0; a < len; ++a) {
                sum.add(rule.weights[lo + a] * err(a) * err(a));
            }
        }
        return std::sqrt(2.0 * std::max(sum.value(), 0.0));
    }
    const Eigen::VectorXd err =
        kernel_approx_tensor(grid, axis) - kernel_exact_tensor(grid.kernel(), grid.d(), axis);
    if (d == 2) {
        for (Eigen::Index a = 0; a < n; ++a) {
            double row = 0.0;
            for (Eigen::Index b = 0; b < n; ++b) {
                const double e = err(a * n + b);
                row += rule.weights[b] * e * e;
            }
            sum.add(rule.weights[a] * row);
        }
    } else {
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                double row = 0.0;
                for (Eigen::Index c = 0; c < n; ++c) {
                    const double e = err((a * n + b) * n + c);
                    row += rule.weights[c] * e * e;
                }
                sum.add(rule.weights[a] * rule.weights[b] * row);
            }
        }
    }
    // Each coordinate is folded from [-1, 1] onto [0, 1].
    return std::sqrt(std::ldexp(std::max(sum.value(), 0.0), d));
}

}  // namespace

RmsMeasurement rms_error_measure(const FourierGrid& grid, int quad_order) {
    if (quad_order < 16) {
        throw std::invalid_argument("rms_error_measure: quad_order must be >= 16");
    }
    const Rule base = gauss_legendre(quad_order);
    const int panels = std::max(8, static_cast<int>(std::ceil(grid.h() * grid.m())));
    RmsMeasurement out;
    out.coarse = weighted_l2(grid, composite(base, panels));
    out.value = weighted_l2(grid, composite(base, 2 * panels));
    out.panels = 2 * panels;
    out.relative_change = out.value > 0.0 ? std::abs(out.value - out.coarse) / out.value
                                          : std::abs(out.value - out.coarse);
    out.converged = out.relative_change <= 0.01;
    return out;
}

}  // namespace efgp
