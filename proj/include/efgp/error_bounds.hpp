#pragma once

#include <optional>
#include <string>
#include <vector>

#include "efgp/kernels.hpp"
#include "efgp/spectral_grid.hpp"

namespace efgp {

enum class Regime { rigorous, heuristic };
enum class SelectionRule { corollary, heuristic };

/// Aliasing plus truncation bound for a grid.  In the heuristic regime the
/// closed forms are evaluated even when theorem hypotheses fail; each failure
/// is listed in warnings.
struct ErrorBudget {
    double aliasing_bound = 0.0;
    double truncation_bound = 0.0;
    double total = 0.0;
    Regime regime = Regime::rigorous;
    std::vector<std::string> warnings;
};

struct GridParams {
    double h = 0.0;
    int m = 0;
    double eps = 0.0;
    SelectionRule rule = SelectionRule::corollary;
    std::vector<std::string> warnings;
};

// Squared-exponential kernel.  Hypotheses: h < 1, l <= 2/sqrt(pi).

/// Returns the first failing hypothesis, if any.
[[nodiscard]] std::optional<std::string> se_hypothesis_failure(double l, double h);

/// 2d 3^d exp(-((1/h - 1)/l)^2 / 2).  Throws HypothesisError outside the hypotheses.
[[nodiscard]] double se_alias_bound(double l, double h, int d);

/// 2d 4^d exp(-2 (pi l h m)^2).
[[nodiscard]] double se_trunc_bound(double l, double h, int m, int d);

/// h = (1 + l sqrt(2 ln(4d 3^d / eps)))^{-1},  m = ceil(sqrt(ln(4^{d+1} d / eps) / 2) / (pi l h)).
[[nodiscard]] GridParams se_params(double l, int d, double eps);

// Matern kernel.  Hypotheses: nu >= 1/2, l <= sqrt(nu / 2d) / ln 2, h <= 1 / (1 + sqrt(8 nu) l).

[[nodiscard]] std::optional<std::string> matern_hypothesis_failure(double nu, double l, double h,
                                                                   int d);

/// (2^{1-nu} / Gamma(nu)) (4 nu)^nu e^{2 nu} K_nu(4 nu); equals 1/e at nu = 1/2.
[[nodiscard]] double matern_middle_factor(double nu);

/// 4d 3^{d-1} * middle factor * exp(-sqrt(nu / 2d) (1/h - 1) / l).
[[nodiscard]] double matern_alias_bound(double nu, double l, double h, int d);

/// nu^{nu-1} d 5^{d-1} / (2^nu pi^{d/2 + 2 nu}) * Gamma(nu + d/2) / Gamma(nu) / (h l m)^{2 nu}.
[[nodiscard]] double matern_trunc_bound(double nu, double l, double h, int m, int d);

/// h = (1 + l sqrt(2d/nu) ln(d 3^d / eps))^{-1},
/// m = ceil((d 5^{d-1} / (pi^{d/2} eps))^{1/2nu} * 1.6 sqrt(nu) / (pi h l)).  Requires d <= 3.
[[nodiscard]] GridParams matern_params(double nu, double l, int d, double eps);

/// Both bounds for an arbitrary grid.
[[nodiscard]] ErrorBudget error_budget(const KernelSpec& kernel, double h, int m, int d,
                                       Regime regime = Regime::rigorous);

/// Parameter choice for either family.  The heuristic rule applies to Matern kernels only;
/// for the squared-exponential kernel it falls back to the corollary with a warning.
[[nodiscard]] GridParams select_params(const KernelSpec& kernel, int d, double eps,
                                       SelectionRule rule = SelectionRule::corollary);

// Power-law half-space lattice sums.

/// beta(1, nu) = 1/(2 nu);  beta(d, nu) = (4 + 2/(2 nu + d - 1)) beta(d - 1, nu).
[[nodiscard]] double beta_prefactor(int d, double nu);

struct PowerLatticeSum {
    double partial = 0.0;     // n in (m, R], |q|_inf <= R
    double tail_bound = 0.0;  // certified bound on everything omitted
    int radius = 0;
    [[nodiscard]] double upper() const { return partial + tail_bound; }
};

/// I(d, nu, m) = sum_{n > m} sum_{q in Z^{d-1}} (n^2 + |q|^2)^{-nu - d/2}, summed directly
/// up to radius R with an integral bound on the remainder.
[[nodiscard]] PowerLatticeSum power_lattice_tail(int d, double nu, int m, int radius);

// Root-mean-square heuristics for the Matern kernel.

/// The heuristics were fitted for 1/2 <= nu <= 5/2.
[[nodiscard]] bool heuristic_in_range(double nu);

/// h = (1 + 0.85 (l / sqrt(nu)) ln(1/eps))^{-1}.
[[nodiscard]] double heuristic_h(double nu, double l, double eps);

/// m = ceil((1/h) (pi^{nu + d/2} l^{2 nu} eps / 0.15)^{-1/(2 nu + d/2)}).
[[nodiscard]] int heuristic_m(double nu, double l, double h, double eps, int d);

/// heuristic_h and heuristic_m together, tagged when nu is outside the fitted range.
[[nodiscard]] GridParams heuristic_params(double nu, double l, int d, double eps);

/// (0.15 / pi^{nu + d/2}) / (l^{2 nu} (h m)^{2 nu + d/2}).
[[nodiscard]] double rms_heuristic(double nu, double l, double h, int m, int d);

struct RmsMeasurement {
    double value = 0.0;            // on the refined panel set
    double coarse = 0.0;           // on half as many panels
    double relative_change = 0.0;  // |value - coarse| / value
    bool converged = false;        // relative_change <= 1%
    int panels = 0;                // panels per axis in the refined run
};

/// sqrt(int_{[-1,1]^d} prod_i (1 - |z_i|) |k~(z) - k(z)|^2 dz), the mean-square kernel error
/// for independent uniform points on [0,1]^d.  Tensor Gauss-Legendre panels of width about
/// 1/(h m), dyadically refined toward z = 0.
[[nodiscard]] RmsMeasurement rms_error_measure(const FourierGrid& grid, int quad_order = 16);

/// Sup of |k~ - k| over the tensor grid of n equispaced points per axis on [-1, 1]^d.
[[nodiscard]] double sup_error_scan(const FourierGrid& grid, int points_per_axis);

}  // namespace efgp
