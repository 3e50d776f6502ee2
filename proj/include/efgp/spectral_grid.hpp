#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>

#include <Eigen/Core>

#include "efgp/kernels.hpp"

namespace efgp {

inline constexpr std::size_t kDefaultMaxModes = std::size_t{1} << 24;

/// Multi-index j in {-m..m}^d; unused trailing entries are zero.
using MultiIndex = std::array<int, 3>;

/// Number of entries of the tensor index box {-half_width..half_width}^d.
/// Throws ResourceError when it exceeds max_entries.
std::size_t box_size(int half_width, int d, std::size_t max_entries = kDefaultMaxModes);

/// Equispaced Fourier quadrature grid on J_m = {-m..m}^d with weights
/// w_j = h^d k^(h j).  Linear storage is row-major with the first coordinate
/// varying slowest.  Immutable after construction.
class FourierGrid {
public:
    FourierGrid(const KernelSpec& kernel, double h, int m, int d,
                std::size_t max_modes = kDefaultMaxModes);

    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }
    [[nodiscard]] double h() const { return h_; }
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int d() const { return d_; }
    [[nodiscard]] int side() const { return 2 * m_ + 1; }
    [[nodiscard]] std::size_t size() const { return static_cast<std::size_t>(weights_.size()); }
    [[nodiscard]] const Eigen::VectorXd& weights() const { return weights_; }
    [[nodiscard]] const Eigen::VectorXd& sqrt_weights() const { return sqrt_weights_; }

    [[nodiscard]] MultiIndex index(std::size_t linear) const;
    [[nodiscard]] std::size_t linear(const MultiIndex& j) const;

    /// k~(0) = sum of weights.
    [[nodiscard]] double weight_sum() const { return weight_sum_; }

private:
    KernelSpec kernel_;
    double h_;
    int m_;
    int d_;
    Eigen::VectorXd weights_;
    Eigen::VectorXd sqrt_weights_;
    double weight_sum_;
};

[[nodiscard]] FourierGrid build_grid(const KernelSpec& kernel, double h, int m, int d,
                                     std::size_t max_modes = kDefaultMaxModes);

/// phi_j(x) = sqrt(w_j) exp(2 pi i h <j, x>) for every j in J_m.
[[nodiscard]] Eigen::VectorXcd feature_vector(const FourierGrid& grid, std::span<const double> x);

/// k~(z) = sum_j w_j cos(2 pi h <j, z>), evaluated as sum_j w_j prod_i cos(2 pi h j_i z_i)
/// (the weights are invariant under sign flips of each coordinate).
[[nodiscard]] double kernel_approx(const FourierGrid& grid, std::span<const double> z);

/// The unpaired complex sum sum_j w_j exp(2 pi i h <j, z>); its imaginary part is rounding only.
[[nodiscard]] std::complex<double> kernel_approx_complex(const FourierGrid& grid,
                                                         std::span<const double> z);

/// k~ on the tensor grid axis^d, returned row-major (first coordinate slowest).
/// Contracts one dimension at a time, so cost is O(n M + n^d (2m+1)).
[[nodiscard]] Eigen::VectorXd kernel_approx_tensor(const FourierGrid& grid,
                                                   const Eigen::VectorXd& axis);

/// Exact kernel on the tensor grid axis^d, same layout as kernel_approx_tensor.
[[nodiscard]] Eigen::VectorXd kernel_exact_tensor(const KernelSpec& kernel, int d,
                                                  const Eigen::VectorXd& axis);

// ---------------------------------------------------------------------------
// Brute-force lattice sums for the aliasing / truncation split of k~ - k.

struct LatticeSum {
    double value = 0.0;
    double tail_bound = 0.0;  // certified bound on the omitted terms
    int radius = 0;
};

struct ComplexLatticeSum {
    std::complex<double> value{0.0, 0.0};
    double tail_bound = 0.0;
    int radius = 0;
};

/// Upper bound on sum_{|n|_inf > radius} k(z + n/h), valid for any z.
[[nodiscard]] double aliasing_tail_bound(const KernelSpec& kernel, double h, int d,
                                         double z_inf, int radius);

/// Upper bound on |h^d sum_{|j|_inf > radius} k^(h j) e^{2 pi i h <j,z>}|.  In d = 1 the
/// oscillation is used (Abel summation) when it gives the smaller bound.
[[nodiscard]] double truncation_tail_bound(const KernelSpec& kernel, double h,
                                           std::span<const double> z, int radius);

/// sum_{n in Z^d, 0 < |n|_inf <= radius} k(z + n/h).
[[nodiscard]] LatticeSum aliasing_sum(const KernelSpec& kernel, double h,
                                      std::span<const double> z, int radius);

/// h^d sum_{j notin J_m, |j|_inf <= radius} k^(h j) e^{2 pi i h <j, z>}.  Requires radius > m.
[[nodiscard]] ComplexLatticeSum truncation_sum(const FourierGrid& grid, std::span<const double> z,
                                               int radius);

/// Smallest radius whose certified tail is <= tol, capped at max_radius.  A max_radius
/// of 0 selects a dimension-dependent cap (10^7, 4000, 200 for d = 1, 2, 3).
[[nodiscard]] LatticeSum aliasing_sum_converged(const KernelSpec& kernel, double h,
                                                std::span<const double> z, double tol = 1e-13,
                                                int max_radius = 0);
[[nodiscard]] ComplexLatticeSum truncation_sum_converged(const FourierGrid& grid,
                                                         std::span<const double> z,
                                                         double tol = 1e-13,
                                                         int max_radius = 0);

struct ErrorDecomposition {
    double aliasing = 0.0;
    std::complex<double> truncation{0.0, 0.0};
    double total = 0.0;  // aliasing - Re(truncation), which equals k~ - k
};

struct PoissonCheck {
    double discrepancy = 0.0;  // |(k~ - k) - split.total|
    double approx_error = 0.0; // k~(z) - k(z)
    ErrorDecomposition split;
    double tail_bound = 0.0;   // sum of the two certified tails
    int alias_radius = 0;
    int trunc_radius = 0;
};

/// Both lattice sums truncated at the same radius.
[[nodiscard]] PoissonCheck poisson_identity_check(const FourierGrid& grid,
                                                  std::span<const double> z, int radius);

/// Radii chosen independently so that each certified tail is <= tol (or the cap is hit).
[[nodiscard]] PoissonCheck poisson_identity_check_converged(const FourierGrid& grid,
                                                            std::span<const double> z,
                                                            double tol = 1e-12,
                                                            int max_radius = 0);

}  // namespace efgp
