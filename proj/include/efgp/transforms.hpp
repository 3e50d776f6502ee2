#pragma once

#include <cstddef>
#include <memory>

#include <Eigen/Core>

#include "efgp/spectral_grid.hpp"

namespace efgp {

/// N x d matrix of points, one per row.
using Points = Eigen::MatrixXd;

/// Coefficient arrays over the box {-K..K}^d are stored row-major, first coordinate slowest,
/// matching FourierGrid.  `sign` selects the exponent e^{sign 2 pi i h <k, x>} and must be +1 or -1.

/// f_k = sum_n values_n e^{sign 2 pi i h <k, x_n>} for k in {-K..K}^d, by direct summation.
[[nodiscard]] Eigen::VectorXcd nudft_type1(const Points& points, const Eigen::VectorXcd& values,
                                           double h, int half_width, int sign = +1,
                                           std::size_t max_entries = kDefaultMaxModes);

/// u_n = sum_k coeffs_k e^{sign 2 pi i h <k, x_n>}, by direct summation.  With equal signs this
/// is the transpose of nudft_type1; with opposite signs it is the adjoint.
[[nodiscard]] Eigen::VectorXcd nudft_type2(const Eigen::VectorXcd& coeffs, int half_width,
                                           const Points& points, double h, int sign = +1);

/// Gaussian-gridding approximations of the two transforms with relative accuracy about tol,
/// tol in [1e-12, 1e-4].  Requires h <= 1.
[[nodiscard]] Eigen::VectorXcd nufft_fast_type1(const Points& points,
                                                const Eigen::VectorXcd& values, double h,
                                                int half_width, double tol, int sign = +1,
                                                std::size_t max_entries = kDefaultMaxModes);
[[nodiscard]] Eigen::VectorXcd nufft_fast_type2(const Eigen::VectorXcd& coeffs, int half_width,
                                                const Points& points, double h, double tol,
                                                int sign = +1);

/// Transform back end used by the solver.
struct TransformOptions {
    bool fast = false;
    double tol = 1e-12;  // fast path only
};

[[nodiscard]] Eigen::VectorXcd type1(const Points& points, const Eigen::VectorXcd& values, double h,
                                     int half_width, int sign, const TransformOptions& opts,
                                     std::size_t max_entries = kDefaultMaxModes);
[[nodiscard]] Eigen::VectorXcd type2(const Eigen::VectorXcd& coeffs, int half_width,
                                     const Points& points, double h, int sign,
                                     const TransformOptions& opts);

/// t_k = sum_n e^{sign 2 pi i h <k, x_n>} over k in {-2m..2m}^d.
struct ToeplitzSymbol {
    double h = 0.0;
    int m = 0;
    int d = 0;
    std::size_t n_points = 0;
    Eigen::VectorXcd values;  // side 4m + 1

    [[nodiscard]] int side() const { return 4 * m + 1; }
};

[[nodiscard]] ToeplitzSymbol toeplitz_symbol(const Points& points, const FourierGrid& grid,
                                             int sign = +1, const TransformOptions& opts = {});

/// Smallest 2,3,5-smooth integer >= n.
[[nodiscard]] int fast_fft_length(int n);

/// Applies (T v)_j = sum_{j' in J_m} t_{j - j'} v_{j'} through a zero-padded circulant
/// embedding and FFTs.  Precomputes the embedded symbol spectrum; apply() is reentrant.
class ToeplitzOperator {
public:
    explicit ToeplitzOperator(const ToeplitzSymbol& symbol);
    ~ToeplitzOperator();
    ToeplitzOperator(const ToeplitzOperator&) = delete;
    ToeplitzOperator& operator=(const ToeplitzOperator&) = delete;
    ToeplitzOperator(ToeplitzOperator&&) noexcept;
    ToeplitzOperator& operator=(ToeplitzOperator&&) noexcept;

    [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
    [[nodiscard]] int m() const { return m_; }
    [[nodiscard]] int d() const { return d_; }
    [[nodiscard]] std::size_t size() const { return size_; }
    [[nodiscard]] int fft_length() const { return length_; }

private:
    struct Plans;
    int m_ = 0;
    int d_ = 0;
    int length_ = 0;
    std::size_t size_ = 0;
    Eigen::VectorXcd spectrum_;
    std::unique_ptr<Plans> plans_;
};

/// One-shot convenience wrapper around ToeplitzOperator.
[[nodiscard]] Eigen::VectorXcd toeplitz_apply(const ToeplitzSymbol& symbol,
                                              const Eigen::VectorXcd& v);

/// Dense (2m+1)^d x (2m+1)^d matrix T_{jj'} = t_{j - j'}, for testing and small problems.
[[nodiscard]] Eigen::MatrixXcd toeplitz_dense(const ToeplitzSymbol& symbol);

}  // namespace efgp
