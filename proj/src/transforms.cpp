#include "efgp/transforms.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "efgp/parallel.hpp"

namespace efgp {

namespace {

using cplx = std::complex<double>;

void check_inputs(const Points& points, double h, int half_width, int sign) {
    if (points.cols() < 1 || points.cols() > 3) {
        throw std::invalid_argument("points must have 1, 2 or 3 columns");
    }
    if (!points.allFinite()) {
        throw std::domain_error("points must be finite");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("h must be finite and > 0");
    }
    if (half_width < 0) {
        throw std::invalid_argument("half width must be >= 0");
    }
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("sign must be +1 or -1");
    }
}

// e^{sign 2 pi i h k x} for k = -K..K.
void fill_phases(double h, int half_width, int sign, double x, cplx* out) {
    const double base = sign * 2.0 * std::numbers::pi * h * x;
    out[half_width] = 1.0;
    for (int k = 1; k <= half_width; ++k) {
        const double a = base * k;
        const double c = std::cos(a);
        const double s = std::sin(a);
        out[half_width + k] = {c, s};
        out[half_width - k] = {c, -s};
    }
}

}  // namespace

Eigen::VectorXcd nudft_type1(const Points& points, const Eigen::VectorXcd& values, double h,
                             int half_width, int sign, std::size_t max_entries) {
    check_inputs(points, h, half_width, sign);
    if (values.size() != points.rows()) {
        throw std::invalid_argument("nudft_type1: values length does not match the point count");
    }
    const int d = static_cast<int>(points.cols());
    const std::size_t total = box_size(half_width, d, max_entries);
    const int s = 2 * half_width + 1;
    const Eigen::Index n_pts = points.rows();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total));
    const std::size_t stride = total / static_cast<std::size_t>(s);  // entries per first index
    // Each worker owns a slab of first indices and visits every point in order.
    parallel_for(
        static_cast<std::size_t>(s),
        [&](std::size_t lo, std::size_t hi) {
            std::vector<cplx> ph(static_cast<std::size_t>(d) * s);
            for (Eigen::Index n = 0; n < n_pts; ++n) {
                const cplx v = values(n);
                if (v == cplx{}) {
                    continue;
                }
                for (int i = 0; i < d; ++i) {
                    fill_phases(h, half_width, sign, points(n, i), ph.data() + i * s);
                }
                for (std::size_t a = lo; a < hi; ++a) {
                    const cplx va = v * ph[a];
                    cplx* row = out.data() + a * stride;
                    if (d == 1) {
                        row[0] += va;
                    } else if (d == 2) {
                        const cplx* p2 = ph.data() + s;
                        for (int b = 0; b < s; ++b) {
                            row[b] += va * p2[b];
                        }
                    } else {
                        const cplx* p2 = ph.data() + s;
                        const cplx* p3 = ph.data() + 2 * s;
                        for (int b = 0; b < s; ++b) {
                            const cplx vab = va * p2[b];
                            cplx* r = row + static_cast<std::size_t>(b) * s;
                            for (int c = 0; c < s; ++c) {
                                r[c] += vab * p3[c];
                            }
                        }
                    }
                }
            }
        },
        1);
    return out;
}

Eigen::VectorXcd nudft_type2(const Eigen::VectorXcd& coeffs, int half_width, const Points& points,
                             double h, int sign) {
    check_inputs(points, h, half_width, sign);
    const int d = static_cast<int>(points.cols());
    const int s = 2 * half_width + 1;
    const std::size_t total = box_size(half_width, d, static_cast<std::size_t>(-1));
    if (static_cast<std::size_t>(coeffs.size()) != total) {
        throw std::invalid_argument("nudft_type2: coefficient array has " +
                                    std::to_string(coeffs.size()) + " entries, expected " +
                                    std::to_string(total));
    }
    const Eigen::Index n_pts = points.rows();
    Eigen::VectorXcd out(n_pts);
    parallel_for(
        static_cast<std::size_t>(n_pts),
        [&](std::size_t lo, std::size_t hi) {
            std::vector<cplx> ph(static_cast<std::size_t>(d) * s);
            for (std::size_t n = lo; n < hi; ++n) {
                const auto row = static_cast<Eigen::Index>(n);
                for (int i = 0; i < d; ++i) {
                    fill_phases(h, half_width, sign, points(row, i), ph.data() + i * s);
                }
                cplx acc{};
                if (d == 1) {
                    for (int a = 0; a < s; ++a) {
                        acc += coeffs(a) * ph[a];
                    }
                } else if (d == 2) {
                    const cplx* p2 = ph.data() + s;
                    for (int a = 0; a < s; ++a) {
                        const cplx* c = coeffs.data() + static_cast<std::size_t>(a) * s;
                        cplx inner{};
                        for (int b = 0; b < s; ++b) {
                            inner += c[b] * p2[b];
                        }
                        acc += ph[a] * inner;
                    }
                } else {
                    const cplx* p2 = ph.data() + s;
                    const cplx* p3 = ph.data() + 2 * s;
                    for (int a = 0; a < s; ++a) {
                        cplx slab{};
                        for (int b = 0; b < s; ++b) {
                            const cplx* c =
                                coeffs.data() + (static_cast<std::size_t>(a) * s + b) * s;
                            cplx inner{};
                            for (int k = 0; k < s; ++k) {
                                inner += c[k] * p3[k];
                            }
                            slab += p2[b] * inner;
                        }
                        acc += ph[a] * slab;
                    }
                }
                out(row) = acc;
            }
        },
        16);
    return out;
}

Eigen::VectorXcd type1(const Points& points, const Eigen::VectorXcd& values, double h,
                       int half_width, int sign, const TransformOptions& opts,
                       std::size_t max_entries) {
    if (opts.fast) {
        return nufft_fast_type1(points, values, h, half_width, opts.tol, sign, max_entries);
    }
    return nudft_type1(points, values, h, half_width, sign, max_entries);
}

Eigen::VectorXcd type2(const Eigen::VectorXcd& coeffs, int half_width, const Points& points,
                       double h, int sign, const TransformOptions& opts) {
    if (opts.fast) {
        return nufft_fast_type2(coeffs, half_width, points, h, opts.tol, sign);
    }
    return nudft_type2(coeffs, half_width, points, h, sign);
}

ToeplitzSymbol toeplitz_symbol(const Points& points, const FourierGrid& grid, int sign,
                               const TransformOptions& opts) {
    if (points.cols() != grid.d()) {
        throw std::invalid_argument("toeplitz_symbol: point dimension does not match the grid");
    }
    ToeplitzSymbol sym;
    sym.h = grid.h();
    sym.m = grid.m();
    sym.d = grid.d();
    sym.n_points = static_cast<std::size_t>(points.rows());
    const Eigen::VectorXcd ones = Eigen::VectorXcd::Ones(points.rows());
    sym.values = type1(points, ones, grid.h(), 2 * grid.m(), sign, opts,
                       static_cast<std::size_t>(-1));
    return sym;
}

}  // namespace efgp
