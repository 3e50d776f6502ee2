#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <fftw3.h>

#include "efgp/transforms.hpp"

namespace efgp {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

// Gaussian gridding parameters (Greengard and Lee) for oversampling ratio about 2.
struct Gridding {
    int modes = 0;    // 2K + 1 per axis
    int fine = 0;     // oversampled grid length per axis
    int spread = 0;   // half-width of the spreading stencil in fine-grid cells
    double tau = 0.0;
};

Gridding gridding(int half_width, double tol) {
    if (!(tol >= 1e-12 && tol <= 1e-4)) {
        throw std::invalid_argument("fast NUFFT tolerance must lie in [1e-12, 1e-4]");
    }
    Gridding g;
    g.modes = 2 * half_width + 1;
    constexpr double ratio = 2.0;
    g.spread = static_cast<int>(std::ceil(-std::log(tol) / (kPi * (ratio - 1.0) / (ratio - 0.5))));
    g.fine = fast_fft_length(std::max(static_cast<int>(ratio * g.modes), 2 * g.spread + 2));
    if (g.fine % 2 != 0) {
        g.fine = fast_fft_length(g.fine + 1);
    }
    const double r = static_cast<double>(g.fine) / g.modes;
    g.tau = kPi * g.spread / (static_cast<double>(g.modes) * g.modes * r * (r - 0.5));
    return g;
}

void check(const Points& points, double h, int half_width, int sign) {
    if (points.cols() < 1 || points.cols() > 3) {
        throw std::invalid_argument("points must have 1, 2 or 3 columns");
    }
    if (!points.allFinite()) {
        throw std::domain_error("points must be finite");
    }
    if (!(h > 0.0 && h <= 1.0)) {
        throw std::invalid_argument("fast NUFFT requires 0 < h <= 1");
    }
    if (half_width < 0) {
        throw std::invalid_argument("half width must be >= 0");
    }
    if (sign != 1 && sign != -1) {
        throw std::invalid_argument("sign must be +1 or -1");
    }
}

// Stencil of a point along one axis: first fine-grid index and Gaussian weights.
struct Stencil {
    int start = 0;
    std::vector<double> w;
};

Stencil stencil(const Gridding& g, double theta) {
    const double cell = kTwoPi / g.fine;
    const int base = static_cast<int>(std::floor(theta / cell));
    Stencil s;
    s.start = base - g.spread + 1;
    s.w.resize(2 * static_cast<std::size_t>(g.spread));
    for (int q = 0; q < 2 * g.spread; ++q) {
        const double diff = theta - (s.start + q) * cell;
        s.w[q] = std::exp(-diff * diff / (4.0 * g.tau));
    }
    return s;
}

double wrapped_angle(double h, double x) {
    double t = h * x;
    t -= std::floor(t);
    return kTwoPi * t;
}

int wrap(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

std::vector<cplx> fft(std::vector<cplx> in, int d, int length, int sign) {
    std::vector<int> dims(d, length);
    std::vector<cplx> out(in.size());
    fftw_plan plan;
    {
        const std::lock_guard<std::mutex> lock(plan_mutex());
        plan = fftw_plan_dft(d, dims.data(), reinterpret_cast<fftw_complex*>(in.data()),
                             reinterpret_cast<fftw_complex*>(out.data()),
                             sign > 0 ? FFTW_BACKWARD : FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
        const std::lock_guard<std::mutex> lock(plan_mutex());
        fftw_destroy_plan(plan);
    }
    return out;
}

// Deconvolution factor sqrt(pi/tau) e^{k^2 tau} per axis, k = -K..K.
std::vector<double> deconvolution(const Gridding& g, int half_width) {
    std::vector<double> f(g.modes);
    for (int k = -half_width; k <= half_width; ++k) {
        f[k + half_width] = std::sqrt(kPi / g.tau) * std::exp(static_cast<double>(k) * k * g.tau);
    }
    return f;
}

std::size_t power(std::size_t base, int d) {
    std::size_t r = 1;
    for (int i = 0; i < d; ++i) {
        r *= base;
    }
    return r;
}

}  // namespace

Eigen::VectorXcd nufft_fast_type1(const Points& points, const Eigen::VectorXcd& values, double h,
                                  int half_width, double tol, int sign, std::size_t max_entries) {
    check(points, h, half_width, sign);
    if (values.size() != points.rows()) {
        throw std::invalid_argument("nufft_fast_type1: values length does not match the point count");
    }
    const int d = static_cast<int>(points.cols());
    const std::size_t total = box_size(half_width, d, max_entries);
    const Gridding g = gridding(half_width, tol);
    const auto L = static_cast<std::size_t>(g.fine);
    std::vector<cplx> grid(power(L, d), cplx{});
    const int w = 2 * g.spread;
    std::vector<Stencil> st(d);
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
        const cplx v = values(n);
        if (v == cplx{}) {
            continue;
        }
        for (int i = 0; i < d; ++i) {
            st[i] = stencil(g, wrapped_angle(h, points(n, i)));
        }
        if (d == 1) {
            for (int a = 0; a < w; ++a) {
                grid[wrap(st[0].start + a, g.fine)] += v * st[0].w[a];
            }
        } else if (d == 2) {
            for (int a = 0; a < w; ++a) {
                const cplx va = v * st[0].w[a];
                const std::size_t ra = static_cast<std::size_t>(wrap(st[0].start + a, g.fine)) * L;
                for (int b = 0; b < w; ++b) {
                    grid[ra + wrap(st[1].start + b, g.fine)] += va * st[1].w[b];
                }
            }
        } else {
            for (int a = 0; a < w; ++a) {
                const cplx va = v * st[0].w[a];
                const std::size_t ra = static_cast<std::size_t>(wrap(st[0].start + a, g.fine));
                for (int b = 0; b < w; ++b) {
                    const cplx vb = va * st[1].w[b];
                    const std::size_t rb = (ra * L + wrap(st[1].start + b, g.fine)) * L;
                    for (int c = 0; c < w; ++c) {
                        grid[rb + wrap(st[2].start + c, g.fine)] += vb * st[2].w[c];
                    }
                }
            }
        }
    }
    // Fourier coefficient of the spread function at frequency -sign k.
    const std::vector<cplx> spec = fft(std::move(grid), d, g.fine, sign);
    const std::vector<double> dec = deconvolution(g, half_width);
    const int s = g.modes;
    Eigen::VectorXcd out(static_cast<Eigen::Index>(total));
    const double norm = std::pow(1.0 / g.fine, d);
    for (std::size_t l = 0; l < total; ++l) {
        std::size_t rest = l;
        std::size_t pos = 0;
        std::size_t mul = 1;
        double factor = norm;
        for (int i = d - 1; i >= 0; --i) {
            const int idx = static_cast<int>(rest % static_cast<std::size_t>(s));
            rest /= static_cast<std::size_t>(s);
            pos += static_cast<std::size_t>(wrap(idx - half_width, g.fine)) * mul;
            mul *= L;
            factor *= dec[idx];
        }
        out(static_cast<Eigen::Index>(l)) = factor * spec[pos];
    }
    return out;
}

Eigen::VectorXcd nufft_fast_type2(const Eigen::VectorXcd& coeffs, int half_width,
                                  const Points& points, double h, double tol, int sign) {
    check(points, h, half_width, sign);
    const int d = static_cast<int>(points.cols());
    const std::size_t total = box_size(half_width, d, static_cast<std::size_t>(-1));
    if (static_cast<std::size_t>(coeffs.size()) != total) {
        throw std::invalid_argument("nufft_fast_type2: coefficient array has " +
                                    std::to_string(coeffs.size()) + " entries, expected " +
                                    std::to_string(total));
    }
    const Gridding g = gridding(half_width, tol);
    const auto L = static_cast<std::size_t>(g.fine);
    const std::vector<double> dec = deconvolution(g, half_width);
    const int s = g.modes;
    std::vector<cplx> grid(power(L, d), cplx{});
    for (std::size_t l = 0; l < total; ++l) {
        std::size_t rest = l;
        std::size_t pos = 0;
        std::size_t mul = 1;
        double factor = 1.0;
        for (int i = d - 1; i >= 0; --i) {
            const int idx = static_cast<int>(rest % static_cast<std::size_t>(s));
            rest /= static_cast<std::size_t>(s);
            pos += static_cast<std::size_t>(wrap(idx - half_width, g.fine)) * mul;
            mul *= L;
            factor *= dec[idx];
        }
        grid[pos] = factor * coeffs(static_cast<Eigen::Index>(l));
    }
    const std::vector<cplx> field = fft(std::move(grid), d, g.fine, sign);
    const double norm = std::pow(1.0 / g.fine, d);
    const int w = 2 * g.spread;
    std::vector<Stencil> st(d);
    Eigen::VectorXcd out(points.rows());
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
        for (int i = 0; i < d; ++i) {
            st[i] = stencil(g, wrapped_angle(h, points(n, i)));
        }
        cplx acc{};
        if (d == 1) {
            for (int a = 0; a < w; ++a) {
                acc += st[0].w[a] * field[wrap(st[0].start + a, g.fine)];
            }
        } else if (d == 2) {
            for (int a = 0; a < w; ++a) {
                const std::size_t ra = static_cast<std::size_t>(wrap(st[0].start + a, g.fine)) * L;
                cplx inner{};
                for (int b = 0; b < w; ++b) {
                    inner += st[1].w[b] * field[ra + wrap(st[1].start + b, g.fine)];
                }
                acc += st[0].w[a] * inner;
            }
        } else {
            for (int a = 0; a < w; ++a) {
                const std::size_t ra = static_cast<std::size_t>(wrap(st[0].start + a, g.fine));
                cplx slab{};
                for (int b = 0; b < w; ++b) {
                    const std::size_t rb = (ra * L + wrap(st[1].start + b, g.fine)) * L;
                    cplx inner{};
                    for (int c = 0; c < w; ++c) {
                        inner += st[2].w[c] * field[rb + wrap(st[2].start + c, g.fine)];
                    }
                    slab += st[1].w[b] * inner;
                }
                acc += st[0].w[a] * slab;
            }
        }
        out(n) = norm * acc;
    }
    return out;
}

}  // namespace efgp
