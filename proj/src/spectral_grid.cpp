#include "efgp/spectral_grid.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "efgp/errors.hpp"

namespace efgp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void check_point(std::span<const double> x, int d, const char* what) {
    if (static_cast<int>(x.size()) != d) {
        throw std::invalid_argument(std::string(what) + ": expected " + std::to_string(d) +
                                    " coordinates, got " + std::to_string(x.size()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) {
            throw std::domain_error(std::string(what) + ": non-finite coordinate");
        }
    }
}

// Per-axis unit phases e^{2 pi i h j x_i} for j = -m..m.
std::vector<std::complex<double>> axis_phases(double h, int m, double x) {
    std::vector<std::complex<double>> out(2 * m + 1);
    for (int j = -m; j <= m; ++j) {
        const double a = kTwoPi * h * j * x;
        out[j + m] = {std::cos(a), std::sin(a)};
    }
    return out;
}

// C(a, j) = cos(2 pi h j axis_a), j = -m..m.
Eigen::MatrixXd cos_table(double h, int m, const Eigen::VectorXd& axis) {
    Eigen::MatrixXd c(axis.size(), 2 * m + 1);
    for (Eigen::Index a = 0; a < axis.size(); ++a) {
        for (int j = -m; j <= m; ++j) {
            c(a, j + m) = std::cos(kTwoPi * h * j * axis(a));
        }
    }
    return c;
}

}  // namespace

std::size_t box_size(int half_width, int d, std::size_t max_entries) {
    if (half_width < 0 || d < 1 || d > 3) {
        throw std::invalid_argument("box_size: need half_width >= 0 and d in 1..3");
    }
    const double side = 2.0 * half_width + 1.0;
    const double total = std::pow(side, d);
    if (total > static_cast<double>(max_entries)) {
        throw ResourceError("index box of " + std::to_string(static_cast<long long>(total)) +
                            " entries exceeds the cap of " + std::to_string(max_entries));
    }
    return static_cast<std::size_t>(total);
}

FourierGrid::FourierGrid(const KernelSpec& kernel, double h, int m, int d, std::size_t max_modes)
    : kernel_(kernel), h_(h), m_(m), d_(d) {
    kernel_.validate();
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("grid spacing h must be finite and > 0");
    }
    if (m < 1) {
        throw std::invalid_argument("grid half-width m must be >= 1");
    }
    if (d < 1 || d > 3) {
        throw std::invalid_argument("dimension d must be 1, 2 or 3");
    }
    const std::size_t total = box_size(m, d, max_modes);
    weights_.resize(static_cast<Eigen::Index>(total));
    const double hd = std::pow(h, d);
    for (std::size_t l = 0; l < total; ++l) {
        const MultiIndex j = index(l);
        double r2 = 0.0;
        for (int i = 0; i < d; ++i) {
            r2 += static_cast<double>(j[i]) * j[i];
        }
        weights_(static_cast<Eigen::Index>(l)) = hd * spectral_radial(kernel_, h * std::sqrt(r2), d);
    }
    sqrt_weights_ = weights_.cwiseSqrt();
    weight_sum_ = weights_.sum();
}

MultiIndex FourierGrid::index(std::size_t linear) const {
    MultiIndex j{0, 0, 0};
    const auto s = static_cast<std::size_t>(side());
    for (int i = d_ - 1; i >= 0; --i) {
        j[i] = static_cast<int>(linear % s) - m_;
        linear /= s;
    }
    return j;
}

std::size_t FourierGrid::linear(const MultiIndex& j) const {
    std::size_t l = 0;
    const auto s = static_cast<std::size_t>(side());
    for (int i = 0; i < d_; ++i) {
        if (j[i] < -m_ || j[i] > m_) {
            throw std::out_of_range("multi-index outside J_m");
        }
        l = l * s + static_cast<std::size_t>(j[i] + m_);
    }
    return l;
}

FourierGrid build_grid(const KernelSpec& kernel, double h, int m, int d, std::size_t max_modes) {
    return FourierGrid(kernel, h, m, d, max_modes);
}

Eigen::VectorXcd feature_vector(const FourierGrid& grid, std::span<const double> x) {
    check_point(x, grid.d(), "feature_vector");
    const int m = grid.m();
    const int s = grid.side();
    std::vector<std::vector<std::complex<double>>> ph;
    for (int i = 0; i < grid.d(); ++i) {
        ph.push_back(axis_phases(grid.h(), m, x[i]));
    }
    Eigen::VectorXcd out(static_cast<Eigen::Index>(grid.size()));
    const auto& sw = grid.sqrt_weights();
    if (grid.d() == 1) {
        for (int a = 0; a < s; ++a) {
            out(a) = sw(a) * ph[0][a];
        }
    } else if (grid.d() == 2) {
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < s; ++b) {
                const Eigen::Index l = static_cast<Eigen::Index>(a) * s + b;
                out(l) = sw(l) * ph[0][a] * ph[1][b];
            }
        }
    } else {
        for (int a = 0; a < s; ++a) {
            for (int b = 0; b < s; ++b) {
                const std::complex<double> ab = ph[0][a] * ph[1][b];
                for (int c = 0; c < s; ++c) {
                    const Eigen::Index l = (static_cast<Eigen::Index>(a) * s + b) * s + c;
                    out(l) = sw(l) * ab * ph[2][c];
                }
            }
        }
    }
    return out;
}

double kernel_approx(const FourierGrid& grid, std::span<const double> z) {
    check_point(z, grid.d(), "kernel_approx");
    const int m = grid.m();
    const int s = grid.side();
    std::vector<std::vector<double>> c(grid.d(), std::vector<double>(s));
    for (int i = 0; i < grid.d(); ++i) {
        for (int j = -m; j <= m; ++j) {
            c[i][j + m] = std::cos(kTwoPi * grid.h() * j * z[i]);
        }
    }
    const auto& w = grid.weights();
    double sum = 0.0;
    if (grid.d() == 1) {
        for (int a = 0; a < s; ++a) {
            sum += w(a) * c[0][a];
        }
    } else if (grid.d() == 2) {
        for (int a = 0; a < s; ++a) {
            double row = 0.0;
            for (int b = 0; b < s; ++b) {
                row += w(static_cast<Eigen::Index>(a) * s + b) * c[1][b];
            }
            sum += c[0][a] * row;
        }
    } else {
        for (int a = 0; a < s; ++a) {
            double slab = 0.0;
            for (int b = 0; b < s; ++b) {
                double row = 0.0;
                for (int cc = 0; cc < s; ++cc) {
                    row += w((static_cast<Eigen::Index>(a) * s + b) * s + cc) * c[2][cc];
                }
                slab += c[1][b] * row;
            }
            sum += c[0][a] * slab;
        }
    }
    return sum;
}

std::complex<double> kernel_approx_complex(const FourierGrid& grid, std::span<const double> z) {
    const Eigen::VectorXcd phi = feature_vector(grid, z);
    // sum_j w_j e^{i theta_j} = sum_j sqrt(w_j) phi_j(z)
    std::complex<double> sum{0.0, 0.0};
    const auto& sw = grid.sqrt_weights();
    for (Eigen::Index l = 0; l < phi.size(); ++l) {
        sum += sw(l) * phi(l);
    }
    return sum;
}

Eigen::VectorXd kernel_approx_tensor(const FourierGrid& grid, const Eigen::VectorXd& axis) {
    const Eigen::Index n = axis.size();
    const int s = grid.side();
    const Eigen::MatrixXd c = cos_table(grid.h(), grid.m(), axis);
    const auto& w = grid.weights();
    Eigen::VectorXd out;
    if (grid.d() == 1) {
        out = c * w;
    } else if (grid.d() == 2) {
        // Column-major view: wt(j2, j1) = w(j1, j2).
        const Eigen::Map<const Eigen::MatrixXd> wt(w.data(), s, s);
        const Eigen::MatrixXd rt = c * wt * c.transpose();  // rt(a2, a1)
        out = Eigen::Map<const Eigen::VectorXd>(rt.data(), n * n);
    } else {
        out = Eigen::VectorXd::Zero(n * n * n);
        for (int a = 0; a < s; ++a) {
            const Eigen::Map<const Eigen::MatrixXd> slab(w.data() + static_cast<Eigen::Index>(a) * s * s,
                                                         s, s);
            const Eigen::MatrixXd rt = c * slab * c.transpose();  // rt(a3, a2)
            const Eigen::Map<const Eigen::VectorXd> flat(rt.data(), n * n);
            for (Eigen::Index a1 = 0; a1 < n; ++a1) {
                out.segment(a1 * n * n, n * n) += c(a1, a) * flat;
            }
        }
    }
    return out;
}

Eigen::VectorXd kernel_exact_tensor(const KernelSpec& kernel, int d, const Eigen::VectorXd& axis) {
    if (d < 1 || d > 3) {
        throw std::invalid_argument("dimension d must be 1, 2 or 3");
    }
    const Eigen::Index n = axis.size();
    Eigen::VectorXd out(static_cast<Eigen::Index>(std::pow(n, d)));
    if (d == 1) {
        for (Eigen::Index a = 0; a < n; ++a) {
            out(a) = kernel_radial(kernel, axis(a));
        }
    } else if (d == 2) {
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                out(a * n + b) = kernel_radial(kernel, std::hypot(axis(a), axis(b)));
            }
        }
    } else {
        for (Eigen::Index a = 0; a < n; ++a) {
            for (Eigen::Index b = 0; b < n; ++b) {
                for (Eigen::Index c = 0; c < n; ++c) {
                    out((a * n + b) * n + c) =
                        kernel_radial(kernel, std::hypot(axis(a), axis(b), axis(c)));
                }
            }
        }
    }
    return out;
}

}  // namespace efgp
