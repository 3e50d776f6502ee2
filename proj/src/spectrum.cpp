#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "efgp/errors.hpp"
#include "efgp/exact_oracle.hpp"

namespace efgp {

namespace {

Eigen::VectorXd random_unit(Eigen::Index n, std::mt19937_64& gen) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v(i) = normal(gen);
    }
    return v / v.norm();
}

// Two passes of classical Gram-Schmidt against the first k columns of V.
void reorthogonalize(const Eigen::MatrixXd& V, Eigen::Index k, Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
        w -= V.leftCols(k) * (V.leftCols(k).transpose() * w);
    }
}

}  // namespace

SpectrumExtremes lanczos_extremes(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec, Eigen::Index n,
    int max_steps, double tol, std::uint64_t seed) {
    SpectrumExtremes out;
    if (n <= 0) {
        return out;
    }
    const Eigen::Index kmax = std::min<Eigen::Index>(n, std::max(max_steps, 2));
    std::mt19937_64 gen(seed);
    Eigen::MatrixXd V(n, kmax);
    std::vector<double> alpha;
    std::vector<double> beta;  // beta[k] couples v_k and v_{k+1}; 0 marks a restart
    V.col(0) = random_unit(n, gen);
    const double eps = std::numeric_limits<double>::epsilon();
    double scale = 0.0;
    int restarts = 0;
    Eigen::Index k = 0;
    out.converged = false;
    while (k < kmax) {
        Eigen::VectorXd w = matvec(V.col(k));
        const double a = V.col(k).dot(w);
        alpha.push_back(a);
        w -= a * V.col(k);
        if (k > 0) {
            w -= beta[static_cast<std::size_t>(k - 1)] * V.col(k - 1);
        }
        reorthogonalize(V, k + 1, w);
        double b = w.norm();
        scale = std::max({scale, std::abs(a), b});
        ++k;

        const bool breakdown = b <= 64.0 * eps * std::max(scale, 1e-300) * std::sqrt(double(n));
        const bool check = breakdown || k == kmax || k % 8 == 0;
        if (check) {
            Eigen::VectorXd diag = Eigen::Map<Eigen::VectorXd>(alpha.data(), k);
            Eigen::VectorXd sub(std::max<Eigen::Index>(k - 1, 0));
            for (Eigen::Index i = 0; i + 1 < k; ++i) {
                sub(i) = beta[static_cast<std::size_t>(i)];
            }
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> tri;
            tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
            const Eigen::VectorXd& theta = tri.eigenvalues();
            const double theta_abs = std::max(std::abs(theta(0)), std::abs(theta(k - 1)));
            const double r_lo = std::abs(b * tri.eigenvectors()(k - 1, 0));
            const double r_hi = std::abs(b * tri.eigenvectors()(k - 1, k - 1));
            out.min = theta(0);
            out.max = theta(k - 1);
            out.steps = static_cast<int>(k);
            out.residual = std::max(r_lo, r_hi);
            const double thr = tol * std::max(theta_abs, 1e-300);
            // A first breakdown only certifies the Krylov block; probe its complement once.
            if (k == n || (r_lo <= thr && r_hi <= thr && (!breakdown || restarts > 0))) {
                out.converged = true;
                break;
            }
            if (breakdown && k < kmax) {
                // Invariant subspace found: the Ritz values are exact; continue in its
                // orthogonal complement.
                Eigen::VectorXd fresh = random_unit(n, gen);
                reorthogonalize(V, k, fresh);
                const double fn = fresh.norm();
                if (fn <= 1e-8) {
                    out.converged = true;
                    break;
                }
                ++restarts;
                beta.push_back(0.0);
                V.col(k) = fresh / fn;
                continue;
            }
        }
        if (k == kmax) {
            break;
        }
        beta.push_back(b);
        V.col(k) = w / b;
    }
    return out;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A) {
    if (A.rows() != A.cols()) {
        throw std::invalid_argument("symmetric_eigenvalues: matrix is not square");
    }
    if (A.rows() == 0) {
        return Eigen::VectorXd(0);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("symmetric eigendecomposition failed");
    }
    return es.eigenvalues();
}

SpectrumExtremes symmetric_extremes(const Eigen::MatrixXd& A) {
    if (static_cast<std::size_t>(A.rows()) <= kDenseEigenLimit) {
        const Eigen::VectorXd ev = symmetric_eigenvalues(A);
        SpectrumExtremes out;
        if (ev.size() > 0) {
            out.min = ev(0);
            out.max = ev(ev.size() - 1);
        }
        return out;
    }
    return lanczos_extremes([&](const Eigen::VectorXd& v) { return Eigen::VectorXd(A * v); },
                            A.rows());
}

Eigen::VectorXd gram_eigenvalues(const FourierGrid& grid, const Points& points,
                                 std::size_t cap) {
    if (grid.size() > cap) {
        throw ResourceError("weight-space matrix of size " + std::to_string(grid.size()) +
                            " exceeds the dense cap " + std::to_string(cap));
    }
    const Eigen::VectorXd& sw = grid.sqrt_weights();
    const auto M = static_cast<Eigen::Index>(grid.size());
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(M, M);
    if (points.rows() > 0) {
        G = toeplitz_dense(toeplitz_symbol(points, grid, -1));
        G = sw.asDiagonal() * G * sw.asDiagonal();
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("weight-space eigendecomposition failed");
    }
    return es.eigenvalues();
}

}  // namespace efgp
