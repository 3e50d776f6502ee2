#include "efgp/exact_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "efgp/errors.hpp"
#include "efgp/parallel.hpp"

namespace efgp {

namespace {

void check_cap(Eigen::Index n, std::size_t cap, const char* what) {
    if (static_cast<std::size_t>(n) > cap) {
        throw ResourceError(std::string(what) + ": N = " + std::to_string(n) +
                            " exceeds the dense cap " + std::to_string(cap));
    }
}

void check_dims(const Points& a, const Points& b) {
    if (a.rows() > 0 && b.rows() > 0 && a.cols() != b.cols()) {
        throw std::invalid_argument("point sets have different dimensions");
    }
}

double distance(const Points& a, Eigen::Index i, const Points& b, Eigen::Index j) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
        const double t = a(i, c) - b(j, c);
        s += t * t;
    }
    return std::sqrt(s);
}

// Real and imaginary parts of the design matrix, so that K~ = C C^T + S S^T.
void split_design(const FourierGrid& grid, const Points& points, Eigen::MatrixXd& C,
                  Eigen::MatrixXd& S) {
    const Eigen::MatrixXcd phi = design_matrix(grid, points, static_cast<std::size_t>(-1));
    C = phi.real();
    S = phi.imag();
}

}  // namespace

Eigen::MatrixXd dense_covariance(const KernelSpec& kernel, const Points& points,
                                 std::size_t cap) {
    check_cap(points.rows(), cap, "dense_covariance");
    if (!points.allFinite()) {
        throw std::domain_error("points must be finite");
    }
    const Eigen::Index n = points.rows();
    Eigen::MatrixXd K(n, n);
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t lo, std::size_t hi) {
        for (auto i = static_cast<Eigen::Index>(lo); i < static_cast<Eigen::Index>(hi); ++i) {
            K(i, i) = 1.0;
            for (Eigen::Index j = 0; j < i; ++j) {
                K(i, j) = kernel_radial(kernel, distance(points, i, points, j));
            }
        }
    });
    K.triangularView<Eigen::StrictlyUpper>() = K.transpose();
    return K;
}

Eigen::MatrixXd cross_covariance(const KernelSpec& kernel, const Points& targets,
                                 const Points& points) {
    check_dims(targets, points);
    Eigen::MatrixXd C(targets.rows(), points.rows());
    for (Eigen::Index t = 0; t < targets.rows(); ++t) {
        for (Eigen::Index n = 0; n < points.rows(); ++n) {
            C(t, n) = kernel_radial(kernel, distance(targets, t, points, n));
        }
    }
    return C;
}

Eigen::MatrixXcd design_matrix(const FourierGrid& grid, const Points& points, std::size_t cap) {
    check_cap(points.rows(), cap, "design_matrix");
    if (points.rows() > 0 && points.cols() != grid.d()) {
        throw std::invalid_argument("point dimension does not match the grid");
    }
    Eigen::MatrixXcd phi(points.rows(), static_cast<Eigen::Index>(grid.size()));
    std::vector<double> x(static_cast<std::size_t>(grid.d()));
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
        for (int i = 0; i < grid.d(); ++i) {
            x[static_cast<std::size_t>(i)] = points(n, i);
        }
        phi.row(n) = feature_vector(grid, x).transpose();
    }
    return phi;
}

Eigen::MatrixXd approx_covariance(const FourierGrid& grid, const Points& points,
                                  std::size_t cap) {
    check_cap(points.rows(), cap, "approx_covariance");
    Eigen::MatrixXd C;
    Eigen::MatrixXd S;
    split_design(grid, points, C, S);
    Eigen::MatrixXd K = C * C.transpose();
    K.noalias() += S * S.transpose();
    return K;
}

Eigen::MatrixXd approx_cross_covariance(const FourierGrid& grid, const Points& targets,
                                        const Points& points) {
    check_dims(targets, points);
    Eigen::MatrixXd Ct;
    Eigen::MatrixXd St;
    Eigen::MatrixXd C;
    Eigen::MatrixXd S;
    split_design(grid, targets, Ct, St);
    split_design(grid, points, C, S);
    Eigen::MatrixXd K = Ct * C.transpose();
    K.noalias() += St * S.transpose();
    return K;
}

double approx_error_frobenius(const Eigen::MatrixXd& K, const FourierGrid& grid,
                              const Points& points) {
    if (K.rows() != points.rows() || K.cols() != points.rows()) {
        throw std::invalid_argument("approx_error_frobenius: K does not match the point set");
    }
    Eigen::MatrixXd C;
    Eigen::MatrixXd S;
    split_design(grid, points, C, S);
    const Eigen::Index n = points.rows();
    constexpr Eigen::Index block = 512;
    double sum = 0.0;
    for (Eigen::Index r = 0; r < n; r += block) {
        const Eigen::Index rows = std::min(block, n - r);
        Eigen::MatrixXd E = C.middleRows(r, rows) * C.transpose();
        E.noalias() += S.middleRows(r, rows) * S.transpose();
        E -= K.middleRows(r, rows);
        sum += E.squaredNorm();
    }
    return std::sqrt(sum);
}

ExactPosterior exact_posterior(const Eigen::MatrixXd& K, const Eigen::VectorXd& y, double sigma,
                               const Eigen::MatrixXd& cross, double prior_variance) {
    if (K.rows() != K.cols() || K.rows() != y.size()) {
        throw std::invalid_argument("exact_posterior: K and y sizes do not match");
    }
    if (cross.rows() > 0 && cross.cols() != K.rows()) {
        throw std::invalid_argument("exact_posterior: cross-covariance has the wrong width");
    }
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("exact_posterior: sigma must be > 0");
    }
    Eigen::MatrixXd A = K;
    A.diagonal().array() += sigma * sigma;
    const Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        throw std::runtime_error("K + sigma^2 I is not numerically positive definite");
    }
    ExactPosterior out;
    out.alpha = llt.solve(y);
    out.mean_data = K * out.alpha;
    out.mean_targets = cross * out.alpha;
    out.var_targets.resize(cross.rows());
    if (cross.rows() > 0) {
        // k_x^T A^{-1} k_x = |L^{-1} k_x|^2.
        const Eigen::MatrixXd W = llt.matrixL().solve(cross.transpose());
        out.var_targets = prior_variance - W.colwise().squaredNorm().transpose().array();
    }
    return out;
}

double ws_bound(double kappa_exact, double spectral_err, [[maybe_unused]] double n,
                double sigma) {
    const double r = spectral_err / (sigma * sigma);
    return (1.0 + r) * kappa_exact + r;
}

double solution_operator_norm(const Eigen::MatrixXd& K, double sigma) {
    if (K.rows() == 0) {
        return 0.0;
    }
    const double lmax = std::max(symmetric_extremes(K).max, 0.0);
    return lmax / (lmax + sigma * sigma);
}

ConditioningAnalysis::ConditioningAnalysis(const KernelSpec& kernel, const Points& points,
                                           const FourierGrid& grid)
    : n_(static_cast<std::size_t>(points.rows())), h_(grid.h()), m_(grid.m()) {
    const Eigen::MatrixXd K = dense_covariance(kernel, points);
    k_ = symmetric_extremes(K);
    lanczos_ = n_ > kDenseEigenLimit;
    gram_ = gram_eigenvalues(grid, points).cwiseMax(0.0);
    kernel_error_ = approx_error_frobenius(K, grid, points);
}

ConditioningReport ConditioningAnalysis::report(double sigma) const {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("sigma must be > 0");
    }
    const double s2 = sigma * sigma;
    ConditioningReport r;
    r.n = n_;
    r.sigma = sigma;
    r.h = h_;
    r.m = m_;
    r.lanczos = lanczos_;
    r.kappa_exact = (std::max(k_.max, 0.0) + s2) / (std::max(k_.min, 0.0) + s2);
    const auto M = static_cast<std::size_t>(gram_.size());
    const double gmax = M > 0 ? gram_(gram_.size() - 1) : 0.0;
    const double gmin = M > 0 ? gram_(0) : 0.0;
    r.kappa_ws = (gmax + s2) / (gmin + s2);
    // K~ = Phi Phi* shares the nonzero spectrum of Phi* Phi; the rest is zero.
    const double fs_min =
        n_ > M ? 0.0 : gram_(static_cast<Eigen::Index>(M - n_));
    r.kappa_fs = n_ > 0 ? (gmax + s2) / (fs_min + s2) : 1.0;
    r.bound_exact = static_cast<double>(n_) / s2 + 1.0;
    r.kernel_error = kernel_error_;
    r.bound_ws = ws_bound(r.kappa_exact, kernel_error_, static_cast<double>(n_), sigma);
    r.ratio_ws = r.kappa_ws / r.bound_exact;
    const double lmax = std::max(k_.max, 0.0);
    r.solution_operator_norm = lmax / (lmax + s2);
    r.modes = M;
    // Eigenvalues carry absolute errors of order u lambda_max, relative to the sigma^2 floor.
    r.rounding = 64.0 * std::numeric_limits<double>::epsilon() *
                     std::max(1.0, std::max(lmax, gmax) / s2) *
                     std::sqrt(static_cast<double>(n_ + 1)) +
                 k_.residual / s2;
    return r;
}

ConditioningReport condition_report(const KernelSpec& kernel, const Points& points, double sigma,
                                    const FourierGrid& grid) {
    return ConditioningAnalysis(kernel, points, grid).report(sigma);
}

CovarianceErrorReport covariance_error_checks(const Eigen::MatrixXd& K,
                                              const Eigen::MatrixXd& K_approx, double eps,
                                              double sigma, const Eigen::VectorXd& y) {
    if (K.rows() != K.cols() || K_approx.rows() != K.rows() || K_approx.cols() != K.cols() ||
        y.size() != K.rows()) {
        throw std::invalid_argument("covariance_error_checks: size mismatch");
    }
    CovarianceErrorReport r;
    const auto n = static_cast<double>(K.rows());
    if (K.rows() == 0) {
        r.norms_ok = r.pairing_ok = r.mean_ok = true;
        return r;
    }
    const Eigen::MatrixXd E = K_approx - K;
    r.frobenius = E.norm();
    const Eigen::VectorXd eE = symmetric_eigenvalues(E);
    r.spectral = std::max(std::abs(eE(0)), std::abs(eE(eE.size() - 1)));
    r.n_eps = n * eps;
    const Eigen::VectorXd ek = symmetric_eigenvalues(K);
    const Eigen::VectorXd et = symmetric_eigenvalues(K_approx);
    r.max_eig_shift = (et - ek).cwiseAbs().maxCoeff();

    const Eigen::MatrixXd none(0, K.rows());
    const ExactPosterior exact = exact_posterior(K, y, sigma, none);
    const ExactPosterior approx = exact_posterior(K_approx, y, sigma, none);
    const double ynorm = y.norm();
    r.mean_error = ynorm > 0.0 ? (exact.mean_data - approx.mean_data).norm() / ynorm : 0.0;
    r.mean_bound = r.spectral / (sigma * sigma);
    r.mean_bound_eps = r.n_eps / (sigma * sigma);

    // Rounding in the eigensolvers is of order u ||K||; allow a few ulps of slack.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, ek.cwiseAbs().maxCoeff());
    r.norms_ok = r.spectral <= r.frobenius * (1.0 + 1e-12) + slack && r.frobenius <= r.n_eps;
    r.pairing_ok = r.max_eig_shift <= r.spectral + slack;
    // The dense solves lose about kappa ulps; kappa <= N / sigma^2 + 1.
    const double solve_slack =
        64.0 * std::numeric_limits<double>::epsilon() * (n / (sigma * sigma) + 1.0);
    r.mean_ok =
        r.mean_error <= r.mean_bound + solve_slack && r.mean_bound <= r.mean_bound_eps;
    return r;
}

}  // namespace efgp
