#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "efgp/kernels.hpp"
#include "efgp/spectral_grid.hpp"
#include "efgp/transforms.hpp"

namespace efgp {

/// Largest N (or M) for which dense N x N matrices are formed.
inline constexpr std::size_t kDenseCap = 10000;

/// Above this size extreme eigenvalues come from Lanczos instead of a full decomposition.
inline constexpr std::size_t kDenseEigenLimit = 2000;

/// K_ij = k(x_i - x_j).  Throws ResourceError above `cap`.
[[nodiscard]] Eigen::MatrixXd dense_covariance(const KernelSpec& kernel, const Points& points,
                                               std::size_t cap = kDenseCap);

/// C_tn = k(x_t - x_n) for targets x_t and data x_n.
[[nodiscard]] Eigen::MatrixXd cross_covariance(const KernelSpec& kernel, const Points& targets,
                                               const Points& points);

/// Phi_nj = phi_j(x_n), the N x M design matrix of the grid features.
[[nodiscard]] Eigen::MatrixXcd design_matrix(const FourierGrid& grid, const Points& points,
                                             std::size_t cap = kDenseCap);

/// K~ = Re(Phi Phi*), i.e. K~_ij = k~(x_i - x_j).
[[nodiscard]] Eigen::MatrixXd approx_covariance(const FourierGrid& grid, const Points& points,
                                                std::size_t cap = kDenseCap);

/// C~_tn = k~(x_t - x_n).
[[nodiscard]] Eigen::MatrixXd approx_cross_covariance(const FourierGrid& grid,
                                                      const Points& targets,
                                                      const Points& points);

/// ||K~ - K||_F accumulated in row blocks, without forming K~.
[[nodiscard]] double approx_error_frobenius(const Eigen::MatrixXd& K, const FourierGrid& grid,
                                            const Points& points);

struct ExactPosterior {
    Eigen::VectorXd alpha;         // (K + sigma^2 I)^{-1} y
    Eigen::VectorXd mean_data;     // K alpha
    Eigen::VectorXd mean_targets;  // k_x^T alpha
    Eigen::VectorXd var_targets;   // k(0) - k_x^T (K + sigma^2 I)^{-1} k_x
};

/// Dense GP posterior by Cholesky factorization.  `cross` is T x N with rows k_x^T.
/// Throws std::runtime_error when K + sigma^2 I is not numerically positive definite.
[[nodiscard]] ExactPosterior exact_posterior(const Eigen::MatrixXd& K, const Eigen::VectorXd& y,
                                             double sigma, const Eigen::MatrixXd& cross,
                                             double prior_variance = 1.0);

// ---------------------------------------------------------------------------
// Spectra

struct SpectrumExtremes {
    double min = 0.0;
    double max = 0.0;
    double residual = 0.0;  // largest Ritz residual of the two extremes; 0 when dense
    int steps = 0;          // Lanczos steps; 0 for a dense decomposition
    bool converged = true;
};

/// Extreme eigenvalues of a symmetric operator of size n by Lanczos with full
/// reorthogonalization.  Converged when both extreme Ritz residuals are <= tol * |theta|_max.
/// On breakdown the iteration restarts from a fresh vector orthogonal to the basis.
[[nodiscard]] SpectrumExtremes lanczos_extremes(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& matvec, Eigen::Index n,
    int max_steps = 400, double tol = 1e-12, std::uint64_t seed = 7);

/// Dense decomposition up to kDenseEigenLimit, Lanczos above.
[[nodiscard]] SpectrumExtremes symmetric_extremes(const Eigen::MatrixXd& A);

/// All eigenvalues in ascending order.
[[nodiscard]] Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& A);

/// Eigenvalues of the Hermitian M x M matrix Phi* Phi, ascending, built densely from the
/// Toeplitz symbol.  Throws ResourceError when M exceeds `cap`.
[[nodiscard]] Eigen::VectorXd gram_eigenvalues(const FourierGrid& grid, const Points& points,
                                               std::size_t cap = kDenseCap);

// ---------------------------------------------------------------------------
// Conditioning

/// (1 + e/sigma^2) kappa + e/sigma^2 with e = ||K~ - K|| (or N eps).
[[nodiscard]] double ws_bound(double kappa_exact, double spectral_err, double n, double sigma);

/// max_n lambda_n / (lambda_n + sigma^2) over the eigenvalues of K.
[[nodiscard]] double solution_operator_norm(const Eigen::MatrixXd& K, double sigma);

struct ConditioningReport {
    std::size_t n = 0;
    double sigma = 0.0;
    double h = 0.0;
    int m = 0;
    double kappa_exact = 0.0;   // kappa(K + sigma^2 I)
    double kappa_fs = 0.0;      // kappa(K~ + sigma^2 I)
    double kappa_ws = 0.0;      // kappa(Phi* Phi + sigma^2 I)
    double bound_exact = 0.0;   // N / sigma^2 + 1
    double bound_ws = 0.0;      // ws_bound with the measured kernel-matrix error
    double ratio_ws = 0.0;      // kappa_ws / bound_exact
    double solution_operator_norm = 0.0;
    double kernel_error = 0.0;  // ||K~ - K||_F, an upper bound on the spectral norm
    bool lanczos = false;       // K spectrum from Lanczos rather than a full decomposition
    std::size_t modes = 0;      // M
    double rounding = 0.0;      // relative eigensolver rounding allowance on kappa comparisons

    /// The weight-space bound assumes M < N; for N <= M, Phi* Phi has M - N zero eigenvalues
    /// and only the function-space half is checked.
    [[nodiscard]] bool ws_lemma_applies() const { return modes < n; }

    [[nodiscard]] bool exact_bound_holds() const {
        return kappa_exact <= bound_exact * (1.0 + rounding);
    }
    [[nodiscard]] bool solution_norm_holds() const { return solution_operator_norm < 1.0; }
    [[nodiscard]] bool ws_bound_holds() const {
        const double b = bound_ws * (1.0 + rounding);
        return kappa_fs <= b && (!ws_lemma_applies() || kappa_ws <= b);
    }
};

/// Spectral data of one point set; report() is then cheap for any sigma.
class ConditioningAnalysis {
public:
    ConditioningAnalysis(const KernelSpec& kernel, const Points& points, const FourierGrid& grid);

    [[nodiscard]] ConditioningReport report(double sigma) const;

    [[nodiscard]] const SpectrumExtremes& kernel_spectrum() const { return k_; }
    [[nodiscard]] const Eigen::VectorXd& gram_spectrum() const { return gram_; }
    [[nodiscard]] double kernel_error() const { return kernel_error_; }

private:
    std::size_t n_;
    double h_;
    int m_;
    SpectrumExtremes k_;
    Eigen::VectorXd gram_;  // ascending, clamped at 0
    double kernel_error_;
    bool lanczos_;
};

[[nodiscard]] ConditioningReport condition_report(const KernelSpec& kernel, const Points& points,
                                                  double sigma, const FourierGrid& grid);

struct CovarianceErrorReport {
    double frobenius = 0.0;        // ||K - K~||_F
    double spectral = 0.0;         // ||K - K~||
    double n_eps = 0.0;            // N eps
    double max_eig_shift = 0.0;    // max_i |lambda_i(K~) - lambda_i(K)|, both sorted
    double mean_error = 0.0;       // ||mu - mu~|| / ||y||
    double mean_bound = 0.0;       // ||K - K~|| / sigma^2
    double mean_bound_eps = 0.0;   // N eps / sigma^2

    bool norms_ok = false;    // spectral <= frobenius <= N eps
    bool pairing_ok = false;  // max_eig_shift <= spectral
    bool mean_ok = false;     // mean_error <= mean_bound <= mean_bound_eps

    [[nodiscard]] bool all_ok() const { return norms_ok && pairing_ok && mean_ok; }
};

/// Checks of the kernel-matrix error and its effect on the in-sample posterior mean.
[[nodiscard]] CovarianceErrorReport covariance_error_checks(const Eigen::MatrixXd& K,
                                                            const Eigen::MatrixXd& K_approx,
                                                            double eps, double sigma,
                                                            const Eigen::VectorXd& y);

}  // namespace efgp
