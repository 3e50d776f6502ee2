#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efgp/error_bounds.hpp"
#include "efgp/spectral_grid.hpp"
#include "efgp/transforms.hpp"

namespace efgp {

/// Observations y at points in [0,1]^d with Gaussian noise of standard deviation sigma.
/// An empty dataset is allowed and yields the prior.
struct Dataset {
    Points points;
    Eigen::VectorXd y;
    double sigma = 1.0;

    [[nodiscard]] Eigen::Index size() const { return points.rows(); }
    [[nodiscard]] int dim() const { return static_cast<int>(points.cols()); }

    /// Throws std::invalid_argument naming the first offending row or field.
    void validate() const;
};

// ---------------------------------------------------------------------------
// Conjugate gradient

using LinearOperator = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

struct CgDiagnostics {
    int iterations = 0;
    double final_residual = 0.0;         // ||b - A x|| / ||b|| (recursively updated)
    std::vector<double> residual_history;  // relative residual before each iteration and at exit
    bool converged = false;

    /// (r_k / r_0)^{1/k}; 0 when no iterations were needed.
    [[nodiscard]] double mean_contraction() const;
};

struct CgResult {
    Eigen::VectorXcd solution;
    CgDiagnostics diagnostics;
};

/// Conjugate gradient for a Hermitian positive definite operator, zero initial guess.
/// Stops once the relative residual is <= tol or after max_iter iterations.
[[nodiscard]] CgResult cg_solve(const LinearOperator& matvec, const Eigen::VectorXcd& rhs,
                                double tol, int max_iter);

/// ceil(ln(2/tol) / ln((sqrt(kappa)+1)/(sqrt(kappa)-1))); 1 when kappa = 1.
[[nodiscard]] int cg_iteration_estimate(double kappa, double tol);

/// 10 ceil(sqrt(N)/sigma), capped at 10^5 and at least 10.
[[nodiscard]] int default_max_iter(std::size_t n, double sigma);

// ---------------------------------------------------------------------------
// Weight-space solver

struct FitOptions {
    /// Either eps (parameters chosen by `rule`) or explicit h and m.
    std::optional<double> eps;
    std::optional<double> h;
    std::optional<int> m;
    SelectionRule rule = SelectionRule::corollary;
    double cg_tol = 1e-8;
    int max_iter = 0;  // 0 selects default_max_iter
    TransformOptions transforms;
    std::size_t max_modes = kDefaultMaxModes;
};

struct FitDiagnostics {
    CgDiagnostics cg;
    double beta_norm = 0.0;
    std::vector<std::string> warnings;
};

/// Fitted weights beta over the grid; shares the Gram operator for variance solves.
/// Immutable and safe to use from several threads.
class EFGPModel {
public:
    EFGPModel(FourierGrid grid, double sigma, Eigen::VectorXcd beta, Eigen::VectorXcd rhs,
              FitDiagnostics diagnostics, std::shared_ptr<const ToeplitzOperator> gram,
              double cg_tol, int max_iter, TransformOptions transforms);

    [[nodiscard]] const FourierGrid& grid() const { return grid_; }
    [[nodiscard]] double sigma() const { return sigma_; }
    [[nodiscard]] const Eigen::VectorXcd& beta() const { return beta_; }
    [[nodiscard]] const Eigen::VectorXcd& rhs() const { return rhs_; }
    [[nodiscard]] const FitDiagnostics& diagnostics() const { return diagnostics_; }
    [[nodiscard]] double cg_tol() const { return cg_tol_; }
    [[nodiscard]] int max_iter() const { return max_iter_; }
    [[nodiscard]] const TransformOptions& transforms() const { return transforms_; }

    /// (Phi* Phi + sigma^2 I) v.
    [[nodiscard]] Eigen::VectorXcd system_matvec(const Eigen::VectorXcd& v) const;

private:
    FourierGrid grid_;
    double sigma_;
    Eigen::VectorXcd beta_;
    Eigen::VectorXcd rhs_;
    FitDiagnostics diagnostics_;
    std::shared_ptr<const ToeplitzOperator> gram_;  // null for an empty dataset
    double cg_tol_;
    int max_iter_;
    TransformOptions transforms_;
};

/// Resolves (h, m) from the options.  Throws std::invalid_argument when neither eps nor
/// both h and m are given.
[[nodiscard]] GridParams resolve_grid_params(const KernelSpec& kernel, int d,
                                             const FitOptions& options);

/// Solves (Phi* Phi + sigma^2 I) beta = Phi* y by CG.  A non-converged solve is reported in
/// the diagnostics, not thrown.
[[nodiscard]] EFGPModel fit(const Dataset& data, const KernelSpec& kernel,
                            const FitOptions& options);

/// Same, on a prebuilt grid.
[[nodiscard]] EFGPModel fit(const Dataset& data, const FourierGrid& grid, double cg_tol = 1e-8,
                            int max_iter = 0, const TransformOptions& transforms = {});

/// sum_j beta_j phi_j(x) before taking the real part.
[[nodiscard]] Eigen::VectorXcd predict_mean_complex(const EFGPModel& model, const Points& targets);

/// Re sum_j beta_j phi_j(x).
[[nodiscard]] Eigen::VectorXd predict_mean(const EFGPModel& model, const Points& targets);

struct VariancePrediction {
    Eigen::VectorXd values;
    std::vector<char> converged;  // per target
    std::vector<int> iterations;  // per target
};

/// sigma^2 phi(x)* (Phi* Phi + sigma^2 I)^{-1} phi(x), one CG solve per target.  Targets are
/// processed in blocks of block_size; solves within a block run in parallel.
[[nodiscard]] VariancePrediction predict_var(const EFGPModel& model, const Points& targets,
                                             std::size_t block_size = 256);

}  // namespace efgp
