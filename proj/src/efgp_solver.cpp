#include "efgp/efgp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "efgp/parallel.hpp"

namespace efgp {

void Dataset::validate() const {
    if (points.cols() < 1 || points.cols() > 3) {
        throw std::invalid_argument("dataset dimension must be 1, 2 or 3");
    }
    if (y.size() != points.rows()) {
        throw std::invalid_argument("dataset has " + std::to_string(points.rows()) +
                                    " points but " + std::to_string(y.size()) + " observations");
    }
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("noise level sigma must be finite and > 0");
    }
    for (Eigen::Index n = 0; n < points.rows(); ++n) {
        for (Eigen::Index i = 0; i < points.cols(); ++i) {
            const double v = points(n, i);
            if (!(v >= 0.0 && v <= 1.0)) {
                throw std::invalid_argument("point " + std::to_string(n) +
                                            " lies outside [0,1]^d; rescale the coordinates");
            }
        }
        if (!std::isfinite(y(n))) {
            throw std::invalid_argument("observation " + std::to_string(n) + " is not finite");
        }
    }
}

EFGPModel::EFGPModel(FourierGrid grid, double sigma, Eigen::VectorXcd beta, Eigen::VectorXcd rhs,
                     FitDiagnostics diagnostics, std::shared_ptr<const ToeplitzOperator> gram,
                     double cg_tol, int max_iter, TransformOptions transforms)
    : grid_(std::move(grid)),
      sigma_(sigma),
      beta_(std::move(beta)),
      rhs_(std::move(rhs)),
      diagnostics_(std::move(diagnostics)),
      gram_(std::move(gram)),
      cg_tol_(cg_tol),
      max_iter_(max_iter),
      transforms_(transforms) {}

Eigen::VectorXcd EFGPModel::system_matvec(const Eigen::VectorXcd& v) const {
    const Eigen::VectorXd& sw = grid_.sqrt_weights();
    Eigen::VectorXcd out = (sigma_ * sigma_) * v;
    if (gram_) {
        const Eigen::VectorXcd u = sw.cwiseProduct(v);
        out += sw.cwiseProduct(gram_->apply(u));
    }
    return out;
}

GridParams resolve_grid_params(const KernelSpec& kernel, int d, const FitOptions& options) {
    if (options.h && options.m) {
        GridParams p;
        p.h = *options.h;
        p.m = *options.m;
        p.eps = options.eps.value_or(0.0);
        p.rule = options.rule;
        return p;
    }
    if (options.h || options.m) {
        throw std::invalid_argument("explicit grid parameters need both h and m");
    }
    if (!options.eps) {
        throw std::invalid_argument("either eps or both h and m must be given");
    }
    return select_params(kernel, d, *options.eps, options.rule);
}

namespace {

EFGPModel fit_on_grid(const Dataset& data, const FourierGrid& grid, double cg_tol, int max_iter,
                      const TransformOptions& transforms, std::vector<std::string> warnings) {
    data.validate();
    if (data.dim() != grid.d()) {
        throw std::invalid_argument("dataset dimension does not match the grid");
    }
    if (!(cg_tol > 0.0)) {
        throw std::invalid_argument("cg_tol must be > 0");
    }
    const auto n = static_cast<std::size_t>(data.size());
    const int iters = max_iter > 0 ? max_iter : default_max_iter(n, data.sigma);
    const Eigen::VectorXd& sw = grid.sqrt_weights();

    // (Phi* y)_j = sqrt(w_j) sum_n y_n e^{-2 pi i h <j, x_n>}.
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(grid.size()));
    std::shared_ptr<const ToeplitzOperator> gram;
    if (n > 0) {
        const Eigen::VectorXcd yc = data.y.cast<std::complex<double>>();
        rhs = sw.cwiseProduct(type1(data.points, yc, grid.h(), grid.m(), -1, transforms,
                                    static_cast<std::size_t>(-1)));
        // (Phi* Phi)_{jj'} = sqrt(w_j w_j') sum_n e^{-2 pi i h <j - j', x_n>}.
        gram = std::make_shared<const ToeplitzOperator>(
            toeplitz_symbol(data.points, grid, -1, transforms));
    }
    FitDiagnostics diag;
    diag.warnings = std::move(warnings);
    const EFGPModel shell(grid, data.sigma, Eigen::VectorXcd(), rhs, FitDiagnostics{}, gram,
                          cg_tol, iters, transforms);
    CgResult res =
        cg_solve([&](const Eigen::VectorXcd& v) { return shell.system_matvec(v); }, rhs, cg_tol,
                 iters);
    diag.cg = std::move(res.diagnostics);
    diag.beta_norm = res.solution.norm();
    if (!diag.cg.converged) {
        diag.warnings.push_back("CG stopped after " + std::to_string(diag.cg.iterations) +
                                " iterations at relative residual " +
                                std::to_string(diag.cg.final_residual));
    }
    return EFGPModel(grid, data.sigma, std::move(res.solution), std::move(rhs), std::move(diag),
                     std::move(gram), cg_tol, iters, transforms);
}

}  // namespace

EFGPModel fit(const Dataset& data, const KernelSpec& kernel, const FitOptions& options) {
    data.validate();
    const GridParams p = resolve_grid_params(kernel, data.dim(), options);
    const FourierGrid grid(kernel, p.h, p.m, data.dim(), options.max_modes);
    return fit_on_grid(data, grid, options.cg_tol, options.max_iter, options.transforms,
                       p.warnings);
}

EFGPModel fit(const Dataset& data, const FourierGrid& grid, double cg_tol, int max_iter,
              const TransformOptions& transforms) {
    return fit_on_grid(data, grid, cg_tol, max_iter, transforms, {});
}

namespace {

void check_targets(const EFGPModel& model, const Points& targets) {
    if (targets.rows() > 0 && targets.cols() != model.grid().d()) {
        throw std::invalid_argument("target dimension does not match the model");
    }
    if (!targets.allFinite()) {
        throw std::domain_error("targets must be finite");
    }
}

}  // namespace

Eigen::VectorXcd predict_mean_complex(const EFGPModel& model, const Points& targets) {
    check_targets(model, targets);
    if (targets.rows() == 0) {
        return Eigen::VectorXcd(0);
    }
    const Eigen::VectorXcd coeffs = model.grid().sqrt_weights().cwiseProduct(model.beta());
    return type2(coeffs, model.grid().m(), targets, model.grid().h(), +1, model.transforms());
}

Eigen::VectorXd predict_mean(const EFGPModel& model, const Points& targets) {
    return predict_mean_complex(model, targets).real();
}

VariancePrediction predict_var(const EFGPModel& model, const Points& targets,
                               std::size_t block_size) {
    check_targets(model, targets);
    const auto t = static_cast<std::size_t>(targets.rows());
    VariancePrediction out;
    out.values.resize(targets.rows());
    out.converged.assign(t, 0);
    out.iterations.assign(t, 0);
    const double s2 = model.sigma() * model.sigma();
    block_size = std::max<std::size_t>(block_size, 1);
    for (std::size_t start = 0; start < t; start += block_size) {
        const std::size_t stop = std::min(t, start + block_size);
        parallel_for(stop - start, [&](std::size_t lo, std::size_t hi) {
            std::vector<double> x(static_cast<std::size_t>(targets.cols()));
            for (std::size_t k = start + lo; k < start + hi; ++k) {
                const auto row = static_cast<Eigen::Index>(k);
                for (Eigen::Index i = 0; i < targets.cols(); ++i) {
                    x[static_cast<std::size_t>(i)] = targets(row, i);
                }
                // Column of Phi(x)*, conjugate of the feature vector.
                const Eigen::VectorXcd phi = feature_vector(model.grid(), x).conjugate();
                const CgResult res = cg_solve(
                    [&](const Eigen::VectorXcd& v) { return model.system_matvec(v); }, phi,
                    model.cg_tol(), model.max_iter());
                out.values(row) = s2 * phi.dot(res.solution).real();
                out.converged[k] = res.diagnostics.converged ? 1 : 0;
                out.iterations[k] = res.diagnostics.iterations;
            }
        });
    }
    return out;
}

}  // namespace efgp
