#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "efgp/efgp_solver.hpp"

namespace efgp {

double CgDiagnostics::mean_contraction() const {
    if (iterations == 0 || residual_history.empty()) {
        return 0.0;
    }
    const double r0 = residual_history.front();
    const double rk = residual_history.back();
    if (!(r0 > 0.0)) {
        return 0.0;
    }
    return std::pow(rk / r0, 1.0 / iterations);
}

CgResult cg_solve(const LinearOperator& matvec, const Eigen::VectorXcd& rhs, double tol,
                  int max_iter) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("cg_solve: tol must be > 0");
    }
    if (max_iter < 0) {
        throw std::invalid_argument("cg_solve: max_iter must be >= 0");
    }
    CgResult out;
    out.solution = Eigen::VectorXcd::Zero(rhs.size());
    auto& diag = out.diagnostics;
    const double bnorm = rhs.norm();
    if (bnorm == 0.0) {
        diag.converged = true;
        diag.residual_history.push_back(0.0);
        return out;
    }
    Eigen::VectorXcd r = rhs;
    Eigen::VectorXcd p = r;
    double rs = r.squaredNorm();
    diag.residual_history.push_back(1.0);
    for (int k = 0; k < max_iter; ++k) {
        const Eigen::VectorXcd ap = matvec(p);
        const double pap = p.dot(ap).real();
        if (!(pap > 0.0)) {
            throw std::runtime_error("cg_solve: operator is not positive definite");
        }
        const double alpha = rs / pap;
        out.solution += alpha * p;
        r -= alpha * ap;
        const double rs_new = r.squaredNorm();
        ++diag.iterations;
        const double rel = std::sqrt(rs_new) / bnorm;
        diag.residual_history.push_back(rel);
        if (rel <= tol) {
            diag.converged = true;
            break;
        }
        p = r + (rs_new / rs) * p;
        rs = rs_new;
    }
    diag.final_residual = diag.residual_history.back();
    return out;
}

int cg_iteration_estimate(double kappa, double tol) {
    if (!(kappa >= 1.0)) {
        throw std::invalid_argument("cg_iteration_estimate: kappa must be >= 1");
    }
    if (!(tol > 0.0)) {
        throw std::invalid_argument("cg_iteration_estimate: tol must be > 0");
    }
    if (kappa == 1.0) {
        return 1;
    }
    const double s = std::sqrt(kappa);
    const double rate = std::log((s + 1.0) / (s - 1.0));
    const double est = std::ceil(std::log(2.0 / tol) / rate);
    return static_cast<int>(std::min(est, static_cast<double>(std::numeric_limits<int>::max())));
}

int default_max_iter(std::size_t n, double sigma) {
    if (!(sigma > 0.0)) {
        throw std::invalid_argument("default_max_iter: sigma must be > 0");
    }
    const double v = 10.0 * std::ceil(std::sqrt(static_cast<double>(n)) / sigma);
    return static_cast<int>(std::clamp(v, 10.0, 1.0e5));
}

}  // namespace efgp
