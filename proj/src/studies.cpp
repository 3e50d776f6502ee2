#include "efgp/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "efgp/error_bounds.hpp"
#include "efgp/parallel.hpp"

namespace efgp {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double draw(Rng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

int draw_int(Rng& rng, int lo, int hi) {
    const int v = lo + static_cast<int>(std::floor((hi - lo + 1) * rng.uniform()));
    return std::min(v, hi);
}

}  // namespace

double Rng::uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    if (spare_) {
        const double v = *spare_;
        spare_.reset();
        return v;
    }
    double u = 0.0;
    while (u == 0.0) {
        u = uniform();
    }
    const double v = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double t = 2.0 * std::numbers::pi * v;
    spare_ = r * std::sin(t);
    return r * std::cos(t);
}

Points uniform_points(std::size_t n, int d, Rng& rng) {
    if (d < 1 || d > 3) {
        throw std::invalid_argument("dimension must be 1, 2 or 3");
    }
    Points p(static_cast<Eigen::Index>(n), d);
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
        for (int c = 0; c < d; ++c) {
            p(i, c) = rng.uniform();
        }
    }
    return p;
}

TestFunction parse_test_function(const std::string& tag) {
    if (tag == "sin6") {
        return TestFunction::sin6;
    }
    if (tag == "bump") {
        return TestFunction::bump;
    }
    if (tag == "const") {
        return TestFunction::constant;
    }
    throw std::invalid_argument("unknown test function '" + tag + "' (expected sin6, bump or const)");
}

std::string test_function_name(TestFunction f) {
    switch (f) {
        case TestFunction::sin6:
            return "sin6";
        case TestFunction::bump:
            return "bump";
        case TestFunction::constant:
            return "const";
    }
    return "";
}

double test_function(TestFunction f, std::span<const double> x) {
    switch (f) {
        case TestFunction::sin6: {
            double s = 0.0;
            for (double v : x) {
                s += std::sin(6.0 * v);
            }
            return s;
        }
        case TestFunction::bump: {
            double p = 1.0;
            for (double v : x) {
                p *= 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * v));
            }
            return p;
        }
        case TestFunction::constant:
            return 1.0;
    }
    return 0.0;
}

Dataset synthesize(std::size_t n, int d, TestFunction f, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("sigma must be finite and >= 0");
    }
    Rng rng(seed);
    Dataset data;
    data.points = uniform_points(n, d, rng);
    data.sigma = sigma;
    data.y.resize(static_cast<Eigen::Index>(n));
    std::vector<double> x(static_cast<std::size_t>(d));
    for (Eigen::Index i = 0; i < data.points.rows(); ++i) {
        for (int c = 0; c < d; ++c) {
            x[static_cast<std::size_t>(c)] = data.points(i, c);
        }
        data.y(i) = test_function(f, x);
    }
    for (Eigen::Index i = 0; i < data.y.size(); ++i) {
        data.y(i) += sigma * rng.normal();
    }
    return data;
}

// ---------------------------------------------------------------------------

int scan_points(const BoundStudyConfig& config, int d) {
    switch (d) {
        case 1:
            return config.scan_1d;
        case 2:
            return config.scan_2d;
        default:
            return config.scan_3d;
    }
}

BoundStudyRow bound_row(const KernelSpec& kernel, double h, int m, int d, int points_per_axis,
                        bool with_rms) {
    const FourierGrid grid(kernel, h, m, d);
    BoundStudyRow row;
    row.kernel = kernel;
    row.d = d;
    row.h = h;
    row.m = m;
    const ErrorBudget budget = error_budget(kernel, h, m, d, Regime::rigorous);
    row.alias_bound = budget.aliasing_bound;
    row.trunc_bound = budget.truncation_bound;
    row.measured_sup = sup_error_scan(grid, points_per_axis);
    row.measured_rms = with_rms ? rms_error_measure(grid).value : kNaN;
    row.heuristic_rms =
        kernel.is_matern() ? rms_heuristic(kernel.nu, kernel.lengthscale, h, m, d) : kNaN;
    // Summing M terms of size w_j and evaluating k each cost a few ulps of k~(0) ~ 1.
    row.allowance = 64.0 * std::numeric_limits<double>::epsilon() *
                    (grid.weight_sum() + 1.0) * std::sqrt(static_cast<double>(grid.size()));
    row.pass = row.measured_sup <= row.alias_bound + row.trunc_bound + row.allowance;
    return row;
}

std::vector<BoundStudyRow> bound_study(const BoundStudyConfig& config) {
    struct Draw {
        KernelSpec kernel;
        int d;
        double h;
        int m;
    };
    std::vector<Draw> draws;
    Rng rng(config.seed);
    const bool matern = config.family == KernelFamily::matern;
    if (matern && config.nus.empty()) {
        throw std::invalid_argument("bound study: no smoothness values given");
    }
    for (int d : config.dims) {
        for (int c = 0; c < config.configs_per_dim; ++c) {
            const double nu = matern ? config.nus[static_cast<std::size_t>(c) % config.nus.size()]
                                     : 0.5;
            bool accepted = false;
            for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
                KernelSpec k;
                double h = 0.0;
                if (matern) {
                    const double l_cap =
                        std::min(config.l_max, std::sqrt(nu / (2.0 * d)) / std::numbers::ln2);
                    const double l = draw(rng, config.l_min, l_cap);
                    const double h_cap = 1.0 / (1.0 + std::sqrt(8.0 * nu) * l);
                    h = draw(rng, 0.5 * h_cap, h_cap);
                    k = KernelSpec::matern(nu, l);
                } else {
                    const double l_cap = std::min(config.l_max, 2.0 / std::sqrt(std::numbers::pi));
                    const double l = draw(rng, config.l_min, l_cap);
                    h = draw(rng, 0.1, 0.95);
                    k = KernelSpec::squared_exponential(l);
                }
                const int m = draw_int(rng, config.m_min, config.m_max);
                const ErrorBudget b = error_budget(k, h, m, d, Regime::rigorous);
                if (b.total >= config.min_bound) {
                    draws.push_back({k, d, h, m});
                    accepted = true;
                }
            }
            if (!accepted) {
                throw std::runtime_error("bound study: could not draw an admissible configuration");
            }
        }
    }
    std::vector<BoundStudyRow> rows(draws.size());
    parallel_for(draws.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            const Draw& dr = draws[i];
            rows[i] = bound_row(dr.kernel, dr.h, dr.m, dr.d, scan_points(config, dr.d),
                                config.with_rms);
        }
    });
    return rows;
}

// ---------------------------------------------------------------------------

std::vector<int> rms_sweep_ms(const RmsStudyConfig& config, double nu, double l, int d) {
    const double h = heuristic_h(nu, l, config.eps_alias);
    const double rate = 2.0 * nu + 0.5 * d;
    const double pref = 0.15 / std::pow(std::numbers::pi, nu + 0.5 * d) / std::pow(l, 2.0 * nu);
    const double hm0 = std::pow(pref / config.start_rms, 1.0 / rate);
    const double m0 = std::max(1.0, hm0 / h);
    const int steps = std::max(1, static_cast<int>(std::lround(config.decades * config.points_per_decade)));
    std::vector<int> ms;
    for (int k = 0; k <= steps; ++k) {
        const double m = m0 * std::pow(10.0, config.decades * k / steps);
        const int mi = static_cast<int>(std::lround(m));
        if (ms.empty() || mi > ms.back()) {
            ms.push_back(mi);
        }
    }
    return ms;
}

std::vector<RmsStudyRow> rms_study(const RmsStudyConfig& config) {
    std::vector<RmsStudyRow> rows;
    for (int d : config.dims) {
        for (double nu : config.nus) {
            for (double l : config.ls) {
                const double h = heuristic_h(nu, l, config.eps_alias);
                for (int m : rms_sweep_ms(config, nu, l, d)) {
                    RmsStudyRow r;
                    r.d = d;
                    r.nu = nu;
                    r.l = l;
                    r.h = h;
                    r.m = m;
                    r.heuristic_rms = rms_heuristic(nu, l, h, m, d);
                    r.truncation_dominated = r.heuristic_rms >= 10.0 * config.eps_alias;
                    rows.push_back(r);
                }
            }
        }
    }
    parallel_for(rows.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
            RmsStudyRow& r = rows[i];
            const FourierGrid grid(KernelSpec::matern(r.nu, r.l), r.h, r.m, r.d);
            const RmsMeasurement meas = rms_error_measure(grid, config.quad_order);
            r.measured_rms = meas.value;
            r.converged = meas.converged;
            r.log10_ratio = std::log10(r.measured_rms / r.heuristic_rms);
        }
    });
    return rows;
}

// ---------------------------------------------------------------------------

std::uint64_t cond_instance_seed(std::uint64_t seed, std::size_t n) {
    return seed * 1000003ULL + static_cast<std::uint64_t>(n);
}

std::vector<CondStudyRow> cond_study(const CondStudyConfig& config) {
    const GridParams p = select_params(config.kernel, config.d, config.grid_eps);
    const FourierGrid grid(config.kernel, p.h, p.m, config.d);
    std::vector<CondStudyRow> rows;
    for (std::size_t n : config.ns) {
        const std::uint64_t seed = cond_instance_seed(config.seed, n);
        // Noise is drawn with unit scale and rescaled per sigma below.
        const Dataset base = synthesize(n, config.d, config.function, 1.0, seed);
        const ConditioningAnalysis analysis(config.kernel, base.points, grid);
        Eigen::VectorXd clean(base.y.size());
        std::vector<double> x(static_cast<std::size_t>(config.d));
        for (Eigen::Index i = 0; i < base.points.rows(); ++i) {
            for (int c = 0; c < config.d; ++c) {
                x[static_cast<std::size_t>(c)] = base.points(i, c);
            }
            clean(i) = test_function(config.function, x);
        }
        const Eigen::VectorXd noise = base.y - clean;
        for (double sigma : config.sigmas) {
            CondStudyRow row;
            row.report = analysis.report(sigma);
            row.seed = seed;
            const double kws = row.report.kappa_ws;
            row.contraction_bound = (std::sqrt(kws) - 1.0) / (std::sqrt(kws) + 1.0);
            row.cg_estimate = cg_iteration_estimate(kws, config.cg_tol);
            if (config.run_cg && n > 0) {
                Dataset data;
                data.points = base.points;
                data.y = clean + sigma * noise;
                data.sigma = sigma;
                const EFGPModel model = fit(data, grid, config.cg_tol);
                const CgDiagnostics& cg = model.diagnostics().cg;
                row.cg_iterations = cg.iterations;
                row.cg_contraction = cg.mean_contraction();
                row.cg_converged = cg.converged;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace efgp
