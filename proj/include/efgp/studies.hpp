#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "efgp/efgp_solver.hpp"
#include "efgp/exact_oracle.hpp"
#include "efgp/kernels.hpp"

namespace efgp {

/// mt19937_64 with portable uniform and normal draws (the std distributions are
/// implementation defined, which would break byte-reproducible outputs).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    /// Standard normal by the Box-Muller transform.
    double normal();

private:
    std::mt19937_64 gen_;
    std::optional<double> spare_;
};

/// n points drawn uniformly from [0,1]^d.
[[nodiscard]] Points uniform_points(std::size_t n, int d, Rng& rng);

/// Named test functions for synthetic data:
///   sin6   f(x) = sum_i sin(6 x_i)
///   bump   f(x) = prod_i (1 - cos(2 pi x_i)) / 2
///   const  f(x) = 1
enum class TestFunction { sin6, bump, constant };

/// Throws std::invalid_argument for an unknown tag.
[[nodiscard]] TestFunction parse_test_function(const std::string& tag);
[[nodiscard]] std::string test_function_name(TestFunction f);
[[nodiscard]] double test_function(TestFunction f, std::span<const double> x);

/// Uniform points with y = f(x) + sigma * N(0, 1); points first, then noise, from one stream.
[[nodiscard]] Dataset synthesize(std::size_t n, int d, TestFunction f, double sigma,
                                 std::uint64_t seed);

// ---------------------------------------------------------------------------
// Bound validity

struct BoundStudyConfig {
    KernelFamily family = KernelFamily::squared_exponential;
    std::vector<int> dims{1, 2};
    std::vector<double> nus{0.5, 1.0, 1.5, 2.5};  // Matern only
    int configs_per_dim = 25;
    double l_min = 0.05;
    double l_max = 1.0;
    int m_min = 4;
    int m_max = 200;
    int scan_1d = 10000;
    int scan_2d = 256;
    int scan_3d = 48;
    double min_bound = 1e-10;  // configurations with a smaller total bound are redrawn
    bool with_rms = false;
    std::uint64_t seed = 1;
};

struct BoundStudyRow {
    KernelSpec kernel;
    int d = 1;
    double h = 0.0;
    int m = 0;
    double measured_sup = 0.0;
    double alias_bound = 0.0;
    double trunc_bound = 0.0;
    double measured_rms = 0.0;   // NaN unless requested
    double heuristic_rms = 0.0;  // NaN for the squared-exponential kernel
    double allowance = 0.0;      // rounding allowance added to the bound
    bool pass = false;           // measured_sup <= alias + trunc + allowance
};

/// Measured sup error on [-1,1]^d against both bounds for one grid.
[[nodiscard]] BoundStudyRow bound_row(const KernelSpec& kernel, double h, int m, int d,
                                      int points_per_axis, bool with_rms = false);

/// Randomized admissible configurations, rows in draw order.
[[nodiscard]] std::vector<BoundStudyRow> bound_study(const BoundStudyConfig& config);

/// The scan density used for dimension d.
[[nodiscard]] int scan_points(const BoundStudyConfig& config, int d);

// ---------------------------------------------------------------------------
// Root-mean-square error sweeps

struct RmsStudyConfig {
    std::vector<double> nus{0.5, 1.5, 2.5};
    std::vector<double> ls{0.1, 0.25};
    std::vector<int> dims{1};
    double eps_alias = 1e-8;   // h from the heuristic at this eps
    double start_rms = 1e-3;   // the sweep starts where the heuristic predicts this error
    double decades = 1.0;
    int points_per_decade = 6;
    int quad_order = 16;
};

struct RmsStudyRow {
    int d = 1;
    double nu = 0.0;
    double l = 0.0;
    double h = 0.0;
    int m = 0;
    double measured_rms = 0.0;
    double heuristic_rms = 0.0;
    double log10_ratio = 0.0;
    bool converged = false;
    bool truncation_dominated = false;  // heuristic_rms >= 10 eps_alias
};

/// m values of the sweep for one (nu, l, d).
[[nodiscard]] std::vector<int> rms_sweep_ms(const RmsStudyConfig& config, double nu, double l,
                                            int d);

[[nodiscard]] std::vector<RmsStudyRow> rms_study(const RmsStudyConfig& config);

// ---------------------------------------------------------------------------
// Conditioning

struct CondStudyConfig {
    KernelSpec kernel = KernelSpec::squared_exponential(0.1);
    int d = 1;
    std::vector<std::size_t> ns{10, 100, 1000, 10000};
    std::vector<double> sigmas{0.3};
    double grid_eps = 1e-15;
    bool run_cg = true;
    double cg_tol = 1e-8;
    TestFunction function = TestFunction::sin6;
    std::uint64_t seed = 1;
};

struct CondStudyRow {
    ConditioningReport report;
    std::uint64_t seed = 0;  // seed of this point set
    int cg_iterations = -1;
    double cg_contraction = 0.0;
    double contraction_bound = 0.0;  // (sqrt(kappa_ws) - 1) / (sqrt(kappa_ws) + 1)
    int cg_estimate = 0;             // cg_iteration_estimate(kappa_ws, cg_tol)
    bool cg_converged = false;
};

/// Seed of the point set of size n.
[[nodiscard]] std::uint64_t cond_instance_seed(std::uint64_t seed, std::size_t n);

/// One point set per N, shared across sigmas; rows ordered by N then sigma.
[[nodiscard]] std::vector<CondStudyRow> cond_study(const CondStudyConfig& config);

}  // namespace efgp
