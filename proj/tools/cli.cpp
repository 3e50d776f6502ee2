#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "efgp/efgp_solver.hpp"
#include "efgp/error_bounds.hpp"
#include "efgp/errors.hpp"
#include "efgp/exact_oracle.hpp"
#include "efgp/io.hpp"
#include "efgp/studies.hpp"

namespace efgp::cli {

namespace {

using nlohmann::json;

/// Configuration or flag problem; maps to the usage exit code.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Kind { number, integer, text, flag, numbers, integers };

struct OptionSpec {
    std::string name;
    Kind kind;
    std::string help;
};

constexpr const char* kFunctionHelp =
    "test function: sin6 f(x) = sum_i sin(6 x_i); bump f(x) = prod_i (1 - cos(2 pi x_i))/2; "
    "const f(x) = 1";

const std::vector<OptionSpec> kKernelOptions{
    {"kernel", Kind::text, "kernel family: se or matern"},
    {"nu", Kind::number, "Matern smoothness (>= 1/2)"},
    {"l", Kind::number, "lengthscale"},
    {"d", Kind::integer, "dimension (1..3)"},
};

const std::vector<OptionSpec> kGridOptions{
    {"eps", Kind::number, "target kernel accuracy in (0, 1)"},
    {"rule", Kind::text, "parameter rule: corollary or heuristic"},
    {"h", Kind::number, "explicit grid spacing (with --m)"},
    {"m", Kind::integer, "explicit half width (with --h)"},
};

const std::vector<OptionSpec> kSolveOptions{
    {"data", Kind::text, "data CSV with columns x1..xd,y"},
    {"sigma", Kind::number, "noise standard deviation"},
    {"cg-tol", Kind::number, "relative residual tolerance of CG"},
    {"max-iter", Kind::integer, "CG iteration cap (0 = default)"},
    {"fast", Kind::flag, "use the Gaussian-gridding NUFFT"},
    {"fast-tol", Kind::number, "NUFFT tolerance in [1e-12, 1e-4]"},
    {"model", Kind::text, "write the model summary JSON here"},
    {"beta", Kind::text, "write the weight vector (binary) here"},
};

std::vector<OptionSpec> concat(std::initializer_list<std::vector<OptionSpec>> parts) {
    std::vector<OptionSpec> all;
    for (const auto& p : parts) {
        all.insert(all.end(), p.begin(), p.end());
    }
    return all;
}

std::map<std::string, std::vector<OptionSpec>> command_options() {
    const std::vector<OptionSpec> io{{"out", Kind::text, "output path (default: stdout)"},
                                     {"seed", Kind::integer, "random seed"}};
    return {
        {"params", concat({kKernelOptions, kGridOptions})},
        {"synth",
         {{"n", Kind::integer, "number of points"},
          {"d", Kind::integer, "dimension (1..3)"},
          {"function", Kind::text, kFunctionHelp},
          {"sigma", Kind::number, "noise standard deviation"},
          {"out", Kind::text, "output path (default: stdout)"},
          {"seed", Kind::integer, "random seed"}}},
        {"fit", concat({kKernelOptions, kGridOptions, kSolveOptions, io})},
        {"predict",
         concat({kKernelOptions, kGridOptions, kSolveOptions, io,
                 {{"targets", Kind::text, "target CSV with columns x1..xd"},
                  {"var", Kind::flag, "also predict the posterior variance"}}})},
        {"bound-study",
         {{"kernel", Kind::text, "kernel family: se or matern"},
          {"nu", Kind::numbers, "Matern smoothness values, cycled over configurations"},
          {"dims", Kind::integers, "dimensions (3 needs --heavy)"},
          {"configs", Kind::integer, "configurations per dimension"},
          {"l-min", Kind::number, "smallest lengthscale"},
          {"l-max", Kind::number, "largest lengthscale"},
          {"m-min", Kind::integer, "smallest half width"},
          {"m-max", Kind::integer, "largest half width"},
          {"rms", Kind::flag, "also measure the RMS error"},
          {"heavy", Kind::flag, "allow d = 3"},
          {"svg", Kind::text, "write an SVG chart here"},
          {"out", Kind::text, "output path (default: stdout)"},
          {"seed", Kind::integer, "random seed"}}},
        {"rms-study",
         {{"nu", Kind::numbers, "Matern smoothness values"},
          {"l", Kind::numbers, "lengthscales"},
          {"dims", Kind::integers, "dimensions (3 needs --heavy)"},
          {"eps-alias", Kind::number, "aliasing accuracy that fixes h"},
          {"start-rms", Kind::number, "predicted RMS error at the first m"},
          {"decades", Kind::number, "length of the m sweep in decades"},
          {"points-per-decade", Kind::integer, "m values per decade"},
          {"heavy", Kind::flag, "allow d = 3"},
          {"svg", Kind::text, "write an SVG chart here"},
          {"out", Kind::text, "output path (default: stdout)"}}},
        {"cond-study",
         {{"kernel", Kind::text, "kernel family: se or matern"},
          {"nu", Kind::number, "Matern smoothness"},
          {"l", Kind::number, "lengthscale"},
          {"d", Kind::integer, "dimension (1..3)"},
          {"n", Kind::integers, "numbers of points"},
          {"sigma", Kind::numbers, "noise levels"},
          {"grid-eps", Kind::number, "kernel accuracy of the grid"},
          {"cg-tol", Kind::number, "CG tolerance"},
          {"no-cg", Kind::flag, "skip the CG solves"},
          {"function", Kind::text, kFunctionHelp},
          {"svg", Kind::text, "write an SVG chart here"},
          {"out", Kind::text, "output path (default: stdout)"},
          {"seed", Kind::integer, "random seed"}}},
    };
}

const std::map<std::string, std::string> kDescriptions{
    {"params", "grid parameters (h, m) and error budget for a target accuracy"},
    {"synth", "synthetic data: uniform points in [0,1]^d, y = f(x) + sigma N(0,1)"},
    {"fit", "fit the weight-space model and write its summary"},
    {"predict", "fit, then predict the posterior mean (and variance) at targets"},
    {"bound-study", "sup error of random grids against the rigorous bounds"},
    {"rms-study", "RMS kernel error against the heuristic over an m sweep"},
    {"cond-study", "condition numbers of the exact, function-space and weight-space systems"},
};

// Raw flag storage; only options that were given end up in the config.
struct Captured {
    std::map<std::string, std::string> text;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, bool> flags;
};

json parse_scalar(const OptionSpec& spec, const std::string& raw) {
    try {
        std::size_t used = 0;
        if (spec.kind == Kind::number || spec.kind == Kind::numbers) {
            const double v = std::stod(raw, &used);
            if (used == raw.size()) {
                return v;
            }
        } else {
            const long long v = std::stoll(raw, &used);
            if (used == raw.size()) {
                return v;
            }
        }
    } catch (const std::exception&) {
    }
    throw UsageError("--" + spec.name + ": '" + raw + "' is not a valid " +
                     (spec.kind == Kind::number || spec.kind == Kind::numbers ? "number"
                                                                               : "integer"));
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw UsageError("cannot open config file '" + path + "'");
    }
    try {
        json j = json::parse(in);
        if (!j.is_object()) {
            throw UsageError("config file '" + path + "' must hold a JSON object");
        }
        return j;
    } catch (const json::parse_error& e) {
        throw UsageError("config file '" + path + "': " + e.what());
    }
}

// Resolved configuration: file values overridden by flags.
class Config {
public:
    Config(std::string command, json values) : command_(std::move(command)), v_(std::move(values)) {}

    [[nodiscard]] const json& values() const { return v_; }
    [[nodiscard]] bool has(const std::string& k) const { return v_.contains(k); }

    double number(const std::string& k, double def) const { return get<double>(k, def); }
    std::optional<double> number(const std::string& k) const {
        return has(k) ? std::optional<double>(get<double>(k, 0.0)) : std::nullopt;
    }
    long long integer(const std::string& k, long long def) const { return get<long long>(k, def); }
    std::string text(const std::string& k, const std::string& def) const {
        return get<std::string>(k, def);
    }
    bool flag(const std::string& k) const { return get<bool>(k, false); }
    std::vector<double> numbers(const std::string& k, std::vector<double> def) const {
        return get<std::vector<double>>(k, std::move(def));
    }
    std::vector<int> integers(const std::string& k, std::vector<int> def) const {
        return get<std::vector<int>>(k, std::move(def));
    }

    /// "# " comment lines embedding the command and the resolved configuration.
    [[nodiscard]] std::vector<std::string> echo() const {
        return {"efgp " + command_, "config " + v_.dump()};
    }

    void set_default(const std::string& k, json value) {
        if (!has(k)) {
            v_[k] = std::move(value);
        }
    }

private:
    template <typename T>
    T get(const std::string& k, T def) const {
        if (!v_.contains(k)) {
            return def;
        }
        try {
            return v_.at(k).get<T>();
        } catch (const json::exception&) {
            throw UsageError("option '" + k + "' has the wrong type: " + v_.at(k).dump());
        }
    }

    std::string command_;
    json v_;
};

// ---------------------------------------------------------------------------
// Output helpers

class Sink {
public:
    Sink(const Config& cfg, std::ostream& fallback, bool binary = false) {
        const std::string path = cfg.text("out", "");
        if (path.empty() || path == "-") {
            stream_ = &fallback;
        } else {
            file_.open(path, binary ? std::ios::binary : std::ios::out);
            if (!file_) {
                throw std::runtime_error("cannot write '" + path + "'");
            }
            stream_ = &file_;
        }
    }
    std::ostream& stream() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_ = nullptr;
};

std::ofstream open_file(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) {
        throw std::runtime_error("cannot write '" + path + "'");
    }
    return f;
}

void write_svg(const Config& cfg, ChartSpec chart) {
    const std::string path = cfg.text("svg", "");
    if (path.empty()) {
        return;
    }
    std::ofstream f = open_file(path);
    f << "<!-- " << cfg.echo()[0] << " " << cfg.echo()[1] << " -->\n";
    write_svg_chart(f, chart);
}

// ---------------------------------------------------------------------------
// Shared resolution

KernelSpec resolve_kernel(const Config& cfg) {
    const std::string family = cfg.text("kernel", "se");
    KernelSpec k;
    if (family == "se") {
        k = KernelSpec::squared_exponential(cfg.number("l", 0.1));
    } else if (family == "matern") {
        k = KernelSpec::matern(cfg.number("nu", 0.5), cfg.number("l", 0.1));
    } else {
        throw UsageError("--kernel must be se or matern, got '" + family + "'");
    }
    k.validate();
    return k;
}

SelectionRule resolve_rule(const Config& cfg) {
    const std::string rule = cfg.text("rule", "corollary");
    if (rule == "corollary") {
        return SelectionRule::corollary;
    }
    if (rule == "heuristic") {
        return SelectionRule::heuristic;
    }
    throw UsageError("--rule must be corollary or heuristic, got '" + rule + "'");
}

int resolve_dim(const Config& cfg) {
    const long long d = cfg.integer("d", 1);
    if (d < 1 || d > 3) {
        throw UsageError("--d must be 1, 2 or 3");
    }
    return static_cast<int>(d);
}

void check_eps(const Config& cfg, const std::string& key) {
    if (const auto eps = cfg.number(key); eps && !(*eps > 0.0 && *eps < 1.0)) {
        throw UsageError("--" + key + " must lie in (0, 1), got " + format_double(*eps));
    }
}

FitOptions resolve_fit_options(const Config& cfg) {
    FitOptions o;
    check_eps(cfg, "eps");
    o.eps = cfg.number("eps");
    o.h = cfg.number("h");
    if (cfg.has("m")) {
        o.m = static_cast<int>(cfg.integer("m", 0));
    }
    if (!o.eps && !(o.h && o.m)) {
        throw UsageError("give --eps or both --h and --m");
    }
    if (o.h.has_value() != o.m.has_value()) {
        throw UsageError("--h and --m must be given together");
    }
    o.rule = resolve_rule(cfg);
    o.cg_tol = cfg.number("cg-tol", 1e-8);
    if (!(o.cg_tol > 0.0 && o.cg_tol < 1.0)) {
        throw UsageError("--cg-tol must lie in (0, 1)");
    }
    o.max_iter = static_cast<int>(cfg.integer("max-iter", 0));
    o.transforms.fast = cfg.flag("fast");
    o.transforms.tol = cfg.number("fast-tol", 1e-12);
    return o;
}

Dataset load_data(const Config& cfg) {
    const std::string path = cfg.text("data", "");
    if (path.empty()) {
        throw UsageError("--data is required");
    }
    if (!cfg.has("sigma")) {
        throw UsageError("--sigma is required");
    }
    const double sigma = cfg.number("sigma", 0.0);
    if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw UsageError("--sigma must be > 0");
    }
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open data file '" + path + "'");
    }
    try {
        return read_dataset(in, sigma);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what());
    }
}

std::vector<int> resolve_dims(const Config& cfg, std::vector<int> def) {
    std::vector<int> dims = cfg.integers("dims", std::move(def));
    for (int d : dims) {
        if (d < 1 || d > 3) {
            throw UsageError("--dims entries must be 1, 2 or 3");
        }
        if (d == 3 && !cfg.flag("heavy")) {
            throw UsageError("d = 3 studies need --heavy");
        }
    }
    return dims;
}

json budget_json(const ErrorBudget& b) {
    return {{"aliasing", b.aliasing_bound},
            {"truncation", b.truncation_bound},
            {"total", b.total},
            {"regime", b.regime == Regime::rigorous ? "rigorous" : "heuristic"},
            {"warnings", b.warnings}};
}

json kernel_json(const KernelSpec& k) {
    json j{{"family", k.is_matern() ? "matern" : "se"}, {"lengthscale", k.lengthscale}};
    if (k.is_matern()) {
        j["nu"] = k.nu;
    }
    return j;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_params(const Config& cfg, std::ostream& out, std::ostream& err) {
    const KernelSpec kernel = resolve_kernel(cfg);
    const int d = resolve_dim(cfg);
    check_eps(cfg, "eps");
    const auto eps = cfg.number("eps");
    const auto h = cfg.number("h");
    const bool explicit_grid = h && cfg.has("m");
    if (!eps && !explicit_grid) {
        throw UsageError("give --eps or both --h and --m");
    }
    const auto line = [&](const std::string& label, double hv, int m, Regime regime) {
        const ErrorBudget b = error_budget(kernel, hv, m, d, regime);
        long double modes = std::pow(2.0L * m + 1.0L, d);
        out << label << ": h = " << format_double(hv) << ", m = " << m
            << ", M = " << static_cast<unsigned long long>(modes)
            << ", aliasing = " << format_double(b.aliasing_bound)
            << ", truncation = " << format_double(b.truncation_bound)
            << ", total = " << format_double(b.total) << "\n";
        for (const auto& w : b.warnings) {
            err << "warning: " << w << "\n";
        }
    };
    out << "kernel " << kernel.name() << ", d = " << d;
    if (eps) {
        out << ", eps = " << format_double(*eps);
    }
    out << "\n";
    if (explicit_grid) {
        line("explicit", *h, static_cast<int>(cfg.integer("m", 0)), Regime::rigorous);
        return kExitOk;
    }
    const SelectionRule rule = resolve_rule(cfg);
    if (!kernel.is_matern()) {
        const GridParams p = select_params(kernel, d, *eps, rule);
        for (const auto& w : p.warnings) {
            err << "warning: " << w << "\n";
        }
        line("corollary", p.h, p.m, Regime::rigorous);
        return kExitOk;
    }
    // Matern: both rules side by side, the selected one first.
    std::vector<SelectionRule> order{rule, rule == SelectionRule::corollary
                                               ? SelectionRule::heuristic
                                               : SelectionRule::corollary};
    for (SelectionRule r : order) {
        const GridParams p = select_params(kernel, d, *eps, r);
        for (const auto& w : p.warnings) {
            err << "warning: " << w << "\n";
        }
        if (r == SelectionRule::corollary) {
            line("corollary", p.h, p.m, Regime::rigorous);
        } else {
            line("heuristic", p.h, p.m, Regime::heuristic);
            out << "heuristic rms estimate = "
                << format_double(rms_heuristic(kernel.nu, kernel.lengthscale, p.h, p.m, d))
                << "\n";
        }
    }
    return kExitOk;
}

int cmd_synth(const Config& cfg, std::ostream& out, std::ostream&) {
    const long long n = cfg.integer("n", -1);
    if (n < 0) {
        throw UsageError("--n is required and must be >= 0");
    }
    const int d = resolve_dim(cfg);
    TestFunction f{};
    try {
        f = parse_test_function(cfg.text("function", "sin6"));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    const double sigma = cfg.number("sigma", 0.3);
    const auto seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    const Dataset data = synthesize(static_cast<std::size_t>(n), d, f, sigma, seed);
    Sink sink(cfg, out);
    write_dataset(sink.stream(), data, cfg.echo());
    return kExitOk;
}

struct Fitted {
    Dataset data;
    KernelSpec kernel;
    GridParams params;
    EFGPModel model;
};

Fitted run_fit(const Config& cfg) {
    const KernelSpec kernel = resolve_kernel(cfg);
    Dataset data = load_data(cfg);
    if (data.size() == 0 && cfg.has("d")) {
        data.points.resize(0, resolve_dim(cfg));
    }
    if (cfg.has("d") && resolve_dim(cfg) != data.dim()) {
        throw UsageError("--d " + std::to_string(resolve_dim(cfg)) + " does not match the " +
                         std::to_string(data.dim()) + " coordinate columns of the data");
    }
    const FitOptions opts = resolve_fit_options(cfg);
    const GridParams params = resolve_grid_params(kernel, data.dim(), opts);
    EFGPModel model = fit(data, kernel, opts);
    return {std::move(data), kernel, params, std::move(model)};
}

json model_json(const Config& cfg, const Fitted& f) {
    const auto& g = f.model.grid();
    const auto& cg = f.model.diagnostics().cg;
    const Regime regime =
        f.params.rule == SelectionRule::heuristic ? Regime::heuristic : Regime::rigorous;
    return {{"command", cfg.echo()[0]},
            {"config", cfg.values()},
            {"kernel", kernel_json(f.kernel)},
            {"grid", {{"d", g.d()}, {"h", g.h()}, {"m", g.m()}, {"modes", g.size()}}},
            {"error_budget", budget_json(error_budget(f.kernel, g.h(), g.m(), g.d(), regime))},
            {"n", f.data.size()},
            {"sigma", f.model.sigma()},
            {"cg",
             {{"iterations", cg.iterations},
              {"final_residual", cg.final_residual},
              {"mean_contraction", cg.mean_contraction()},
              {"converged", cg.converged},
              {"tolerance", f.model.cg_tol()},
              {"max_iter", f.model.max_iter()}}},
            {"beta_norm", f.model.diagnostics().beta_norm},
            {"warnings", f.model.diagnostics().warnings}};
}

void write_fit_artifacts(const Config& cfg, const Fitted& f, std::ostream* fallback) {
    const std::string model_path = cfg.text("model", "");
    const json summary = model_json(cfg, f);
    if (!model_path.empty()) {
        std::ofstream m = open_file(model_path);
        m << summary.dump(2) << "\n";
    } else if (fallback != nullptr) {
        *fallback << summary.dump(2) << "\n";
    }
    const std::string beta_path = cfg.text("beta", "");
    if (!beta_path.empty()) {
        std::ofstream b = open_file(beta_path, true);
        write_beta(b, f.model.grid().d(), f.model.grid().m(), f.model.beta());
    }
}

int fit_status(const Fitted& f, std::ostream& err) {
    for (const auto& w : f.model.diagnostics().warnings) {
        err << "warning: " << w << "\n";
    }
    if (!f.model.diagnostics().cg.converged) {
        err << "error: CG did not reach the tolerance in " << f.model.diagnostics().cg.iterations
            << " iterations (residual " << format_double(f.model.diagnostics().cg.final_residual)
            << ")\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_fit(const Config& cfg, std::ostream& out, std::ostream& err) {
    const Fitted f = run_fit(cfg);
    // --out is an alias for --model here.
    Config c = cfg;
    if (!c.has("model") && c.has("out")) {
        c.set_default("model", c.values().at("out"));
    }
    write_fit_artifacts(c, f, &out);
    return fit_status(f, err);
}

int cmd_predict(const Config& cfg, std::ostream& out, std::ostream& err) {
    const std::string targets_path = cfg.text("targets", "");
    if (targets_path.empty()) {
        throw UsageError("--targets is required");
    }
    const Fitted f = run_fit(cfg);
    std::ifstream tin(targets_path);
    if (!tin) {
        throw std::runtime_error("cannot open target file '" + targets_path + "'");
    }
    Points targets;
    try {
        targets = read_points(tin, f.data.dim());
    } catch (const ParseError& e) {
        throw ParseError(targets_path + ": " + e.what());
    }
    if (targets.rows() > 0 && targets.cols() != f.data.dim()) {
        throw UsageError("targets have " + std::to_string(targets.cols()) +
                         " coordinates but the data has " + std::to_string(f.data.dim()));
    }
    const Eigen::VectorXd mean = predict_mean(f.model, targets);
    std::optional<VariancePrediction> var;
    if (cfg.flag("var")) {
        var = predict_var(f.model, targets);
    }
    Sink sink(cfg, out);
    write_predictions(sink.stream(), targets, mean, var ? &var->values : nullptr, cfg.echo());
    write_fit_artifacts(cfg, f, nullptr);
    int status = fit_status(f, err);
    if (var && std::find(var->converged.begin(), var->converged.end(), 0) != var->converged.end()) {
        err << "error: a variance solve did not converge\n";
        status = kExitRuntime;
    }
    return status;
}

int cmd_bound_study(const Config& cfg, std::ostream& out, std::ostream& err) {
    BoundStudyConfig c;
    const std::string family = cfg.text("kernel", "se");
    if (family == "se") {
        c.family = KernelFamily::squared_exponential;
    } else if (family == "matern") {
        c.family = KernelFamily::matern;
    } else {
        throw UsageError("--kernel must be se or matern, got '" + family + "'");
    }
    c.dims = resolve_dims(cfg, c.dims);
    c.nus = cfg.numbers("nu", c.nus);
    c.configs_per_dim = static_cast<int>(cfg.integer("configs", c.configs_per_dim));
    c.l_min = cfg.number("l-min", c.l_min);
    c.l_max = cfg.number("l-max", c.l_max);
    c.m_min = static_cast<int>(cfg.integer("m-min", c.m_min));
    c.m_max = static_cast<int>(cfg.integer("m-max", c.m_max));
    c.with_rms = cfg.flag("rms");
    c.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    if (c.configs_per_dim < 0 || !(c.l_min > 0.0) || c.l_max < c.l_min || c.m_min < 1 ||
        c.m_max < c.m_min) {
        throw UsageError("invalid sweep ranges");
    }
    const std::vector<BoundStudyRow> rows = bound_study(c);
    std::vector<std::vector<double>> table;
    int violations = 0;
    ChartSpec chart{"Measured sup error against the bound", "bound", "measured sup error",
                    true, true, {{"configurations", {}, {}, false}, {"y = x", {}, {}, true}}};
    for (const auto& r : rows) {
        table.push_back({static_cast<double>(r.d), r.kernel.is_matern() ? r.kernel.nu : NAN,
                         r.kernel.lengthscale, r.h, static_cast<double>(r.m), r.measured_sup,
                         r.alias_bound, r.trunc_bound, r.alias_bound + r.trunc_bound, r.allowance,
                         r.measured_rms, r.heuristic_rms, r.pass ? 1.0 : 0.0});
        violations += r.pass ? 0 : 1;
        chart.series[0].x.push_back(r.alias_bound + r.trunc_bound);
        chart.series[0].y.push_back(r.measured_sup);
    }
    std::vector<double> xs = chart.series[0].x;
    std::sort(xs.begin(), xs.end());
    chart.series[1].x = xs;
    chart.series[1].y = xs;
    std::vector<std::string> comments = cfg.echo();
    comments.push_back("kernel " + family + ", scan points per axis d1/d2/d3 = " +
                       std::to_string(c.scan_1d) + "/" + std::to_string(c.scan_2d) + "/" +
                       std::to_string(c.scan_3d));
    Sink sink(cfg, out);
    write_csv(sink.stream(), comments,
              {"d", "nu", "l", "h", "m", "measured_sup", "alias_bound", "trunc_bound",
               "total_bound", "allowance", "measured_rms", "heuristic_rms", "pass"},
              table);
    write_svg(cfg, chart);
    if (violations > 0) {
        err << "bound violated in " << violations << " of " << rows.size() << " configurations\n";
        return kExitViolation;
    }
    return kExitOk;
}

int cmd_rms_study(const Config& cfg, std::ostream& out, std::ostream&) {
    RmsStudyConfig c;
    c.nus = cfg.numbers("nu", c.nus);
    c.ls = cfg.numbers("l", c.ls);
    c.dims = resolve_dims(cfg, c.dims);
    check_eps(cfg, "eps-alias");
    c.eps_alias = cfg.number("eps-alias", c.eps_alias);
    check_eps(cfg, "start-rms");
    c.start_rms = cfg.number("start-rms", c.start_rms);
    c.decades = cfg.number("decades", c.decades);
    c.points_per_decade = static_cast<int>(cfg.integer("points-per-decade", c.points_per_decade));
    if (!(c.decades > 0.0) || c.points_per_decade < 1) {
        throw UsageError("--decades and --points-per-decade must be positive");
    }
    for (double nu : c.nus) {
        KernelSpec::matern(nu, 0.1).validate();
    }
    const std::vector<RmsStudyRow> rows = rms_study(c);
    std::vector<std::vector<double>> table;
    ChartSpec chart{"RMS kernel error", "m", "RMS error", true, true, {}};
    std::string current;
    for (const auto& r : rows) {
        table.push_back({static_cast<double>(r.d), r.nu, r.l, r.h, static_cast<double>(r.m),
                         r.measured_rms, r.heuristic_rms, r.log10_ratio, r.converged ? 1.0 : 0.0,
                         r.truncation_dominated ? 1.0 : 0.0});
        std::ostringstream key;
        key << "d=" << r.d << " nu=" << r.nu << " l=" << r.l;
        if (key.str() != current) {
            current = key.str();
            chart.series.push_back({current, {}, {}, false});
            chart.series.push_back({current + " heuristic", {}, {}, true});
        }
        auto& measured = chart.series[chart.series.size() - 2];
        auto& heuristic = chart.series.back();
        measured.x.push_back(r.m);
        measured.y.push_back(r.measured_rms);
        heuristic.x.push_back(r.m);
        heuristic.y.push_back(r.heuristic_rms);
    }
    Sink sink(cfg, out);
    write_csv(sink.stream(), cfg.echo(),
              {"d", "nu", "l", "h", "m", "measured_rms", "heuristic_rms", "log10_ratio",
               "converged", "truncation_dominated"},
              table);
    write_svg(cfg, chart);
    return kExitOk;
}

int cmd_cond_study(const Config& cfg, std::ostream& out, std::ostream& err) {
    CondStudyConfig c;
    c.kernel = resolve_kernel(cfg);
    c.d = resolve_dim(cfg);
    const std::vector<int> ns = cfg.integers("n", {10, 100, 1000, 10000});
    c.ns.clear();
    for (int n : ns) {
        if (n < 0 || static_cast<std::size_t>(n) > kDenseCap) {
            throw UsageError("--n entries must lie in [0, " + std::to_string(kDenseCap) + "]");
        }
        c.ns.push_back(static_cast<std::size_t>(n));
    }
    c.sigmas = cfg.numbers("sigma", c.sigmas);
    for (double s : c.sigmas) {
        if (!(s > 0.0)) {
            throw UsageError("--sigma entries must be > 0");
        }
    }
    check_eps(cfg, "grid-eps");
    c.grid_eps = cfg.number("grid-eps", c.grid_eps);
    c.cg_tol = cfg.number("cg-tol", c.cg_tol);
    c.run_cg = !cfg.flag("no-cg");
    try {
        c.function = parse_test_function(cfg.text("function", "sin6"));
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    c.seed = static_cast<std::uint64_t>(cfg.integer("seed", 1));
    const std::vector<CondStudyRow> rows = cond_study(c);

    std::vector<std::vector<double>> table;
    ChartSpec chart{"Condition numbers", "N", "condition number", true, true, {}};
    std::map<double, std::size_t> series_of;
    int violations = 0;
    double ratio_min = INFINITY;
    double ratio_max = -INFINITY;
    double ratio_sum = 0.0;
    for (const auto& row : rows) {
        const ConditioningReport& r = row.report;
        const bool theory = r.exact_bound_holds() && r.solution_norm_holds() && r.ws_bound_holds();
        violations += theory ? 0 : 1;
        table.push_back({static_cast<double>(r.n), r.sigma, r.h, static_cast<double>(r.m),
                         static_cast<double>(row.seed), r.kappa_exact, r.kappa_fs, r.kappa_ws,
                         r.bound_exact, r.bound_ws, r.ratio_ws, r.solution_operator_norm,
                         r.kernel_error, static_cast<double>(row.cg_iterations),
                         row.cg_contraction, row.contraction_bound,
                         static_cast<double>(row.cg_estimate), theory ? 1.0 : 0.0});
        ratio_min = std::min(ratio_min, r.ratio_ws);
        ratio_max = std::max(ratio_max, r.ratio_ws);
        ratio_sum += r.ratio_ws;
        if (!series_of.contains(r.sigma)) {
            series_of[r.sigma] = chart.series.size();
            std::ostringstream s;
            s << "sigma=" << r.sigma;
            chart.series.push_back({"kappa_ws " + s.str(), {}, {}, false});
            chart.series.push_back({"kappa_exact " + s.str(), {}, {}, false});
            chart.series.push_back({"N/sigma^2+1 " + s.str(), {}, {}, true});
        }
        const std::size_t k = series_of[r.sigma];
        const double n = static_cast<double>(r.n);
        chart.series[k].x.push_back(n);
        chart.series[k].y.push_back(r.kappa_ws);
        chart.series[k + 1].x.push_back(n);
        chart.series[k + 1].y.push_back(r.kappa_exact);
        chart.series[k + 2].x.push_back(n);
        chart.series[k + 2].y.push_back(r.bound_exact);
    }
    Sink sink(cfg, out);
    std::vector<std::string> comments = cfg.echo();
    write_csv(sink.stream(), comments,
              {"n", "sigma", "h", "m", "seed", "kappa_exact", "kappa_fs", "kappa_ws",
               "bound_exact", "bound_ws", "ratio_ws", "solution_operator_norm", "kernel_error",
               "cg_iterations", "cg_contraction", "contraction_bound", "cg_estimate",
               "theory_holds"},
              table);
    if (!rows.empty()) {
        sink.stream() << "# summary ratio kappa_ws/(N/sigma^2+1): min " << format_double(ratio_min)
                      << ", max " << format_double(ratio_max) << ", mean "
                      << format_double(ratio_sum / static_cast<double>(rows.size())) << "\n";
    }
    write_svg(cfg, chart);
    if (violations > 0) {
        err << "conditioning bounds violated on " << violations << " instances\n";
        return kExitViolation;
    }
    return kExitOk;
}

using Handler = int (*)(const Config&, std::ostream&, std::ostream&);

const std::map<std::string, Handler> kHandlers{
    {"params", cmd_params},           {"synth", cmd_synth},
    {"fit", cmd_fit},                 {"predict", cmd_predict},
    {"bound-study", cmd_bound_study}, {"rms-study", cmd_rms_study},
    {"cond-study", cmd_cond_study},
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equispaced Fourier Gaussian process regression"};
    app.set_help_flag("--help", "print help and exit");
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "help for every subcommand");

    const auto specs = command_options();
    std::map<std::string, Captured> captured;
    std::map<std::string, std::string> config_paths;
    std::map<std::string, std::vector<std::pair<OptionSpec, CLI::Option*>>> registered;
    for (const auto& [name, options] : specs) {
        CLI::App* sub = app.add_subcommand(name, kDescriptions.at(name));
        Captured& cap = captured[name];
        sub->add_option("--config", config_paths[name],
                        "JSON file with the same keys as the flags; flags take precedence");
        for (const auto& spec : options) {
            const std::string flag = "--" + spec.name;
            CLI::Option* opt = nullptr;
            switch (spec.kind) {
                case Kind::flag:
                    opt = sub->add_flag(flag, cap.flags[spec.name], spec.help);
                    break;
                case Kind::numbers:
                case Kind::integers:
                    opt = sub->add_option(flag, cap.lists[spec.name], spec.help)
                              ->delimiter(',')
                              ->type_name(spec.kind == Kind::numbers ? "NUM,..." : "INT,...");
                    break;
                default:
                    opt = sub->add_option(flag, cap.text[spec.name], spec.help)
                              ->type_name(spec.kind == Kind::number    ? "NUM"
                                          : spec.kind == Kind::integer ? "INT"
                                                                       : "TEXT");
            }
            registered[name].emplace_back(spec, opt);
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        const auto subs = app.get_subcommands();
        out << (subs.empty() ? app.help() : subs.front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    const CLI::App* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    try {
        json values = json::object();
        if (!config_paths[name].empty()) {
            values = load_config_file(config_paths[name]);
            for (const auto& [key, v] : values.items()) {
                const auto& reg = registered[name];
                if (std::none_of(reg.begin(), reg.end(),
                                 [&](const auto& p) { return p.first.name == key; })) {
                    throw UsageError("config file: unknown key '" + key + "' for " + name);
                }
            }
        }
        for (const auto& [spec, opt] : registered[name]) {
            if (opt->count() == 0) {
                continue;
            }
            Captured& cap = captured[name];
            switch (spec.kind) {
                case Kind::flag:
                    values[spec.name] = true;
                    break;
                case Kind::text:
                    values[spec.name] = cap.text[spec.name];
                    break;
                case Kind::number:
                case Kind::integer:
                    values[spec.name] = parse_scalar(spec, cap.text[spec.name]);
                    break;
                case Kind::numbers:
                case Kind::integers: {
                    json list = json::array();
                    for (const auto& raw : cap.lists[spec.name]) {
                        list.push_back(parse_scalar(spec, raw));
                    }
                    values[spec.name] = list;
                    break;
                }
            }
        }
        const Config cfg(name, values);
        return kHandlers.at(name)(cfg, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const HypothesisError& e) {
        err << "error: hypothesis violated: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
}

}  // namespace efgp::cli
