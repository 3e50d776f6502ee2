#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cli.hpp"
#include "efgp/error_bounds.hpp"
#include "efgp/exact_oracle.hpp"
#include "efgp/io.hpp"
#include "efgp/studies.hpp"

using namespace efgp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out;
    std::ostringstream err;
    Run r;
    r.code = cli::run(args, out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

class TempDir {
public:
    TempDir() {
        static int counter = 0;
        path_ = fs::temp_directory_path() /
                ("efgp_cli_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

CsvTable table_of(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

}  // namespace

TEST_CASE("params") {
    Run r = run({"params", "--kernel", "se", "--l", "0.1", "--d", "1", "--eps", "1e-6"});
    CHECK(r.code == 0);
    CHECK(r.out.find("h = 0.63654") != std::string::npos);
    CHECK(r.out.find("m = 15,") != std::string::npos);

    r = run({"params", "--kernel", "matern", "--nu", "0.5", "--l", "0.1", "--d", "1", "--eps",
             "1e-4", "--rule", "heuristic"});
    CHECK(r.code == 0);
    CHECK(r.out.find("heuristic: h = 0.47457") != std::string::npos);
    CHECK(r.out.find("m = 598,") != std::string::npos);
    CHECK(r.out.find("corollary:") != std::string::npos);

    r = run({"params", "--kernel", "se", "--eps", "2"});
    CHECK(r.code == 2);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == 2);
    CHECK(run({"frobnicate"}).code == 2);
    CHECK(run({"params", "--bogus", "1"}).code == 2);
    CHECK(run({"params", "--kernel", "rbf", "--eps", "1e-3"}).code == 2);
    CHECK(run({"params", "--eps", "abc"}).code == 2);
    CHECK(run({"params", "--kernel", "matern", "--nu", "0.5", "--l", "0.1", "--h", "0.9", "--m",
               "10"})
              .code == 2);
    CHECK(run({"rms-study", "--dims", "3"}).code == 2);
    const Run help = run({"synth", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("sin(6 x_i)") != std::string::npos);
    CHECK(help.out.find("(1 - cos(2 pi x_i))/2") != std::string::npos);
}

TEST_CASE("synth") {
    TempDir dir;
    Run r = run({"synth", "--n", "0"});
    CHECK(r.code == 0);
    const CsvTable empty = table_of(r.out);
    CHECK(empty.header == std::vector<std::string>{"x1", "y"});
    CHECK(empty.rows.empty());

    CHECK(run({"synth", "--n", "50", "--d", "2", "--seed", "9", "--out", dir.file("a.csv")}).code == 0);
    const std::string first = slurp(dir.file("a.csv"));
    CHECK(run({"synth", "--n", "50", "--d", "2", "--seed", "9", "--out", dir.file("a.csv")}).code == 0);
    CHECK(slurp(dir.file("a.csv")) == first);
    CHECK(slurp(dir.file("a.csv")).find("# config ") != std::string::npos);

    CHECK(run({"synth", "--n", "3", "--function", "wave"}).code == 2);

    r = run({"synth", "--n", "100000", "--d", "2", "--sigma", "0", "--function", "const"});
    const CsvTable big = table_of(r.out);
    REQUIRE(big.rows.size() == 100000);
    for (int c = 0; c < 2; ++c) {
        double s = 0.0;
        for (const auto& row : big.rows) {
            s += row[static_cast<std::size_t>(c)];
        }
        CHECK(std::abs(s / 1e5 - 0.5) <= 0.01);
    }
    CHECK(big.rows[17][2] == 1.0);
}

TEST_CASE("fit and predict") {
    TempDir dir;
    REQUIRE(run({"synth", "--n", "1000", "--sigma", "0.3", "--seed", "4", "--out",
                 dir.file("data.csv")})
                .code == 0);
    // Targets are the data points themselves.
    const CsvTable data = table_of(slurp(dir.file("data.csv")));
    std::ostringstream targets;
    targets << "x1\n";
    for (const auto& row : data.rows) {
        targets << format_double(row[0]) << "\n";
    }
    spit(dir.file("targets.csv"), targets.str());

    const double eps = 1e-10;
    const Run r = run({"predict", "--data", dir.file("data.csv"), "--targets",
                       dir.file("targets.csv"), "--sigma", "0.3", "--l", "0.1", "--eps", "1e-10",
                       "--cg-tol", "1e-12", "--out", dir.file("pred.csv"), "--model",
                       dir.file("model.json"), "--beta", dir.file("beta.bin")});
    REQUIRE(r.code == 0);
    const CsvTable pred = table_of(slurp(dir.file("pred.csv")));
    REQUIRE(pred.rows.size() == 1000);
    CHECK(pred.header == std::vector<std::string>{"x1", "mean"});

    Points p(1000, 1);
    Eigen::VectorXd y(1000);
    Eigen::VectorXd mu(1000);
    for (int i = 0; i < 1000; ++i) {
        p(i, 0) = data.rows[static_cast<std::size_t>(i)][0];
        y(i) = data.rows[static_cast<std::size_t>(i)][1];
        mu(i) = pred.rows[static_cast<std::size_t>(i)][1];
    }
    const Eigen::MatrixXd K = dense_covariance(KernelSpec::squared_exponential(0.1), p);
    const ExactPosterior exact = exact_posterior(K, y, 0.3, Eigen::MatrixXd(0, 1000));
    CHECK((mu - exact.mean_data).norm() / y.norm() <= 1000 * eps / 0.09);

    const std::string model = slurp(dir.file("model.json"));
    CHECK(model.find("\"converged\": true") != std::string::npos);
    CHECK(model.find("\"config\"") != std::string::npos);
    std::ifstream bin(dir.file("beta.bin"), std::ios::binary);
    const BetaFile beta = read_beta(bin);
    CHECK(beta.d == 1);
    CHECK(beta.beta.size() == 2 * beta.m + 1);

    // Identical rerun, identical bytes.
    const std::string first = slurp(dir.file("pred.csv"));
    REQUIRE(run({"predict", "--data", dir.file("data.csv"), "--targets", dir.file("targets.csv"),
                 "--sigma", "0.3", "--l", "0.1", "--eps", "1e-10", "--cg-tol", "1e-12", "--out",
                 dir.file("pred.csv"), "--model", dir.file("model.json"), "--beta",
                 dir.file("beta.bin")})
                .code == 0);
    CHECK(slurp(dir.file("pred.csv")) == first);
}

TEST_CASE("predict edge cases") {
    TempDir dir;
    REQUIRE(run({"synth", "--n", "40", "--out", dir.file("data.csv")}).code == 0);
    spit(dir.file("empty.csv"), "");
    Run r = run({"predict", "--data", dir.file("data.csv"), "--targets", dir.file("empty.csv"),
                 "--sigma", "0.3", "--eps", "1e-6", "--var"});
    CHECK(r.code == 0);
    const CsvTable t = table_of(r.out);
    CHECK(t.header == std::vector<std::string>{"x1", "mean", "var"});
    CHECK(t.rows.empty());

    spit(dir.file("targets.csv"), "x1\n0.2\n0.7\n");
    r = run({"predict", "--data", dir.file("data.csv"), "--targets", dir.file("targets.csv"),
             "--sigma", "0.3", "--eps", "1e-6", "--var"});
    CHECK(r.code == 0);
    const CsvTable v = table_of(r.out);
    REQUIRE(v.rows.size() == 2);
    CHECK(v.rows[0][2] > 0.0);
    CHECK(v.rows[0][2] < 1.0);

    spit(dir.file("bad.csv"), "x1,y\n0.1,0.5\n0.2,zz\n");
    r = run({"fit", "--data", dir.file("bad.csv"), "--sigma", "0.3", "--eps", "1e-6"});
    CHECK(r.code == 1);
    CHECK(r.err.find("line 3") != std::string::npos);

    spit(dir.file("outside.csv"), "x1,y\n0.1,0.5\n1.7,0.1\n");
    r = run({"fit", "--data", dir.file("outside.csv"), "--sigma", "0.3", "--eps", "1e-6"});
    CHECK(r.code == 1);
    CHECK(r.err.find("rescale") != std::string::npos);

    CHECK(run({"fit", "--data", dir.file("data.csv"), "--eps", "1e-6"}).code == 2);
    r = run({"fit", "--data", dir.file("data.csv"), "--sigma", "0.3", "--eps", "1e-6",
             "--max-iter", "1", "--cg-tol", "1e-14"});
    CHECK(r.code == 1);
}

TEST_CASE("config file with flag override") {
    TempDir dir;
    spit(dir.file("c.json"), R"({"kernel": "se", "l": 0.3, "eps": 1e-6, "d": 1})");
    const Run a = run({"params", "--config", dir.file("c.json"), "--l", "0.1"});
    CHECK(a.code == 0);
    CHECK(a.out.find("m = 15,") != std::string::npos);
    const Run b = run({"params", "--config", dir.file("c.json")});
    CHECK(b.out.find("se(l=0.3") != std::string::npos);
    spit(dir.file("bad.json"), R"({"lengthscale": 0.3})");
    CHECK(run({"params", "--config", dir.file("bad.json")}).code == 2);
}

TEST_CASE("bound study") {
    TempDir dir;
    const Run r = run({"bound-study", "--kernel", "matern", "--configs", "3", "--dims", "1",
                       "--svg", dir.file("b.svg")});
    CHECK(r.code == 0);
    const CsvTable t = table_of(r.out);
    REQUIRE(t.rows.size() == 3);
    for (const auto& row : t.rows) {
        // Pass-through of the bounds for the drawn grid.
        const FourierGrid g(KernelSpec::matern(row[1], row[2]), row[3], static_cast<int>(row[4]), 1);
        CHECK(row[6] == doctest::Approx(matern_alias_bound(row[1], row[2], row[3], 1)).epsilon(1e-14));
        CHECK(row[7] == doctest::Approx(matern_trunc_bound(row[1], row[2], row[3], static_cast<int>(row[4]), 1)).epsilon(1e-14));
        CHECK(row[5] == doctest::Approx(sup_error_scan(g, 10000)).epsilon(1e-12));
        CHECK(row[12] == 1.0);
    }
    CHECK(slurp(dir.file("b.svg")).find("<svg") != std::string::npos);
}

TEST_CASE("bound rows at corollary and heuristic parameters") {
    const GridParams p = se_params(0.1, 1, 1e-6);
    const BoundStudyRow se = bound_row(KernelSpec::squared_exponential(0.1), p.h, p.m, 1, 10000);
    CHECK(se.measured_sup <= 1e-6);
    CHECK(se.pass);
    const double h = heuristic_h(0.5, 0.1, 1e-8);
    const BoundStudyRow m = bound_row(KernelSpec::matern(0.5, 0.1), h, 598, 1, 10000);
    CHECK(m.trunc_bound > 100.0 * m.alias_bound);
    CHECK(m.pass);
}

TEST_CASE("rms and conditioning studies") {
    Run r = run({"rms-study", "--nu", "1.5", "--l", "0.25", "--decades", "0.5",
                 "--points-per-decade", "2"});
    CHECK(r.code == 0);
    CsvTable t = table_of(r.out);
    REQUIRE(t.rows.size() >= 2);
    for (const auto& row : t.rows) {
        CHECK(std::abs(row[7]) <= 0.5);
    }

    r = run({"cond-study", "--n", "10,100", "--sigma", "0.3"});
    CHECK(r.code == 0);
    t = table_of(r.out);
    REQUIRE(t.rows.size() == 2);
    CHECK(std::log10(t.rows[1][8]) == doctest::Approx(std::log10(100 / 0.09 + 1)).epsilon(1e-12));
    CHECK(r.out.find("# summary") != std::string::npos);
    CHECK(run({"cond-study", "--n", "20000"}).code == 2);
}

TEST_CASE("CSV and weight-file round trips") {
    std::ostringstream out;
    write_csv(out, {"hello"}, {"x1", "y"}, {{0.1, 1.0 / 3.0}, {1e-300, -2.5}});
    const CsvTable t = table_of(out.str());
    CHECK(t.comments == std::vector<std::string>{"hello"});
    CHECK(t.rows[0][1] == 1.0 / 3.0);
    CHECK(t.rows[1][0] == 1e-300);

    std::stringstream bin;
    Eigen::VectorXcd b(9);
    for (int i = 0; i < 9; ++i) {
        b(i) = {i * 0.1, -i / 3.0};
    }
    write_beta(bin, 2, 1, b);
    CHECK(bin.str().size() == 16 + 9 * 16);
    const BetaFile f = read_beta(bin);
    CHECK(f.d == 2);
    CHECK(f.m == 1);
    CHECK(f.beta == b);
    std::stringstream junk("XXXX");
    CHECK_THROWS_AS((void)read_beta(junk), ParseError);
}
