#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "efgp/efgp_solver.hpp"

namespace efgp {

/// Malformed input file; the message carries the line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal string that reads back to the same double.
[[nodiscard]] std::string format_double(double v);

/// Parsed CSV table.  Lines starting with '#' are skipped; the first other line is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> comments;  // text after "# " of each comment line
};

[[nodiscard]] CsvTable read_csv(std::istream& in);
[[nodiscard]] CsvTable read_csv_file(const std::string& path);

/// Columns x1..xd,y.  Points outside [0,1]^d are rejected with a hint to rescale.
[[nodiscard]] Dataset read_dataset(std::istream& in, double sigma);
/// Columns x1..xd.  An empty file or a header without rows gives zero points of dimension
/// `default_dim`.
[[nodiscard]] Points read_points(std::istream& in, int default_dim = 1);

/// Writes comment lines "# <line>", then the header and rows.
void write_csv(std::ostream& out, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

void write_dataset(std::ostream& out, const Dataset& data, const std::vector<std::string>& comments);

/// Columns x1..xd,mean[,var].
void write_predictions(std::ostream& out, const Points& targets, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd* var, const std::vector<std::string>& comments);

/// Header names x1..xd.
[[nodiscard]] std::vector<std::string> coordinate_names(int d);

// ---------------------------------------------------------------------------
// Weight vector files: 16-byte header "EFGB", uint32 d, uint32 m, uint32 flags,
// then 2 (2m+1)^d little-endian doubles (real, imaginary).

struct BetaFile {
    int d = 1;
    int m = 0;
    Eigen::VectorXcd beta;
};

void write_beta(std::ostream& out, int d, int m, const Eigen::VectorXcd& beta);
[[nodiscard]] BetaFile read_beta(std::istream& in);

// ---------------------------------------------------------------------------
// Line charts

struct ChartSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct ChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    bool log_y = false;
    std::vector<ChartSeries> series;
};

/// A self-contained SVG document.  Non-finite or non-positive (on log axes) values are skipped.
void write_svg_chart(std::ostream& out, const ChartSpec& chart);

}  // namespace efgp
