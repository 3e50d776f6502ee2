#include "efgp/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace efgp {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) {
        out.push_back(trim(cell));
    }
    if (!line.empty() && line.back() == ',') {
        out.emplace_back();
    }
    return out;
}

double parse_number(const std::string& cell, std::size_t line, std::size_t column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = first + cell.size();
    if (!cell.empty() && *first == '+') {
        ++first;
    }
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc() || ptr != last) {
        throw ParseError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                         ": '" + cell + "' is not a number");
    }
    return v;
}

int coordinate_count(const CsvTable& t, bool with_y) {
    const int extra = with_y ? 1 : 0;
    const int d = static_cast<int>(t.header.size()) - extra;
    if (d < 1 || d > 3) {
        throw ParseError(std::string("line 1: expected columns x1..xd") + (with_y ? ",y" : "") +
                         " with d in 1..3");
    }
    for (int i = 0; i < d; ++i) {
        if (t.header[static_cast<std::size_t>(i)] != "x" + std::to_string(i + 1)) {
            throw ParseError("header column " + std::to_string(i + 1) + " is '" +
                             t.header[static_cast<std::size_t>(i)] + "', expected x" +
                             std::to_string(i + 1));
        }
    }
    if (with_y && t.header.back() != "y") {
        throw ParseError("last header column is '" + t.header.back() + "', expected y");
    }
    return d;
}

void put_u32(std::ostream& out, std::uint32_t v) {
    std::array<char, 4> b{};
    for (int i = 0; i < 4; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((v >> (8 * i)) & 0xFFu);
    }
    out.write(b.data(), 4);
}

std::uint32_t get_u32(std::istream& in) {
    std::array<unsigned char, 4> b{};
    in.read(reinterpret_cast<char*>(b.data()), 4);
    if (!in) {
        throw ParseError("weight file: truncated header");
    }
    return std::uint32_t{b[0]} | (std::uint32_t{b[1]} << 8) | (std::uint32_t{b[2]} << 16) |
           (std::uint32_t{b[3]} << 24);
}

void put_f64(std::ostream& out, double v) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    std::array<char, 8> b{};
    for (int i = 0; i < 8; ++i) {
        b[static_cast<std::size_t>(i)] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
    }
    out.write(b.data(), 8);
}

double get_f64(std::istream& in) {
    std::array<unsigned char, 8> b{};
    in.read(reinterpret_cast<char*>(b.data()), 8);
    if (!in) {
        throw ParseError("weight file: truncated data");
    }
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
        bits = (bits << 8) | b[static_cast<std::size_t>(i)];
    }
    return std::bit_cast<double>(bits);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) {
        return "nan";
    }
    return std::string(buf.data(), ptr);
}

CsvTable read_csv(std::istream& in) {
    CsvTable t;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty() && line.front() == '#') {
            const std::size_t skip = line.size() > 1 && line[1] == ' ' ? 2 : 1;
            t.comments.push_back(line.substr(skip));
            continue;
        }
        if (trim(line).empty()) {
            continue;
        }
        std::vector<std::string> cells = split(line);
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size()) {
            throw ParseError("line " + std::to_string(line_no) + ": expected " +
                             std::to_string(t.header.size()) + " fields, found " +
                             std::to_string(cells.size()));
        }
        std::vector<double> row(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            row[c] = parse_number(cells[c], line_no, c + 1);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable read_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open '" + path + "'");
    }
    return read_csv(in);
}

std::vector<std::string> coordinate_names(int d) {
    std::vector<std::string> names;
    for (int i = 1; i <= d; ++i) {
        names.push_back("x" + std::to_string(i));
    }
    return names;
}

Dataset read_dataset(std::istream& in, double sigma) {
    const CsvTable t = read_csv(in);
    if (t.header.empty()) {
        throw ParseError("data file has no header row (expected x1..xd,y)");
    }
    const int d = coordinate_count(t, true);
    Dataset data;
    data.sigma = sigma;
    data.points.resize(static_cast<Eigen::Index>(t.rows.size()), d);
    data.y.resize(static_cast<Eigen::Index>(t.rows.size()));
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (int c = 0; c < d; ++c) {
            const double v = t.rows[r][static_cast<std::size_t>(c)];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ParseError("data row " + std::to_string(r + 1) + ": coordinate x" +
                                 std::to_string(c + 1) + " = " + format_double(v) +
                                 " lies outside [0,1]; rescale the inputs to the unit cube");
            }
            data.points(static_cast<Eigen::Index>(r), c) = v;
        }
        data.y(static_cast<Eigen::Index>(r)) = t.rows[r][static_cast<std::size_t>(d)];
    }
    return data;
}

Points read_points(std::istream& in, int default_dim) {
    const CsvTable t = read_csv(in);
    if (t.header.empty()) {
        return Points(0, default_dim);
    }
    const int d = coordinate_count(t, false);
    Points p(static_cast<Eigen::Index>(t.rows.size()), d);
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        for (int c = 0; c < d; ++c) {
            const double v = t.rows[r][static_cast<std::size_t>(c)];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ParseError("target row " + std::to_string(r + 1) + ": coordinate x" +
                                 std::to_string(c + 1) + " = " + format_double(v) +
                                 " lies outside [0,1]; rescale the inputs to the unit cube");
            }
            p(static_cast<Eigen::Index>(r), c) = v;
        }
    }
    return p;
}

void write_csv(std::ostream& out, const std::vector<std::string>& comments,
               const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    for (const auto& c : comments) {
        out << "# " << c << '\n';
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
        out << (i ? "," : "") << header[i];
    }
    out << '\n';
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << format_double(row[i]);
        }
        out << '\n';
    }
}

void write_dataset(std::ostream& out, const Dataset& data,
                   const std::vector<std::string>& comments) {
    const int d = static_cast<int>(data.points.cols());
    std::vector<std::string> header = coordinate_names(d);
    header.emplace_back("y");
    std::vector<std::vector<double>> rows;
    rows.reserve(static_cast<std::size_t>(data.points.rows()));
    for (Eigen::Index n = 0; n < data.points.rows(); ++n) {
        std::vector<double> row(data.points.row(n).begin(), data.points.row(n).end());
        row.push_back(data.y(n));
        rows.push_back(std::move(row));
    }
    write_csv(out, comments, header, rows);
}

void write_predictions(std::ostream& out, const Points& targets, const Eigen::VectorXd& mean,
                       const Eigen::VectorXd* var, const std::vector<std::string>& comments) {
    std::vector<std::string> header = coordinate_names(static_cast<int>(targets.cols()));
    header.emplace_back("mean");
    if (var != nullptr) {
        header.emplace_back("var");
    }
    std::vector<std::vector<double>> rows;
    for (Eigen::Index n = 0; n < targets.rows(); ++n) {
        std::vector<double> row(targets.row(n).begin(), targets.row(n).end());
        row.push_back(mean(n));
        if (var != nullptr) {
            row.push_back((*var)(n));
        }
        rows.push_back(std::move(row));
    }
    write_csv(out, comments, header, rows);
}

// ---------------------------------------------------------------------------

void write_beta(std::ostream& out, int d, int m, const Eigen::VectorXcd& beta) {
    out.write("EFGB", 4);
    put_u32(out, static_cast<std::uint32_t>(d));
    put_u32(out, static_cast<std::uint32_t>(m));
    put_u32(out, 0);
    for (Eigen::Index i = 0; i < beta.size(); ++i) {
        put_f64(out, beta(i).real());
        put_f64(out, beta(i).imag());
    }
}

BetaFile read_beta(std::istream& in) {
    std::array<char, 4> magic{};
    in.read(magic.data(), 4);
    if (!in || std::memcmp(magic.data(), "EFGB", 4) != 0) {
        throw ParseError("weight file: bad magic (expected EFGB)");
    }
    BetaFile f;
    f.d = static_cast<int>(get_u32(in));
    f.m = static_cast<int>(get_u32(in));
    (void)get_u32(in);
    if (f.d < 1 || f.d > 3 || f.m < 0 || f.m > (1 << 20)) {
        throw ParseError("weight file: invalid header (d=" + std::to_string(f.d) +
                         ", m=" + std::to_string(f.m) + ")");
    }
    Eigen::Index size = 1;
    for (int i = 0; i < f.d; ++i) {
        size *= 2 * f.m + 1;
    }
    f.beta.resize(size);
    for (Eigen::Index i = 0; i < size; ++i) {
        const double re = get_f64(in);
        const double im = get_f64(in);
        f.beta(i) = {re, im};
    }
    return f;
}

// ---------------------------------------------------------------------------

void write_svg_chart(std::ostream& out, const ChartSpec& chart) {
    constexpr double width = 640.0;
    constexpr double height = 420.0;
    constexpr double left = 70.0;
    constexpr double right = 170.0;
    constexpr double top = 40.0;
    constexpr double bottom = 50.0;
    const auto tx = [&](double v) { return chart.log_x ? std::log10(v) : v; };
    const auto ty = [&](double v) { return chart.log_y ? std::log10(v) : v; };
    const auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!chart.log_x || x > 0.0) &&
               (!chart.log_y || y > 0.0);
    };
    double x0 = std::numeric_limits<double>::infinity();
    double x1 = -x0;
    double y0 = x0;
    double y1 = -x0;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (usable(s.x[i], s.y[i])) {
                x0 = std::min(x0, tx(s.x[i]));
                x1 = std::max(x1, tx(s.x[i]));
                y0 = std::min(y0, ty(s.y[i]));
                y1 = std::max(y1, ty(s.y[i]));
            }
        }
    }
    if (!std::isfinite(x0)) {
        x0 = y0 = 0.0;
        x1 = y1 = 1.0;
    }
    if (x1 <= x0) {
        x1 = x0 + 1.0;
    }
    if (y1 <= y0) {
        y1 = y0 + 1.0;
    }
    const double pw = width - left - right;
    const double ph = height - top - bottom;
    const auto px = [&](double v) { return left + pw * (tx(v) - x0) / (x1 - x0); };
    const auto py = [&](double v) { return top + ph * (1.0 - (ty(v) - y0) / (y1 - y0)); };
    static const std::array<const char*, 8> colors{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(chart.title) << "</text>\n";
    out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0;
        const double fy = y0 + (y1 - y0) * k / 4.0;
        const double sx = left + pw * k / 4.0;
        const double sy = top + ph * (1.0 - k / 4.0);
        std::ostringstream lx;
        std::ostringstream ly;
        lx.precision(3);
        ly.precision(3);
        lx << (chart.log_x ? "1e" : "") << fx;
        ly << (chart.log_y ? "1e" : "") << fy;
        out << "<text x=\"" << sx << "\" y=\"" << top + ph + 16
            << "\" text-anchor=\"middle\">" << lx.str() << "</text>\n";
        out << "<text x=\"" << left - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
            << ly.str() << "</text>\n";
    }
    out << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\">" << xml_escape(chart.x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << top + ph / 2
        << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(chart.y_label) << "</text>\n";
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const auto& ser = chart.series[s];
        const char* color = colors[s % colors.size()];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
            << (ser.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"";
        bool first = true;
        for (std::size_t i = 0; i < std::min(ser.x.size(), ser.y.size()); ++i) {
            if (usable(ser.x[i], ser.y[i])) {
                out << (first ? "" : " ") << px(ser.x[i]) << ',' << py(ser.y[i]);
                first = false;
            }
        }
        out << "\"/>\n";
        const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
        out << "<line x1=\"" << width - right + 10 << "\" y1=\"" << ly << "\" x2=\""
            << width - right + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
            << "\" stroke-width=\"1.5\"" << (ser.dashed ? " stroke-dasharray=\"5,4\"" : "")
            << "/>\n";
        out << "<text x=\"" << width - right + 40 << "\" y=\"" << ly + 4 << "\">"
            << xml_escape(ser.name) << "</text>\n";
    }
    out << "</svg>\n";
}

}  // namespace efgp
