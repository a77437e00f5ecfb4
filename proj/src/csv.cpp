#include "licon/csv.hpp"

#include "licon/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace licon {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

double parse_cell(const std::string& line, std::size_t begin, std::size_t end, int lineno) {
    while (begin < end && (line[begin] == ' ' || line[begin] == '\t')) ++begin;
    while (end > begin && (line[end - 1] == ' ' || line[end - 1] == '\t' || line[end - 1] == '\r')) --end;
    const int col = static_cast<int>(begin) + 1;
    if (begin == end) throw ParseError("empty cell", lineno, col);
    double v = 0.0;
    const char* first = line.data() + begin;
    const char* last = line.data() + end;
    if (*first == '+') ++first;
    const auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last) throw ParseError("not a number: '" + line.substr(begin, end - begin) + "'", lineno, col);
    return v;
}

}  // namespace

std::vector<std::vector<double>> read_numeric_csv(std::istream& is, int skip_header_lines) {
    std::vector<std::vector<double>> rows;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (lineno <= skip_header_lines) continue;
        if (line.empty() || line == "\r" || line[0] == '#') continue;
        std::vector<double> row;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::size_t stop = comma == std::string::npos ? line.size() : comma;
            row.push_back(parse_cell(line, start, stop, lineno));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("expected " + std::to_string(rows.front().size()) + " columns, found " +
                                 std::to_string(row.size()),
                             lineno, 1);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::vector<double>> read_numeric_csv(const std::string& path, int skip_header_lines) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_numeric_csv(in, skip_header_lines);
}

void write_field_csv(const std::string& path, const Grid2D& grid, const Vector& values) {
    require(values.size() == grid.size(), "write_field_csv: value count does not match grid");
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_field_csv: cannot open " + path);
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (i) out << ',';
            out << format_double(values[grid.index(i, j)]);
        }
        out << '\n';
    }
}

ScalarField read_field_csv(const std::string& path, double h) {
    const auto rows = read_numeric_csv(path);
    if (rows.empty()) throw ParseError("empty raster", 1, 1);
    const int ny = static_cast<int>(rows.size());
    const int nx = static_cast<int>(rows.front().size());
    Grid2D grid(nx, ny, h);
    Vector v(grid.size());
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) v[grid.index(i, j)] = rows[j][i];
    return ScalarField(grid, v);
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_dataset_csv: cannot open " + path);
    const Eigen::Index r = data.inputs.rows(), s = data.targets.rows();
    for (Eigen::Index i = 0; i < r; ++i) out << (i ? "," : "") << "in_" << i;
    for (Eigen::Index i = 0; i < s; ++i) out << ",out_" << i;
    out << '\n';
    for (int k = 0; k < data.size(); ++k) {
        for (Eigen::Index i = 0; i < r; ++i) out << (i ? "," : "") << format_double(data.inputs(i, k));
        for (Eigen::Index i = 0; i < s; ++i) out << ',' << format_double(data.targets(i, k));
        out << '\n';
    }
}

Dataset read_dataset_csv(const std::string& path, int input_dim) {
    const auto rows = read_numeric_csv(path, 1);
    if (rows.empty()) throw ParseError("data set has no samples", 2, 1);
    const int cols = static_cast<int>(rows.front().size());
    if (input_dim < 1 || input_dim >= cols)
        throw ParseError("data set has " + std::to_string(cols) + " columns, need more than " + std::to_string(input_dim), 2, 1);
    Dataset d;
    const int n = static_cast<int>(rows.size());
    d.inputs.resize(input_dim, n);
    d.targets.resize(cols - input_dim, n);
    for (int k = 0; k < n; ++k)
        for (int c = 0; c < cols; ++c) (c < input_dim ? d.inputs(c, k) : d.targets(c - input_dim, k)) = rows[k][c];
    return d;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot open " + path);
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& s) {
    if (!first_) out_ << ',';
    out_ << s;
    first_ = false;
    return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }
CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
    out_ << '\n';
    first_ = true;
}

}  // namespace licon
