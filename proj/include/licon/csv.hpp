#pragma once

#include "licon/grid.hpp"
#include "licon/train.hpp"

#include <fstream>
#include <iosfwd>
#include <string>
#include <vector>

namespace licon {

/// Numeric table: ny rows of nx comma-separated values, '#' starts a comment line.
/// Throws ParseError with the 1-based line and column of the first bad cell.
std::vector<std::vector<double>> read_numeric_csv(std::istream& is, int skip_header_lines = 0);
std::vector<std::vector<double>> read_numeric_csv(const std::string& path, int skip_header_lines = 0);

/// Raster layout: row j holds nodes (0..nx-1, j). Values are written with 17
/// significant digits so a read-back is bitwise equal.
void write_field_csv(const std::string& path, const Grid2D& grid, const Vector& values);
/// Reads a raster and binds it to a grid of mesh width h at the origin.
ScalarField read_field_csv(const std::string& path, double h);

/// Samples as rows "in_0,...,in_{r-1},out_0,...,out_{s-1}" after a header line.
void write_dataset_csv(const std::string& path, const Dataset& data);
Dataset read_dataset_csv(const std::string& path, int input_dim);

/// Minimal row writer; opening failure throws std::runtime_error.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& cell(const std::string& s);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    void end_row();

private:
    std::ofstream out_;
    bool first_ = true;
};

/// %.17g formatting.
std::string format_double(double v);

}  // namespace licon
