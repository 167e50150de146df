#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace sdelap::cli {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

/// Numbers as "%.17g", so reading them back gives the same doubles.
std::string format_number(double v);
void write_csv(std::ostream& out, const Table& t);
void write_csv_file(const std::string& path, const Table& t);
/// Comma-separated with one header line; "nan" or empty cells read as NaN.
Table read_csv_file(const std::string& path);

}  // namespace sdelap::cli
